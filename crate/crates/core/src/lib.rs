//! Bayesian processing of 2D signals whose Walsh wavelet-packet basis is
//! itself random.
//!
//! A signal of side `L = 2^d_max` is generated by drawing a full quadtree
//! `m` (which packet subspaces form the basis), Gaussian coefficients on the
//! leaves of `m`, and synthesizing. Given a noisy observation, the crate
//! computes the posterior over trees and the Bayes-optimal estimate in
//! `O(L^2 d_max)`, even though the number of trees grows doubly
//! exponentially with depth.
//!
//! Modules:
//!
//! - [`wavelet`]: packet filters, full analysis, tree-restricted synthesis
//! - [`tree`]: full quadtrees, the branch-probability prior, sampling, enumeration
//! - [`bayes`]: generative sampling, posterior state, denoisers
//! - [`oracle`]: dense-matrix and exhaustive references for small depths
//! - [`io`]: PGM/CSV signals, hyperparameter and prior-mean files, result tables
//! - [`experiments`]: seeded Monte-Carlo harnesses
//! - [`cli`]: the `wpbayes` command line
//!
//! ```
//! use rand::SeedableRng;
//! use wpbayes::{bayes, tree, experiments};
//!
//! let g = tree::BranchProbabilities::uniform(3, 0.5).unwrap();
//! let hp = bayes::HyperParams::new(g, experiments::synthetic_mu(3, 20.0), 10.0, 4.0).unwrap();
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
//! let m = tree::sample_model(&hp.g, &mut rng);
//! let x = bayes::sample_theta_and_signal(&m, &hp, &mut rng).unwrap();
//! let y = bayes::add_noise(&x, hp.noise_sigma2, &mut rng).unwrap();
//! let estimate = bayes::bayes_denoise(&y, &hp).unwrap();
//! assert!(estimate.mse(&x) < y.mse(&x));
//! ```

pub mod bayes;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod io;
pub mod node;
pub mod oracle;
pub mod signal;
pub mod tree;
pub mod wavelet;

pub use error::{Error, Result};
pub use node::NodeId;
pub use signal::Signal2D;
pub use tree::{BranchProbabilities, QuadTreeModel};
pub use wavelet::PacketTable;
