//! The generative model with a random packet tree, its posterior, and the
//! Bayes-optimal denoiser.
//!
//! Under the Gaussian coefficient prior the evidence of a tree factors over
//! its leaves into per-node terms `psi_s`. Combining those bottom-up with the
//! branch probabilities yields posterior branch probabilities `g~_s` that
//! have the same product form as the prior, so every sum over trees reduces
//! to one pass over the complete tree. All per-node likelihood quantities are
//! kept as logarithms; `psi_s` itself overflows `f64` at ordinary image
//! scales.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::node::{all_nodes, node_count, NodeId};
use crate::signal::Signal2D;
use crate::tree::{BranchProbabilities, QuadTreeModel};
use crate::wavelet::{analyze_full, merge_into, synthesize_tree, PacketTable};

pub use crate::tree::perfect_tree;

/// Prior and noise hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperParams {
    pub g: BranchProbabilities,
    /// Prior mean of every node's coefficient block; a tree's mean vector is
    /// the concatenation of its leaf blocks.
    pub mu: PacketTable,
    pub sigma2: f64,
    pub noise_sigma2: f64,
}

impl HyperParams {
    pub fn new(g: BranchProbabilities, mu: PacketTable, sigma2: f64, noise_sigma2: f64) -> Result<Self> {
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return Err(Error::domain(format!(
                "prior variance sigma2 must be positive and finite, got {sigma2}"
            )));
        }
        if !(noise_sigma2.is_finite() && noise_sigma2 >= 0.0) {
            return Err(Error::domain(format!(
                "noise variance must be non-negative and finite, got {noise_sigma2}"
            )));
        }
        if g.d_max() != mu.d_max() {
            return Err(Error::domain(format!(
                "branch probabilities have d_max = {} but mu has d_max = {}",
                g.d_max(),
                mu.d_max()
            )));
        }
        if (0..=mu.d_max()).any(|d| mu.level(d).iter().any(|v| !v.is_finite())) {
            return Err(Error::domain("mu contains non-finite values"));
        }
        Ok(HyperParams {
            g,
            mu,
            sigma2,
            noise_sigma2,
        })
    }

    /// Hyperparameters with an all-zero prior mean.
    pub fn zero_mean(g: BranchProbabilities, sigma2: f64, noise_sigma2: f64) -> Result<Self> {
        let mu = PacketTable::zeros(g.d_max());
        Self::new(g, mu, sigma2, noise_sigma2)
    }

    pub fn d_max(&self) -> u32 {
        self.g.d_max()
    }

    /// Weight on the observation, `sigma2 / (sigma2 + noise_sigma2)`.
    pub fn shrinkage(&self) -> f64 {
        self.sigma2 / (self.sigma2 + self.noise_sigma2)
    }

    /// Per-pixel variance of `x` given a tree and the observation.
    pub fn posterior_variance(&self) -> f64 {
        self.sigma2 * self.noise_sigma2 / (self.sigma2 + self.noise_sigma2)
    }

    fn check_signal(&self, y: &Signal2D) -> Result<()> {
        if y.d_max() != self.d_max() {
            return Err(Error::domain(format!(
                "signal is {}x{} but hyperparameters are for d_max = {}",
                y.side(),
                y.side(),
                self.d_max()
            )));
        }
        Ok(())
    }

    fn check_model(&self, m: &QuadTreeModel) -> Result<()> {
        if m.d_max() != self.d_max() {
            return Err(Error::domain(format!(
                "tree has d_max = {} but hyperparameters are for d_max = {}",
                m.d_max(),
                self.d_max()
            )));
        }
        Ok(())
    }
}

/// Draws leaf coefficients `theta_s ~ N(mu_s, sigma2 I)` for the leaves of `m`.
/// Blocks of non-leaf nodes stay zero.
pub fn sample_theta<R: Rng + ?Sized>(m: &QuadTreeModel, hp: &HyperParams, rng: &mut R) -> Result<PacketTable> {
    hp.check_model(m)?;
    let sd = hp.sigma2.sqrt();
    let mut theta = PacketTable::zeros(hp.d_max());
    for s in m.leaves_dfs() {
        let mean = hp.mu.block(s);
        for (t, &mu) in theta.block_mut(s).iter_mut().zip(mean) {
            let z: f64 = StandardNormal.sample(rng);
            *t = mu + sd * z;
        }
    }
    Ok(theta)
}

/// One draw of `x ~ p(x | m) = N((W^m)^T mu^m, sigma2 I)`.
pub fn sample_theta_and_signal<R: Rng + ?Sized>(m: &QuadTreeModel, hp: &HyperParams, rng: &mut R) -> Result<Signal2D> {
    let theta = sample_theta(m, hp, rng)?;
    synthesize_tree(m, &theta)
}

/// `y = x + eps`, `eps ~ N(0, noise_sigma2 I)`.
pub fn add_noise<R: Rng + ?Sized>(x: &Signal2D, noise_sigma2: f64, rng: &mut R) -> Result<Signal2D> {
    if !(noise_sigma2.is_finite() && noise_sigma2 >= 0.0) {
        return Err(Error::domain(format!(
            "noise variance must be non-negative and finite, got {noise_sigma2}"
        )));
    }
    if noise_sigma2 == 0.0 {
        return Ok(x.clone());
    }
    let sd = noise_sigma2.sqrt();
    let data = x
        .as_slice()
        .iter()
        .map(|&v| {
            let z: f64 = StandardNormal.sample(rng);
            v + sd * z
        })
        .collect();
    Ok(Signal2D::from_raw(x.side(), data))
}

/// `ln(1 + e^t)` without overflow.
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// Per-node posterior quantities for one observation.
#[derive(Debug, Clone)]
pub struct PosteriorState {
    d_max: u32,
    ln_psi: Vec<f64>,
    ln_psi_tilde: Vec<f64>,
    ln_g_tilde: Vec<f64>,
    ln_not_g_tilde: Vec<f64>,
    shrinkage: f64,
    posterior_variance: f64,
}

impl PosteriorState {
    pub fn d_max(&self) -> u32 {
        self.d_max
    }

    /// `ln psi_s = <W_s y - mu_s / 2, mu_s> / (sigma2 + noise_sigma2)`.
    pub fn ln_psi(&self, s: NodeId) -> f64 {
        self.ln_psi[s.flat_index()]
    }

    pub fn ln_psi_tilde(&self, s: NodeId) -> f64 {
        self.ln_psi_tilde[s.flat_index()]
    }

    /// Posterior branch probability `g~_s`.
    pub fn g_tilde(&self, s: NodeId) -> f64 {
        self.ln_g_tilde[s.flat_index()].exp()
    }

    pub fn ln_g_tilde(&self, s: NodeId) -> f64 {
        self.ln_g_tilde[s.flat_index()]
    }

    /// `ln(1 - g~_s)`, computed without cancellation.
    pub fn ln_one_minus_g_tilde(&self, s: NodeId) -> f64 {
        self.ln_not_g_tilde[s.flat_index()]
    }

    pub fn shrinkage(&self) -> f64 {
        self.shrinkage
    }

    pub fn posterior_variance(&self) -> f64 {
        self.posterior_variance
    }
}

/// Computes `ln psi_s` from the packet coefficients of `y`, then `psi~` and
/// `g~` bottom-up.
pub fn compute_posterior_state(y: &Signal2D, hp: &HyperParams) -> Result<PosteriorState> {
    hp.check_signal(y)?;
    let total_var = hp.sigma2 + hp.noise_sigma2;
    if total_var <= 0.0 {
        return Err(Error::domain("sigma2 + noise_sigma2 must be positive"));
    }
    let d_max = hp.d_max();
    let coeffs = analyze_full(y);
    let n = node_count(d_max);

    let mut ln_psi = vec![0.0; n];
    for s in all_nodes(d_max) {
        let (yb, mb) = (coeffs.block(s), hp.mu.block(s));
        let ip: f64 = yb.iter().zip(mb).map(|(a, m)| (a - 0.5 * m) * m).sum();
        ln_psi[s.flat_index()] = ip / total_var;
    }

    let mut ln_psi_tilde = vec![0.0; n];
    let mut ln_g_tilde = vec![f64::NEG_INFINITY; n];
    let mut ln_not_g_tilde = vec![0.0; n];
    // Deeper nodes have larger flat indices, so children are done first.
    for k in (0..n).rev() {
        let s = NodeId::from_flat_index(k);
        let g = hp.g.get(s);
        if s.depth == d_max || g == 0.0 {
            ln_psi_tilde[k] = ln_psi[k];
            continue;
        }
        let children: f64 = s.children().iter().map(|c| ln_psi_tilde[c.flat_index()]).sum();
        if g == 1.0 {
            ln_psi_tilde[k] = children;
            ln_g_tilde[k] = 0.0;
            ln_not_g_tilde[k] = f64::NEG_INFINITY;
            continue;
        }
        let expand = g.ln() + children;
        let stop = (-g).ln_1p() + ln_psi[k];
        let (hi, lo) = if expand > stop { (expand, stop) } else { (stop, expand) };
        ln_psi_tilde[k] = hi + (lo - hi).exp().ln_1p();
        ln_g_tilde[k] = -softplus(stop - expand);
        ln_not_g_tilde[k] = -softplus(expand - stop);
    }

    Ok(PosteriorState {
        d_max,
        ln_psi,
        ln_psi_tilde,
        ln_g_tilde,
        ln_not_g_tilde,
        shrinkage: hp.shrinkage(),
        posterior_variance: hp.posterior_variance(),
    })
}

pub fn ln_posterior_tree_probability(m: &QuadTreeModel, st: &PosteriorState) -> f64 {
    assert_eq!(m.d_max(), st.d_max, "tree and posterior disagree on d_max");
    let leaves: f64 = m.leaves().iter().map(|&s| st.ln_one_minus_g_tilde(s)).sum();
    let inner: f64 = m.inner().iter().map(|&s| st.ln_g_tilde(s)).sum();
    leaves + inner
}

/// `p(m | y)`: the prior's product form with `g~` in place of `g`.
pub fn posterior_tree_probability(m: &QuadTreeModel, st: &PosteriorState) -> f64 {
    ln_posterior_tree_probability(m, st).exp()
}

/// Posterior probability that `s` is a leaf of the tree:
/// `(1 - g~_s)` times `g~` over all ancestors of `s`.
pub fn leaf_marginal(s: NodeId, st: &PosteriorState) -> f64 {
    assert!(s.depth <= st.d_max, "node {s} is deeper than d_max");
    let ln = st.ln_one_minus_g_tilde(s) + s.ancestors().map(|a| st.ln_g_tilde(a)).sum::<f64>();
    ln.exp()
}

/// Posterior average of the tree-specific prior mean,
/// `sum_m p(m | y) (W^m)^T mu^m`, by the `r_s` recursion.
///
/// Each `r_s` lies in node `s`'s subspace, so it is stored as a coefficient
/// block in that node's basis and combined with one synthesis step per level.
pub fn posterior_prior_mean_mix(st: &PosteriorState, mu: &PacketTable) -> Result<Signal2D> {
    if st.d_max != mu.d_max() {
        return Err(Error::domain("posterior state and mu disagree on d_max"));
    }
    let d_max = st.d_max;
    let side = mu.side();
    let mut below = r_leaf_terms(st, mu, d_max);
    for depth in (0..d_max).rev() {
        let mut here = r_leaf_terms(st, mu, depth);
        let parent_len = (side >> depth).pow(2);
        let h = side >> (depth + 1);
        let child_len = h * h;
        let width = 1usize << depth;
        for (q, out) in here.chunks_exact_mut(parent_len).enumerate() {
            let s = NodeId {
                depth,
                j0: (q / width) as u32,
                j1: (q % width) as u32,
            };
            let g = st.g_tilde(s);
            if g == 0.0 {
                continue;
            }
            let ch = s.children().map(|c| {
                let start = c.index_in_depth() * child_len;
                &below[start..start + child_len]
            });
            merge_into(ch, h, g, out);
        }
        below = here;
    }
    Ok(Signal2D::from_raw(side, below))
}

/// `(1 - g~_s) mu_s` for every node at `depth`, as one level buffer.
fn r_leaf_terms(st: &PosteriorState, mu: &PacketTable, depth: u32) -> Vec<f64> {
    let mut out = mu.level(depth).to_vec();
    let len = mu.block_side(depth).pow(2);
    let width = 1u32 << depth;
    for (q, block) in out.chunks_exact_mut(len).enumerate() {
        let s = NodeId {
            depth,
            j0: q as u32 / width,
            j1: q as u32 % width,
        };
        let w = st.ln_one_minus_g_tilde(s).exp();
        if w != 1.0 {
            block.iter_mut().for_each(|v| *v *= w);
        }
    }
    out
}

fn blend(a: f64, y: &Signal2D, prior_part: &Signal2D) -> Signal2D {
    let data = y
        .as_slice()
        .iter()
        .zip(prior_part.as_slice())
        .map(|(&yv, &pv)| a * yv + (1.0 - a) * pv)
        .collect();
    Signal2D::from_raw(y.side(), data)
}

/// Bayes-optimal estimate of `x` from `y` under squared loss, averaging over
/// all trees in `O(L^2 d_max)`.
pub fn bayes_denoise(y: &Signal2D, hp: &HyperParams) -> Result<Signal2D> {
    let st = compute_posterior_state(y, hp)?;
    bayes_denoise_with_state(y, hp, &st)
}

/// [`bayes_denoise`] reusing an already computed posterior state for `y`.
pub fn bayes_denoise_with_state(y: &Signal2D, hp: &HyperParams, st: &PosteriorState) -> Result<Signal2D> {
    hp.check_signal(y)?;
    let a = hp.shrinkage();
    if a == 1.0 {
        return Ok(y.clone());
    }
    let mix = posterior_prior_mean_mix(st, &hp.mu)?;
    Ok(blend(a, y, &mix))
}

/// Mean of `p(x | m, y)`: `a y + (1 - a) (W^m)^T mu^m`.
pub fn posterior_mean_given_tree(y: &Signal2D, m: &QuadTreeModel, hp: &HyperParams) -> Result<Signal2D> {
    hp.check_signal(y)?;
    hp.check_model(m)?;
    let prior_mean = synthesize_tree(m, &hp.mu)?;
    Ok(blend(hp.shrinkage(), y, &prior_mean))
}

/// Denoiser that commits to a single tree `m`. It coincides with
/// [`posterior_mean_given_tree`].
pub fn fixed_tree_denoise(y: &Signal2D, m: &QuadTreeModel, hp: &HyperParams) -> Result<Signal2D> {
    posterior_mean_given_tree(y, m, hp)
}

/// `(W^m)^T mu^m`, the prior mean of the signal under tree `m`.
pub fn prior_signal_mean(m: &QuadTreeModel, hp: &HyperParams) -> Result<Signal2D> {
    hp.check_model(m)?;
    synthesize_tree(m, &hp.mu)
}
