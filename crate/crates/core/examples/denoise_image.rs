//! Denoise a PGM image with the tree-averaging estimator and compare with
//! fixed perfect trees. Pass a P2 file as the first argument, or a synthetic
//! 64x64 scene is used.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wpbayes::bayes::{add_noise, bayes_denoise, fixed_tree_denoise, HyperParams};
use wpbayes::io::{estimate_mu, read_signal, SignalFormat};
use wpbayes::tree::perfect_tree;
use wpbayes::{BranchProbabilities, Signal2D};

fn main() -> wpbayes::Result<()> {
    let x = match std::env::args().nth(1) {
        Some(path) => read_signal(path.as_ref(), SignalFormat::Pgm)?,
        None => Signal2D::from_fn(6, |r, c| {
            let (r, c) = (r as f64, c as f64);
            if (r - 32.0).hypot(c - 24.0) < 14.0 { 200.0 } else { 40.0 + c }
        })?,
    };
    let d_max = x.d_max();
    let noise = 400.0;
    let y = add_noise(&x, noise, &mut ChaCha8Rng::seed_from_u64(11))?;

    // prior mean from the observation's own block averages
    let mu = estimate_mu(std::slice::from_ref(&y), d_max)?;
    let hp = HyperParams::new(BranchProbabilities::uniform(d_max, 0.5)?, mu, 300.0, noise)?;
    println!("noisy mse {:.1}", y.mse(&x));
    println!("bayes mse {:.1}", bayes_denoise(&y, &hp)?.mse(&x));
    for depth in 1..=d_max.min(4) {
        let d = fixed_tree_denoise(&y, &perfect_tree(d_max, depth)?, &hp)?;
        println!("perfect tree depth {depth} mse {:.1}", d.mse(&x));
    }
    Ok(())
}
