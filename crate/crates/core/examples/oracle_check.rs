//! The fast recursions against exhaustive enumeration on a 4x4 image.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wpbayes::bayes::{bayes_denoise, compute_posterior_state, posterior_tree_probability, HyperParams};
use wpbayes::experiments::synthetic_mu;
use wpbayes::oracle::{brute_force_denoise, brute_force_posterior};
use wpbayes::{BranchProbabilities, Signal2D};

fn main() -> wpbayes::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let hp = HyperParams::new(BranchProbabilities::uniform(2, 0.3)?, synthetic_mu(2, 8.0), 6.0, 2.0)?;
    let y = Signal2D::from_fn(2, |_, _| rng.gen_range(-10.0..10.0))?;

    let st = compute_posterior_state(&y, &hp)?;
    let worst = brute_force_posterior(&y, &hp)?
        .iter()
        .map(|(m, p)| (posterior_tree_probability(m, &st) - p).abs())
        .fold(0.0, f64::max);
    println!("max posterior difference over 17 trees {worst:.2e}");

    let diff = bayes_denoise(&y, &hp)?.max_abs_diff(&brute_force_denoise(&y, &hp)?);
    println!("max estimate difference {diff:.2e}");
    Ok(())
}
