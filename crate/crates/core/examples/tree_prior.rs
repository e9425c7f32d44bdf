//! The branching prior over quadtrees: enumeration, probabilities, sampling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wpbayes::tree::{average_depth, enumerate_models, prior_probability, sample_model};
use wpbayes::BranchProbabilities;

fn main() -> wpbayes::Result<()> {
    let g = BranchProbabilities::uniform(2, 0.5)?;
    let models = enumerate_models(2)?;
    let total: f64 = models.iter().map(|m| prior_probability(m, &g)).sum();
    println!("{} trees of depth at most 2, prior mass {total}", models.len());
    for m in models.iter().take(5) {
        println!("  {:<22} p = {:.5}", m.to_bitstring(), prior_probability(m, &g));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for gv in [0.1, 0.5, 0.9] {
        let g = BranchProbabilities::uniform(5, gv)?;
        let n = 2000;
        let depth: f64 = (0..n).map(|_| average_depth(&sample_model(&g, &mut rng))).sum::<f64>() / n as f64;
        println!("g = {gv}: mean leaf depth {depth:.3} over {n} draws at d_max 5");
    }
    Ok(())
}
