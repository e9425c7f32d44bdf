//! Posterior over trees for one noisy observation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wpbayes::bayes::{add_noise, compute_posterior_state, leaf_marginal, posterior_tree_probability, sample_theta_and_signal, HyperParams};
use wpbayes::experiments::synthetic_mu;
use wpbayes::node::all_nodes;
use wpbayes::tree::{enumerate_models, QuadTreeModel};
use wpbayes::BranchProbabilities;

fn main() -> wpbayes::Result<()> {
    let hp = HyperParams::new(BranchProbabilities::uniform(2, 0.5)?, synthetic_mu(2, 20.0), 10.0, 4.0)?;
    let truth = QuadTreeModel::from_bitstring(2, "1010000010000")?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = sample_theta_and_signal(&truth, &hp, &mut rng)?;
    let y = add_noise(&x, hp.noise_sigma2, &mut rng)?;

    let st = compute_posterior_state(&y, &hp)?;
    let mut ranked: Vec<_> = enumerate_models(2)?
        .into_iter()
        .map(|m| (posterior_tree_probability(&m, &st), m))
        .collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0));
    println!("true tree {}", truth.to_bitstring());
    for (p, m) in ranked.iter().take(4) {
        println!("  {:<14} {p:.4}", m.to_bitstring());
    }

    println!("node        g~      leaf marginal");
    for s in all_nodes(2).take(5) {
        println!("  {s:<9} {:.4}  {:.4}", st.g_tilde(s), leaf_marginal(s, &st));
    }
    Ok(())
}
