//! Average posterior of every depth-2 tree when data come from a fixed tree.

use wpbayes::experiments::{run_experiment1, ExperimentConfig, Relation};

fn main() -> wpbayes::Result<()> {
    let seed = std::env::args().nth(1).map_or(1, |s| s.parse().expect("seed must be an integer"));
    let result = run_experiment1(&ExperimentConfig::experiment1(seed))?;
    let truth = &result.models[result.true_index];
    for k in result.ranking().into_iter().take(6) {
        let m = &result.models[k];
        println!("{:<14} {:.4} {}", m.to_bitstring(), result.avg_posterior[k], Relation::of(m, truth).as_str());
    }
    println!("true tree recovered: {}", result.true_model_recovered());
    Ok(())
}
