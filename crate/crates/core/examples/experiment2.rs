//! Estimated Bayes risk of the tree-averaging denoiser against perfect
//! trees, over a sweep of branch probabilities. A reduced run by default;
//! pass `full` for 30 trees x 10 signals x 10 noise draws.

use wpbayes::experiments::{run_experiment2, ExperimentConfig};

fn main() -> wpbayes::Result<()> {
    let mut cfg = ExperimentConfig::experiment2(2);
    if std::env::args().nth(1).as_deref() != Some("full") {
        cfg.trees = 8;
        cfg.signals = 3;
        cfg.noise_draws = 3;
    }
    let result = run_experiment2(&cfg)?;
    print!("{:>4} {:>7}", "g", "depth");
    for m in &result.rows[0].methods {
        print!(" {:>9}", m.method);
    }
    println!();
    for row in &result.rows {
        print!("{:>4} {:>7.3}", row.g, row.avg_depth.mean);
        for m in &row.methods {
            print!(" {:>9.3}", m.risk.mean);
        }
        println!();
    }
    Ok(())
}
