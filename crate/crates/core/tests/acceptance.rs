//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::time::Instant;

use common::{model_observation, random_hyper, rel_err, rel_err_signal};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wpbayes::bayes::{
    add_noise, bayes_denoise, compute_posterior_state, leaf_marginal, posterior_tree_probability,
    sample_theta_and_signal, HyperParams,
};
use wpbayes::experiments::{run_experiment1, run_experiment2, spearman, ExperimentConfig};
use wpbayes::node::all_nodes;
use wpbayes::oracle::{brute_force_denoise, brute_force_posterior, dense_basis_matrix, leaf_marginal_by_enumeration};
use wpbayes::tree::{enumerate_models, prior_probability, sample_model, BranchProbabilities};
use wpbayes::wavelet::{analyze_full, synthesize_tree};
use wpbayes::Signal2D;

struct Outcome {
    pass: bool,
    detail: String,
}

type Check = fn() -> Outcome;

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let (mut denoise, mut posterior, mut marginal) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let hp = random_hyper(2, &mut rng);
        let y = model_observation(&hp, &mut rng);
        let st = compute_posterior_state(&y, &hp).unwrap();
        let exact = brute_force_posterior(&y, &hp).unwrap();
        for (m, p) in &exact {
            posterior = posterior.max(rel_err(posterior_tree_probability(m, &st), *p));
        }
        for s in all_nodes(2) {
            marginal = marginal.max((leaf_marginal(s, &st) - leaf_marginal_by_enumeration(s, &exact)).abs());
        }
        let fast = bayes_denoise(&y, &hp).unwrap();
        denoise = denoise.max(rel_err_signal(&fast, &brute_force_denoise(&y, &hp).unwrap()));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        denoise <= 1e-8 && posterior <= 1e-8 && marginal <= 1e-10 && secs < 10.0,
        format!("denoise rel {denoise:.2e}, posterior rel {posterior:.2e}, leaf marginal {marginal:.2e}, {secs:.2}s"),
    )
}

fn transform_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    let mut recon = 0.0f64;
    let mut ortho = 0.0f64;
    for m in enumerate_models(2).unwrap() {
        let x = Signal2D::from_fn(2, |_, _| rng.gen_range(-100.0..100.0)).unwrap();
        recon = recon.max(synthesize_tree(&m, &analyze_full(&x)).unwrap().max_abs_diff(&x));
        let w = dense_basis_matrix(&m).unwrap().rows;
        ortho = ortho.max((&w * w.transpose() - DMatrix::<f64>::identity(16, 16)).amax());
    }
    for _ in 0..50 {
        let g = BranchProbabilities::uniform(5, rng.gen()).unwrap();
        let m = sample_model(&g, &mut rng);
        let x = Signal2D::from_fn(5, |_, _| rng.gen_range(-100.0..100.0)).unwrap();
        recon = recon.max(synthesize_tree(&m, &analyze_full(&x)).unwrap().max_abs_diff(&x));
    }
    outcome(
        recon <= 1e-10 && ortho <= 1e-12,
        format!("reconstruction {recon:.2e}, orthonormality {ortho:.2e}"),
    )
}

fn normalization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    let models = enumerate_models(2).unwrap();
    let (mut prior_err, mut post_err) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let hp = random_hyper(2, &mut rng);
        let total: f64 = models.iter().map(|m| prior_probability(m, &hp.g)).sum();
        prior_err = prior_err.max((total - 1.0).abs());
        for _ in 0..20 {
            let y = Signal2D::from_fn(2, |_, _| rng.gen_range(-50.0..50.0)).unwrap();
            let st = compute_posterior_state(&y, &hp).unwrap();
            let total: f64 = models.iter().map(|m| posterior_tree_probability(m, &st)).sum();
            post_err = post_err.max((total - 1.0).abs());
        }
    }
    outcome(
        prior_err <= 1e-12 && post_err <= 1e-12,
        format!("prior {prior_err:.2e}, posterior {post_err:.2e}"),
    )
}

fn experiment1() -> Outcome {
    let start = Instant::now();
    let reps = 20;
    let hits = (0..reps)
        .filter(|&r| run_experiment1(&ExperimentConfig::experiment1(5000 + r)).unwrap().true_model_recovered())
        .count();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        hits as f64 >= 0.95 * reps as f64 && secs < 60.0,
        format!("true tree is argmax in {hits}/{reps} repetitions, {secs:.2}s"),
    )
}

fn experiment2() -> Outcome {
    let start = Instant::now();
    let result = run_experiment2(&ExperimentConfig::experiment2(2024)).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let mut pass = secs < 600.0;
    let mut notes = Vec::new();
    let mut min_clear_unpaired = usize::MAX;
    for row in &result.rows {
        let bayes = row.bayes().risk.mean;
        // differences use the paired standard error of the excess risk
        let clear = row
            .baselines()
            .iter()
            .filter(|b| bayes <= b.risk.mean - 2.0 * b.excess_over_bayes.se)
            .count();
        min_clear_unpaired = min_clear_unpaired.min(
            row.baselines()
                .iter()
                .filter(|b| bayes <= b.risk.mean - 2.0 * (b.risk.se.powi(2) + row.bayes().risk.se.powi(2)).sqrt())
                .count(),
        );
        let never_worse = row.baselines().iter().all(|b| bayes <= b.risk.mean + 2.0 * b.excess_over_bayes.se);
        if clear < 2 || !never_worse {
            pass = false;
            notes.push(format!("g={} clear={clear} never_worse={never_worse}", row.g));
        }
    }
    let g: Vec<f64> = result.rows.iter().map(|r| r.g).collect();
    let depth: Vec<f64> = result.rows.iter().map(|r| r.avg_depth.mean).collect();
    let rho = spearman(&g, &depth);
    pass &= rho >= 0.9;
    let depths = depth.iter().map(|d| format!("{d:.3}")).collect::<Vec<_>>().join(" ");
    outcome(
        pass,
        format!(
            "depth rank corr {rho:.3} [{depths}], fewest clearly beaten baselines with unpaired se {min_clear_unpaired}, {secs:.1}s {}",
            notes.join("; ")
        ),
    )
}

fn analytic_shrinkage() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1006);
    let hp = HyperParams::zero_mean(BranchProbabilities::uniform(2, 0.5).unwrap(), 10.0, 4.0).unwrap();
    let mut exact_err = 0.0f64;
    let mut sq = Vec::with_capacity(10_000);
    while sq.len() < 10_000 {
        let m = sample_model(&hp.g, &mut rng);
        let x = sample_theta_and_signal(&m, &hp, &mut rng).unwrap();
        let y = add_noise(&x, hp.noise_sigma2, &mut rng).unwrap();
        let d = bayes_denoise(&y, &hp).unwrap();
        exact_err = exact_err.max(d.max_abs_diff(&y.scaled(5.0 / 7.0)));
        sq.extend(d.as_slice().iter().zip(x.as_slice()).map(|(a, b)| (a - b).powi(2)));
    }
    let n = sq.len() as f64;
    let mean = sq.iter().sum::<f64>() / n;
    let se = (sq.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
    let target = 20.0 / 7.0;
    outcome(
        exact_err <= 1e-12 && (mean - target).abs() <= 3.0 * se,
        format!("max |d - 5/7 y| {exact_err:.2e}, mse {mean:.4} vs {target:.4} (se {se:.4})"),
    )
}

fn best_time(d_max: u32, reps: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(1007);
    let hp = random_hyper(d_max, &mut rng);
    let y = model_observation(&hp, &mut rng);
    (0..reps)
        .map(|_| {
            let t = Instant::now();
            std::hint::black_box(bayes_denoise(std::hint::black_box(&y), &hp).unwrap());
            t.elapsed().as_secs_f64()
        })
        .fold(f64::INFINITY, f64::min)
}

fn performance() -> Outcome {
    let large = best_time(8, 7);
    let small = best_time(7, 7);
    let ratio = large / small;
    outcome(
        large < 1.0 && (3.0..=6.0).contains(&ratio),
        format!("256x256 {:.1} ms, 128x128 {:.1} ms, ratio {ratio:.2}", large * 1e3, small * 1e3),
    )
}

fn robustness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1008);
    let mut bad = 0usize;
    for g in [1e-6, 0.5, 1.0 - 1e-6] {
        let mut hp = random_hyper(8, &mut rng);
        hp.g = BranchProbabilities::uniform(8, g).unwrap();
        for scale in [1.0, 1e2, 1e4] {
            let y = Signal2D::from_fn(8, |_, _| rng.gen_range(-scale..scale)).unwrap();
            let d = bayes_denoise(&y, &hp).unwrap();
            bad += d.as_slice().iter().filter(|v| !v.is_finite()).count();
        }
        let y = Signal2D::constant(8, 1e4);
        bad += bayes_denoise(&y, &hp).unwrap().as_slice().iter().filter(|v| !v.is_finite()).count();
    }
    outcome(bad == 0, format!("{bad} non-finite outputs"))
}

fn main() {
    let criteria: [(&str, Check); 8] = [
        ("1 oracle equivalence", oracle_equivalence),
        ("2 transform correctness", transform_correctness),
        ("3 normalization", normalization),
        ("4 experiment 1 true-tree recovery", experiment1),
        ("5 experiment 2 risk ordering and depth trend", experiment2),
        ("6 zero-mean shrinkage", analytic_shrinkage),
        ("7 performance", performance),
        ("8 numerical robustness", robustness),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
