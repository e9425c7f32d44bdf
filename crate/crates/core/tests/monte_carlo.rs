//! Moment checks of the samplers and statistical properties of the denoiser.

mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wpbayes::bayes::{
    add_noise, bayes_denoise, compute_posterior_state, posterior_prior_mean_mix, sample_theta_and_signal,
    HyperParams,
};
use wpbayes::experiments::synthetic_mu;
use wpbayes::tree::{BranchProbabilities, QuadTreeModel};
use wpbayes::wavelet::synthesize_tree;
use wpbayes::{PacketTable, Signal2D};

#[test]
fn tiny_variance_draw_is_prior_mean() {
    let m = QuadTreeModel::from_bitstring(2, "100010000").unwrap();
    let hp = HyperParams::new(BranchProbabilities::uniform(2, 0.5).unwrap(), synthetic_mu(2, 20.0), 1e-12, 4.0).unwrap();
    let x = sample_theta_and_signal(&m, &hp, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let mean = synthesize_tree(&m, &hp.mu).unwrap();
    assert!(x.max_abs_diff(&mean) < 1e-5);
}

#[test]
fn signal_draws_have_prior_moments() {
    let m = QuadTreeModel::from_bitstring(2, "100010000").unwrap();
    let sigma2 = 10.0;
    let hp = HyperParams::new(BranchProbabilities::uniform(2, 0.5).unwrap(), synthetic_mu(2, 20.0), sigma2, 4.0).unwrap();
    let mean = synthesize_tree(&m, &hp.mu).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 10_000;
    let mut sum = [0.0; 16];
    let mut sum_sq = [0.0; 16];
    for _ in 0..n {
        let x = sample_theta_and_signal(&m, &hp, &mut rng).unwrap();
        for (k, &v) in x.as_slice().iter().enumerate() {
            sum[k] += v;
            sum_sq[k] += v * v;
        }
    }
    for k in 0..16 {
        let avg = sum[k] / n as f64;
        let var = sum_sq[k] / n as f64 - avg * avg;
        assert!((avg - mean.as_slice()[k]).abs() <= 4.0 * (sigma2 / n as f64).sqrt(), "pixel {k} mean {avg}");
        assert!((var / sigma2 - 1.0).abs() <= 0.1, "pixel {k} variance {var}");
    }
}

#[test]
fn noise_has_requested_moments() {
    let x = Signal2D::zeros(10);
    let noise = 2.5;
    let y = add_noise(&x, noise, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
    let n = y.as_slice().len() as f64;
    let mean = y.as_slice().iter().sum::<f64>() / n;
    let var = y.as_slice().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    assert!(mean.abs() < 5.0 * (noise / n).sqrt());
    assert!((var / noise - 1.0).abs() < 0.01);
}

#[test]
fn constant_shift_moves_estimate_by_shrunk_shift() {
    let hp = HyperParams::zero_mean(BranchProbabilities::uniform(3, 0.5).unwrap(), 10.0, 4.0).unwrap();
    let y = Signal2D::from_fn(3, |r, c| (r * 3 + c) as f64).unwrap();
    let c = 7.0;
    let shifted = &y + &Signal2D::constant(3, c);
    let diff = &bayes_denoise(&shifted, &hp).unwrap() - &bayes_denoise(&y, &hp).unwrap();
    assert!(diff.max_abs_diff(&Signal2D::constant(3, hp.shrinkage() * c)) < 1e-12);
}

#[test]
fn huge_noise_returns_prior_mean_mix() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mu = synthetic_mu(3, 20.0);
    let g = BranchProbabilities::uniform(3, 0.5).unwrap();
    let base = HyperParams::new(g.clone(), mu.clone(), 10.0, 4.0).unwrap();
    let y = common::model_observation(&base, &mut rng);
    let hp = HyperParams::new(g, mu, 10.0, 1e6).unwrap();
    let st = compute_posterior_state(&y, &hp).unwrap();
    let mix = posterior_prior_mean_mix(&st, &hp.mu).unwrap();
    let d = bayes_denoise(&y, &hp).unwrap();
    let scale = mix.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(d.max_abs_diff(&mix) <= 1e-3 * scale);
}

#[test]
fn no_overflow_at_large_scale() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    use rand::Rng;
    for g in [1e-6, 0.5, 1.0 - 1e-6] {
        let hp = HyperParams::new(
            BranchProbabilities::uniform(8, g).unwrap(),
            PacketTable::constant_blocks(8, |s| 1e4 * (if s.j0 % 2 == 0 { 1.0 } else { -1.0 })),
            10.0,
            4.0,
        )
        .unwrap();
        let y = Signal2D::from_fn(8, |_, _| rng.gen_range(-1e4..1e4)).unwrap();
        let d = bayes_denoise(&y, &hp).unwrap();
        assert!(d.as_slice().iter().all(|v| v.is_finite()));
    }
}
