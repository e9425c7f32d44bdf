#![allow(dead_code)]

use rand::Rng;
use wpbayes::bayes::{add_noise, sample_theta_and_signal, HyperParams};
use wpbayes::tree::sample_model;
use wpbayes::{BranchProbabilities, PacketTable, Signal2D};

/// Random per-node hyperparameters, including exact 0/1 branch values now and then.
pub fn random_hyper(d_max: u32, rng: &mut impl Rng) -> HyperParams {
    let g = BranchProbabilities::from_fn(d_max, |_| match rng.gen_range(0..10) {
        0 => 0.0,
        1 => 1.0,
        _ => rng.gen::<f64>(),
    })
    .unwrap();
    let scale = rng.gen_range(0.5..8.0);
    let mut mu = PacketTable::zeros(d_max);
    for d in 0..=d_max {
        for s in wpbayes::node::all_nodes(d_max).filter(|s| s.depth == d) {
            let block: Vec<f64> = mu.block(s).iter().map(|_| rng.gen_range(-scale..scale)).collect();
            mu.set_block(s, &block).unwrap();
        }
    }
    let sigma2 = rng.gen_range(0.5..20.0);
    let noise = rng.gen_range(0.1..10.0);
    HyperParams::new(g, mu, sigma2, noise).unwrap()
}

/// An observation drawn from the model itself.
pub fn model_observation(hp: &HyperParams, rng: &mut impl Rng) -> Signal2D {
    let m = sample_model(&hp.g, rng);
    let x = sample_theta_and_signal(&m, hp, rng).unwrap();
    add_noise(&x, hp.noise_sigma2, rng).unwrap()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

pub fn rel_err_signal(a: &Signal2D, b: &Signal2D) -> f64 {
    let scale = b.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = a.max_abs_diff(b);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}
