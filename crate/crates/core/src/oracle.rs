//! Brute-force references for small trees: dense basis matrices, exact
//! Gaussian evidence per tree, and the Bayes estimator as an explicit sum
//! over every tree. Nothing here shares code with the fast paths except the
//! packet definition itself (`basis_vector`) and tree enumeration.

use nalgebra::{DMatrix, DVector};

use crate::bayes::HyperParams;
use crate::error::{Error, Result};
use crate::node::NodeId;
use crate::signal::Signal2D;
use crate::tree::{enumerate_models, ln_prior_probability, QuadTreeModel};
use crate::wavelet::basis_vector;

/// Largest `d_max` for dense matrices (L = 16, a 256x256 matrix).
pub const DENSE_MAX_DEPTH: u32 = 4;

/// Largest `d_max` for the exhaustive sums. `d_max = 2` has 17 trees and is
/// the everyday setting; `d_max = 3` (83522 trees) is slow but allowed.
pub const ORACLE_MAX_DEPTH: u32 = 3;

/// `W^m`: one row per packet of each leaf of `m`, leaves in depth-first
/// order, shifts in raster order within a leaf. Columns index pixels in
/// raster order.
#[derive(Debug, Clone)]
pub struct DenseBasisMatrix {
    pub rows: DMatrix<f64>,
}

pub fn dense_basis_matrix(m: &QuadTreeModel) -> Result<DenseBasisMatrix> {
    let d_max = m.d_max();
    if d_max > DENSE_MAX_DEPTH {
        return Err(Error::domain(format!(
            "dense basis matrix refused for d_max = {d_max} (limit {DENSE_MAX_DEPTH})"
        )));
    }
    let side = 1usize << d_max;
    let n = side * side;
    let mut rows = DMatrix::zeros(n, n);
    let mut r = 0;
    for s in m.leaves_dfs() {
        let shifts = side >> s.depth;
        for k0 in 0..shifts {
            for k1 in 0..shifts {
                let b = basis_vector(d_max, s, k0, k1)?;
                for (c, &v) in b.as_slice().iter().enumerate() {
                    rows[(r, c)] = v;
                }
                r += 1;
            }
        }
    }
    debug_assert_eq!(r, n);
    Ok(DenseBasisMatrix { rows })
}

/// `mu^m` laid out in the same row order as [`dense_basis_matrix`].
pub fn dense_mu(m: &QuadTreeModel, hp: &HyperParams) -> DVector<f64> {
    let values: Vec<f64> = m
        .leaves_dfs()
        .into_iter()
        .flat_map(|s| hp.mu.block(s).to_vec())
        .collect();
    DVector::from_vec(values)
}

/// `(W^m)^T mu^m` from the dense matrix.
pub fn dense_prior_mean(m: &QuadTreeModel, hp: &HyperParams) -> Result<DVector<f64>> {
    let w = dense_basis_matrix(m)?;
    Ok(w.rows.transpose() * dense_mu(m, hp))
}

fn check_oracle_depth(d_max: u32) -> Result<()> {
    if d_max > ORACLE_MAX_DEPTH {
        Err(Error::domain(format!(
            "brute-force oracle refused for d_max = {d_max} (limit {ORACLE_MAX_DEPTH})"
        )))
    } else {
        Ok(())
    }
}

fn check_shapes(y: &Signal2D, hp: &HyperParams) -> Result<()> {
    check_oracle_depth(hp.d_max())?;
    if y.d_max() != hp.d_max() {
        return Err(Error::domain("signal size does not match hyperparameters"));
    }
    Ok(())
}

/// `ln N(y | (W^m)^T mu^m, (sigma2 + noise_sigma2) I)`.
pub fn brute_force_evidence(y: &Signal2D, m: &QuadTreeModel, hp: &HyperParams) -> Result<f64> {
    check_shapes(y, hp)?;
    let mean = dense_prior_mean(m, hp)?;
    Ok(gaussian_log_density(y, &mean, hp.sigma2 + hp.noise_sigma2))
}

fn gaussian_log_density(y: &Signal2D, mean: &DVector<f64>, var: f64) -> f64 {
    let n = y.as_slice().len() as f64;
    let sq: f64 = y
        .as_slice()
        .iter()
        .zip(mean.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    -0.5 * n * (2.0 * std::f64::consts::PI * var).ln() - sq / (2.0 * var)
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Every tree with its normalized `p(y | m) p(m)`.
pub fn brute_force_posterior(y: &Signal2D, hp: &HyperParams) -> Result<Vec<(QuadTreeModel, f64)>> {
    check_shapes(y, hp)?;
    let models = enumerate_models(hp.d_max())?;
    let mut log_w = Vec::with_capacity(models.len());
    for m in &models {
        let lp = ln_prior_probability(m, &hp.g);
        log_w.push(if lp == f64::NEG_INFINITY {
            lp
        } else {
            brute_force_evidence(y, m, hp)? + lp
        });
    }
    let z = log_sum_exp(&log_w);
    Ok(models
        .into_iter()
        .zip(log_w)
        .map(|(m, w)| (m, (w - z).exp()))
        .collect())
}

/// Total posterior mass of the trees having `s` as a leaf.
pub fn leaf_marginal_by_enumeration(s: NodeId, posterior: &[(QuadTreeModel, f64)]) -> f64 {
    posterior
        .iter()
        .filter(|(m, _)| m.is_leaf(s))
        .map(|(_, p)| p)
        .sum()
}

/// Posterior probability that `s` expands given that it is in the tree,
/// `P(s inner) / P(s present)`. `None` when `s` has no posterior mass.
pub fn branch_probability_by_enumeration(s: NodeId, posterior: &[(QuadTreeModel, f64)]) -> Option<f64> {
    let present: f64 = posterior.iter().filter(|(m, _)| m.contains(s)).map(|(_, p)| p).sum();
    let inner: f64 = posterior.iter().filter(|(m, _)| m.is_inner(s)).map(|(_, p)| p).sum();
    (present > 0.0).then(|| inner / present)
}

/// `sum_m p(m | y) E[x | m, y]` evaluated tree by tree.
pub fn brute_force_denoise(y: &Signal2D, hp: &HyperParams) -> Result<Signal2D> {
    let posterior = brute_force_posterior(y, hp)?;
    let a = hp.shrinkage();
    let n = y.as_slice().len();
    let mut acc = vec![0.0; n];
    for (m, p) in &posterior {
        if *p == 0.0 {
            continue;
        }
        let mean = dense_prior_mean(m, hp)?;
        for (k, v) in acc.iter_mut().enumerate() {
            *v += p * (a * y.as_slice()[k] + (1.0 - a) * mean[k]);
        }
    }
    Signal2D::new(y.side(), acc)
}
