//! Seeded Monte-Carlo harnesses: tree recovery through the posterior
//! (experiment 1) and estimated Bayes risk of the tree-averaging denoiser
//! against fixed perfect-tree denoisers (experiment 2).
//!
//! Randomness comes from ChaCha streams keyed by `(seed, trial index)`, and
//! all accumulation happens in trial order, so a configuration always
//! produces the same numbers.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bayes::{
    add_noise, bayes_denoise_with_state, compute_posterior_state, posterior_tree_probability,
    prior_signal_mean, sample_theta_and_signal, HyperParams,
};
use crate::error::{Error, Result};
use crate::io::{read_corpus, read_mu_file, write_results_csv, ResultTable};
use crate::node::check_depth;
use crate::signal::Signal2D;
use crate::tree::{average_depth, enumerate_models, perfect_tree, sample_model, BranchProbabilities, QuadTreeModel};
use crate::wavelet::PacketTable;

/// Scale of the default synthetic prior mean.
pub const DEFAULT_MU_SCALE: f64 = 20.0;

/// Canonical index (preorder bit-string order) of the default true tree in
/// experiment 1, `1010000010000`: the root with `(1,0,1)` and `(1,1,1)` expanded.
pub const DEFAULT_TRUE_MODEL_INDEX: usize = 6;

/// Where the prior mean comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuSource {
    Zeros,
    /// Constant blocks of value `scale * 2^-i` at depth `i`.
    Synthetic { scale: f64 },
    /// A prior-mean JSON file (see [`crate::io::MuFile`]).
    File(PathBuf),
    /// Estimated from every image in a directory.
    Corpus(PathBuf),
}

impl MuSource {
    /// Parses `zeros`, `synthetic`, `synthetic:<scale>`, `corpus:<dir>`, or a file path.
    pub fn parse(text: &str) -> Result<Self> {
        if text == "zeros" {
            Ok(MuSource::Zeros)
        } else if text == "synthetic" {
            Ok(MuSource::Synthetic {
                scale: DEFAULT_MU_SCALE,
            })
        } else if let Some(v) = text.strip_prefix("synthetic:") {
            let scale = v
                .parse::<f64>()
                .ok()
                .filter(|s| s.is_finite())
                .ok_or_else(|| Error::Config(format!("invalid synthetic scale {v:?}")))?;
            Ok(MuSource::Synthetic { scale })
        } else if let Some(dir) = text.strip_prefix("corpus:") {
            Ok(MuSource::Corpus(PathBuf::from(dir)))
        } else if text.is_empty() {
            Err(Error::Config("empty mu source".into()))
        } else {
            Ok(MuSource::File(PathBuf::from(text)))
        }
    }

    pub fn load(&self, d_max: u32) -> Result<PacketTable> {
        check_depth(d_max)?;
        let mu = match self {
            MuSource::Zeros => PacketTable::zeros(d_max),
            MuSource::Synthetic { scale } => synthetic_mu(d_max, *scale),
            MuSource::File(path) => read_mu_file(path)?,
            MuSource::Corpus(dir) => crate::io::estimate_mu(&read_corpus(dir)?, d_max)?,
        };
        if mu.d_max() != d_max {
            return Err(Error::Config(format!(
                "mu has d_max = {} but the experiment uses d_max = {d_max}",
                mu.d_max()
            )));
        }
        Ok(mu)
    }
}

/// Constant blocks whose value halves with every level, `scale * 2^-i`.
pub fn synthetic_mu(d_max: u32, scale: f64) -> PacketTable {
    PacketTable::constant_blocks(d_max, |s| scale * 0.5f64.powi(s.depth as i32))
}

/// Independent RNG stream for one trial.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Settings shared by both experiments. Repetition counts name the nested
/// loops: `trees` (outer, experiment 2 only), `signals` per tree, and
/// `noise_draws` per signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub d_max: u32,
    pub sigma2: f64,
    pub noise_sigma2: f64,
    /// Branch probability values (experiment 1 uses the first).
    pub g_values: Vec<f64>,
    pub trees: usize,
    pub signals: usize,
    pub noise_draws: usize,
    pub seed: u64,
    pub mu: MuSource,
    /// Extra noise variances for experiment 2; empty means `[noise_sigma2]`.
    #[serde(default)]
    pub noise_sweep: Vec<f64>,
    /// True tree for experiment 1 as a preorder bit-string.
    #[serde(default)]
    pub true_model: Option<String>,
}

impl ExperimentConfig {
    /// Experiment 1 defaults: `d_max = 2`, `g = 0.5`, `sigma2 = 10`,
    /// `noise_sigma2 = 4`, 50 signals x 50 noise draws.
    pub fn experiment1(seed: u64) -> Self {
        ExperimentConfig {
            d_max: 2,
            sigma2: 10.0,
            noise_sigma2: 4.0,
            g_values: vec![0.5],
            trees: 1,
            signals: 50,
            noise_draws: 50,
            seed,
            mu: MuSource::Synthetic {
                scale: DEFAULT_MU_SCALE,
            },
            noise_sweep: Vec::new(),
            true_model: None,
        }
    }

    /// Experiment 2 defaults: `d_max = 5`, `g` from 0.1 to 0.9, 30 trees x
    /// 10 signals x 10 noise draws.
    pub fn experiment2(seed: u64) -> Self {
        ExperimentConfig {
            d_max: 5,
            sigma2: 10.0,
            noise_sigma2: 4.0,
            g_values: (1..=9).map(|k| k as f64 / 10.0).collect(),
            trees: 30,
            signals: 10,
            noise_draws: 10,
            seed,
            mu: MuSource::Synthetic {
                scale: DEFAULT_MU_SCALE,
            },
            noise_sweep: Vec::new(),
            true_model: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_depth(self.d_max).map_err(|e| Error::Config(e.to_string()))?;
        if self.trees == 0 || self.signals == 0 || self.noise_draws == 0 {
            return Err(Error::Config("repetition counts must be at least 1".into()));
        }
        if self.g_values.is_empty() {
            return Err(Error::Config("at least one g value is required".into()));
        }
        if let Some(g) = self.g_values.iter().find(|g| !(0.0..=1.0).contains(*g)) {
            return Err(Error::Config(format!("g = {g} is outside [0, 1]")));
        }
        if !(self.sigma2.is_finite() && self.sigma2 > 0.0) {
            return Err(Error::Config(format!("sigma2 must be positive, got {}", self.sigma2)));
        }
        for v in std::iter::once(&self.noise_sigma2).chain(&self.noise_sweep) {
            if !(v.is_finite() && *v >= 0.0) {
                return Err(Error::Config(format!("noise variance must be non-negative, got {v}")));
            }
        }
        Ok(())
    }

    fn noise_levels(&self) -> Vec<f64> {
        if self.noise_sweep.is_empty() {
            vec![self.noise_sigma2]
        } else {
            self.noise_sweep.clone()
        }
    }
}

/// How a candidate tree relates to the true tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    True,
    /// One leaf of the true tree expanded.
    Expanded,
    /// One lowest inner node of the true tree collapsed.
    Contracted,
    Other,
}

impl Relation {
    pub fn of(candidate: &QuadTreeModel, truth: &QuadTreeModel) -> Relation {
        if candidate == truth {
            return Relation::True;
        }
        let (ci, ti) = (candidate.inner(), truth.inner());
        if ci.len() == ti.len() + 1 && ti.is_subset(ci) {
            Relation::Expanded
        } else if ti.len() == ci.len() + 1 && ci.is_subset(ti) {
            Relation::Contracted
        } else {
            Relation::Other
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Relation::True => "true",
            Relation::Expanded => "expanded",
            Relation::Contracted => "contracted",
            Relation::Other => "other",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Experiment1Result {
    pub models: Vec<QuadTreeModel>,
    pub true_index: usize,
    /// `p(m | y)` averaged over every simulated observation, per model.
    pub avg_posterior: Vec<f64>,
}

impl Experiment1Result {
    pub fn argmax(&self) -> usize {
        self.avg_posterior
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (k, &p)| if p > best.1 { (k, p) } else { best })
            .0
    }

    /// Model indices sorted by decreasing average posterior (ties by index).
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.models.len()).collect();
        idx.sort_by(|&a, &b| self.avg_posterior[b].total_cmp(&self.avg_posterior[a]).then(a.cmp(&b)));
        idx
    }

    pub fn true_model_recovered(&self) -> bool {
        self.argmax() == self.true_index
    }

    pub fn to_table(&self) -> ResultTable {
        let truth = &self.models[self.true_index];
        let ranking = self.ranking();
        let mut rank = vec![0; self.models.len()];
        for (r, &k) in ranking.iter().enumerate() {
            rank[k] = r + 1;
        }
        let argmax = self.argmax();
        let mut t = ResultTable::new(&["model_index", "model", "relation", "avg_posterior", "rank", "is_argmax"]);
        for (k, m) in self.models.iter().enumerate() {
            t.push(vec![
                k.to_string(),
                m.to_bitstring(),
                Relation::of(m, truth).as_str().to_string(),
                self.avg_posterior[k].to_string(),
                rank[k].to_string(),
                (k == argmax).to_string(),
            ]);
        }
        t
    }
}

fn hyperparams(cfg: &ExperimentConfig, g: f64, noise_sigma2: f64, mu: &PacketTable) -> Result<HyperParams> {
    HyperParams::new(BranchProbabilities::uniform(cfg.d_max, g)?, mu.clone(), cfg.sigma2, noise_sigma2)
}

/// Fixes a true tree, draws `signals` signals from it and `noise_draws`
/// noisy observations of each, and averages `p(m | y)` over all observations
/// for every enumerated tree.
pub fn run_experiment1(cfg: &ExperimentConfig) -> Result<Experiment1Result> {
    cfg.validate()?;
    let mu = cfg.mu.load(cfg.d_max)?;
    run_experiment1_with_mu(cfg, &mu)
}

pub fn run_experiment1_with_mu(cfg: &ExperimentConfig, mu: &PacketTable) -> Result<Experiment1Result> {
    cfg.validate()?;
    let models = enumerate_models(cfg.d_max).map_err(|e| Error::Config(e.to_string()))?;
    let true_index = match &cfg.true_model {
        Some(bits) => {
            let m = QuadTreeModel::from_bitstring(cfg.d_max, bits)?;
            models.iter().position(|c| *c == m).expect("enumeration covers every tree")
        }
        None => DEFAULT_TRUE_MODEL_INDEX.min(models.len() - 1),
    };
    let truth = &models[true_index];
    let hp = hyperparams(cfg, cfg.g_values[0], cfg.noise_sigma2, mu)?;

    let mut sums = vec![0.0; models.len()];
    for signal in 0..cfg.signals {
        let mut rng = trial_rng(cfg.seed, signal as u64);
        let x = sample_theta_and_signal(truth, &hp, &mut rng)?;
        for _ in 0..cfg.noise_draws {
            let y = add_noise(&x, hp.noise_sigma2, &mut rng)?;
            let st = compute_posterior_state(&y, &hp)?;
            for (acc, m) in sums.iter_mut().zip(&models) {
                *acc += posterior_tree_probability(m, &st);
            }
        }
    }
    let n = (cfg.signals * cfg.noise_draws) as f64;
    Ok(Experiment1Result {
        models,
        true_index,
        avg_posterior: sums.into_iter().map(|s| s / n).collect(),
    })
}

/// Mean and standard error of a risk estimate. The error treats each
/// sampled tree as one independent cluster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    fn from_clusters(values: &[f64]) -> Estimate {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let se = if values.len() > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            f64::NAN
        };
        Estimate { mean, se }
    }
}

#[derive(Debug, Clone)]
pub struct MethodRisk {
    /// `"bayes"` or `"perfect<i>"`.
    pub method: String,
    pub risk: Estimate,
    /// This method's risk minus the Bayes denoiser's, paired per observation.
    pub excess_over_bayes: Estimate,
}

#[derive(Debug, Clone)]
pub struct RiskRow {
    pub noise_sigma2: f64,
    pub g: f64,
    pub methods: Vec<MethodRisk>,
    pub avg_depth: Estimate,
}

impl RiskRow {
    pub fn bayes(&self) -> &MethodRisk {
        &self.methods[0]
    }

    pub fn baselines(&self) -> &[MethodRisk] {
        &self.methods[1..]
    }
}

#[derive(Debug, Clone)]
pub struct Experiment2Result {
    pub rows: Vec<RiskRow>,
}

impl Experiment2Result {
    pub fn risk_table(&self) -> ResultTable {
        let mut t = ResultTable::new(&["noise_sigma2", "g", "method", "bayes_risk", "se", "excess_over_bayes", "se_excess"]);
        for row in &self.rows {
            for m in &row.methods {
                t.push(vec![
                    row.noise_sigma2.to_string(),
                    row.g.to_string(),
                    m.method.clone(),
                    m.risk.mean.to_string(),
                    m.risk.se.to_string(),
                    m.excess_over_bayes.mean.to_string(),
                    m.excess_over_bayes.se.to_string(),
                ]);
            }
        }
        t
    }

    pub fn depth_table(&self) -> ResultTable {
        let mut t = ResultTable::new(&["noise_sigma2", "g", "avg_depth", "se"]);
        for row in &self.rows {
            t.push(vec![
                row.noise_sigma2.to_string(),
                row.g.to_string(),
                row.avg_depth.mean.to_string(),
                row.avg_depth.se.to_string(),
            ]);
        }
        t
    }
}

/// For each noise level and `g`: samples `trees` trees from the prior, draws
/// `signals` signals per tree and `noise_draws` observations per signal, and
/// records the per-pixel squared error of the Bayes denoiser and of the
/// fixed perfect-tree denoisers of depth `1..=d_max`.
pub fn run_experiment2(cfg: &ExperimentConfig) -> Result<Experiment2Result> {
    cfg.validate()?;
    let mu = cfg.mu.load(cfg.d_max)?;
    run_experiment2_with_mu(cfg, &mu)
}

pub fn run_experiment2_with_mu(cfg: &ExperimentConfig, mu: &PacketTable) -> Result<Experiment2Result> {
    cfg.validate()?;
    let baselines: Vec<QuadTreeModel> = (1..=cfg.d_max).map(|i| perfect_tree(cfg.d_max, i)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (ni, &noise) in cfg.noise_levels().iter().enumerate() {
        for (gi, &g) in cfg.g_values.iter().enumerate() {
            let hp = hyperparams(cfg, g, noise, mu)?;
            let a = hp.shrinkage();
            let baseline_means: Vec<Signal2D> =
                baselines.iter().map(|m| prior_signal_mean(m, &hp)).collect::<Result<_>>()?;
            let n_methods = baselines.len() + 1;
            let mut risk_clusters = vec![Vec::with_capacity(cfg.trees); n_methods];
            let mut excess_clusters = vec![Vec::with_capacity(cfg.trees); n_methods];
            let mut depths = Vec::with_capacity(cfg.trees);

            for tree in 0..cfg.trees {
                let stream = ((ni * cfg.g_values.len() + gi) * cfg.trees + tree) as u64;
                let mut rng = trial_rng(cfg.seed, stream);
                let m = sample_model(&hp.g, &mut rng);
                depths.push(average_depth(&m));
                let mut loss = vec![0.0; n_methods];
                let mut excess = vec![0.0; n_methods];
                for _ in 0..cfg.signals {
                    let x = sample_theta_and_signal(&m, &hp, &mut rng)?;
                    for _ in 0..cfg.noise_draws {
                        let y = add_noise(&x, noise, &mut rng)?;
                        let st = compute_posterior_state(&y, &hp)?;
                        let bayes = bayes_denoise_with_state(&y, &hp, &st)?.mse(&x);
                        loss[0] += bayes;
                        for (k, prior_mean) in baseline_means.iter().enumerate() {
                            let l = fixed_loss(a, &y, prior_mean, &x);
                            loss[k + 1] += l;
                            excess[k + 1] += l - bayes;
                        }
                    }
                }
                let per_tree = (cfg.signals * cfg.noise_draws) as f64;
                for k in 0..n_methods {
                    risk_clusters[k].push(loss[k] / per_tree);
                    excess_clusters[k].push(excess[k] / per_tree);
                }
            }

            let methods = (0..n_methods)
                .map(|k| MethodRisk {
                    method: if k == 0 { "bayes".into() } else { format!("perfect{k}") },
                    risk: Estimate::from_clusters(&risk_clusters[k]),
                    excess_over_bayes: Estimate::from_clusters(&excess_clusters[k]),
                })
                .collect();
            rows.push(RiskRow {
                noise_sigma2: noise,
                g,
                methods,
                avg_depth: Estimate::from_clusters(&depths),
            });
        }
    }
    Ok(Experiment2Result { rows })
}

/// Per-pixel squared error of `a y + (1 - a) prior_mean` against `x`.
fn fixed_loss(a: f64, y: &Signal2D, prior_mean: &Signal2D, x: &Signal2D) -> f64 {
    let n = x.as_slice().len() as f64;
    y.as_slice()
        .iter()
        .zip(prior_mean.as_slice())
        .zip(x.as_slice())
        .map(|((&yv, &pv), &xv)| {
            let e = a * yv + (1.0 - a) * pv - xv;
            e * e
        })
        .sum::<f64>()
        / n
}

pub fn write_experiment1(result: &Experiment1Result, out_dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let path = out_dir.join("experiment1_posterior.csv");
    write_results_csv(&result.to_table(), &path)?;
    Ok(path)
}

pub fn write_experiment2(result: &Experiment2Result, out_dir: &Path) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let risk = out_dir.join("experiment2_risk.csv");
    let depth = out_dir.join("experiment2_depth.csv");
    write_results_csv(&result.risk_table(), &risk)?;
    write_results_csv(&result.depth_table(), &depth)?;
    Ok((risk, depth))
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(xs), ranks(ys));
    let n = xs.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}
