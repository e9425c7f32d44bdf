//! The `wpbayes` command line.
//!
//! Exit codes: 0 on success, 2 on usage or configuration errors, 1 on
//! runtime failures.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bayes::{
    add_noise, bayes_denoise_with_state, compute_posterior_state, fixed_tree_denoise, leaf_marginal,
    posterior_tree_probability, sample_theta_and_signal, HyperParams,
};
use crate::error::{Error, Result};
use crate::experiments::{
    run_experiment1, run_experiment2, trial_rng, write_experiment1, write_experiment2, ExperimentConfig,
    MuSource,
};
use crate::io::{
    read_corpus, read_hyperparams, read_signal, write_mu_file, write_results_csv,
    write_signal, ResultTable, SignalFormat,
};
use crate::node::all_nodes;
use crate::signal::Signal2D;
use crate::tree::{enumerate_models, sample_model, BranchProbabilities, QuadTreeModel, ENUMERATION_MAX_DEPTH};
use crate::wavelet::{analyze_full, pack_leaf_blocks, synthesize_tree, unpack_leaf_blocks};

#[derive(Debug, Parser)]
#[command(name = "wpbayes", version, about = "Bayesian denoising over random Walsh wavelet-packet trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bayes-optimal (or fixed-tree) estimate of a clean signal from a noisy one.
    Denoise(DenoiseArgs),
    /// Draw a tree, a clean signal and a noisy observation from the model.
    Sample(SampleArgs),
    /// Posterior over trees (d_max <= 3) or per-node posterior quantities.
    Posterior(PosteriorArgs),
    /// Packet coefficients of a signal for one tree, or the inverse.
    Transform(TransformArgs),
    /// Estimate the prior mean from a directory of images.
    EstimateMu(EstimateMuArgs),
    /// Posterior recovery of a fixed true tree.
    Experiment1(ExperimentArgs),
    /// Estimated Bayes risk of the tree-averaging denoiser vs. perfect trees.
    Experiment2(ExperimentArgs),
}

/// Hyperparameters from a JSON file or from individual flags.
#[derive(Debug, Args)]
pub struct HyperArgs {
    /// Hyperparameter JSON file; overrides the individual flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 10.0)]
    pub sigma2: f64,
    #[arg(long = "noise-sigma2", default_value_t = 4.0)]
    pub noise_sigma2: f64,
    /// Branch probability for every node above the deepest level.
    #[arg(long, default_value_t = 0.5)]
    pub g: f64,
    /// Prior mean: `zeros`, `synthetic[:scale]`, `corpus:<dir>`, or a mu JSON file.
    #[arg(long, default_value = "zeros")]
    pub mu: String,
}

impl HyperArgs {
    fn resolve(&self, d_max: u32) -> Result<HyperParams> {
        if let Some(path) = &self.config {
            let hp = read_hyperparams(path)?;
            if hp.d_max() != d_max {
                return Err(Error::Config(format!(
                    "{} is for d_max = {} but the signal needs d_max = {d_max}",
                    path.display(),
                    hp.d_max()
                )));
            }
            return Ok(hp);
        }
        let mu = MuSource::parse(&self.mu)?.load(d_max)?;
        HyperParams::new(BranchProbabilities::uniform(d_max, self.g)?, mu, self.sigma2, self.noise_sigma2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Pgm,
    Csv,
}

impl From<FormatArg> for SignalFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Pgm => SignalFormat::Pgm,
            FormatArg::Csv => SignalFormat::Csv,
        }
    }
}

fn format_for(path: &Path, explicit: Option<FormatArg>) -> Result<SignalFormat> {
    explicit.map_or_else(|| SignalFormat::from_path(path), |f| Ok(f.into()))
}

fn load_signal(path: &Path, format: Option<FormatArg>) -> Result<Signal2D> {
    read_signal(path, format_for(path, format)?)
}

fn save_signal(path: &Path, signal: &Signal2D, format: Option<FormatArg>) -> Result<()> {
    write_signal(path, signal, format_for(path, format)?)
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Use a single fixed tree (preorder bit-string) instead of averaging.
    #[arg(long)]
    pub tree: Option<String>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[command(flatten)]
    pub hyper: HyperArgs,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub dmax: u32,
    #[arg(long)]
    pub seed: u64,
    /// Clean signal output.
    #[arg(long)]
    pub clean: PathBuf,
    /// Noisy observation output.
    #[arg(long)]
    pub noisy: PathBuf,
    /// Fix the tree instead of drawing it from the prior.
    #[arg(long)]
    pub tree: Option<String>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[command(flatten)]
    pub hyper: HyperArgs,
}

#[derive(Debug, Args)]
pub struct PosteriorArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// CSV output; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-node table (ln psi, g~, leaf marginal) instead of one row per tree.
    #[arg(long)]
    pub nodes: bool,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[command(flatten)]
    pub hyper: HyperArgs,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Tree whose leaf coefficients are produced; defaults to the complete tree.
    #[arg(long)]
    pub tree: Option<String>,
    /// Read packed coefficients and synthesize the signal.
    #[arg(long)]
    pub inverse: bool,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Args)]
pub struct EstimateMuArgs {
    /// Directory of `.pgm` / `.csv` images, all of side 2^dmax.
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub dmax: u32,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Experiment configuration JSON; flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
    #[arg(long)]
    pub dmax: Option<u32>,
    #[arg(long)]
    pub sigma2: Option<f64>,
    #[arg(long = "noise-sigma2")]
    pub noise_sigma2: Option<f64>,
    /// Comma-separated branch probabilities.
    #[arg(long, value_delimiter = ',')]
    pub g: Option<Vec<f64>>,
    #[arg(long)]
    pub mu: Option<String>,
    /// Comma-separated noise variances (experiment 2).
    #[arg(long = "noise-sweep", value_delimiter = ',')]
    pub noise_sweep: Option<Vec<f64>>,
    #[arg(long)]
    pub trees: Option<usize>,
    #[arg(long)]
    pub signals: Option<usize>,
    #[arg(long = "noise-draws")]
    pub noise_draws: Option<usize>,
    /// True tree for experiment 1 (preorder bit-string).
    #[arg(long = "true-tree")]
    pub true_tree: Option<String>,
}

impl ExperimentArgs {
    fn resolve(&self, defaults: fn(u64) -> ExperimentConfig) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                serde_json::from_str::<ExperimentConfig>(&text).map_err(|e| Error::Parse {
                    path: path.display().to_string(),
                    line: e.line(),
                    column: e.column(),
                    message: e.to_string(),
                })?
            }
            None => {
                let seed = self
                    .seed
                    .ok_or_else(|| Error::Config("--seed is required (or a --config file with a seed)".into()))?;
                defaults(seed)
            }
        };
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.dmax {
            cfg.d_max = v;
        }
        if let Some(v) = self.sigma2 {
            cfg.sigma2 = v;
        }
        if let Some(v) = self.noise_sigma2 {
            cfg.noise_sigma2 = v;
        }
        if let Some(v) = &self.g {
            cfg.g_values = v.clone();
        }
        if let Some(v) = &self.mu {
            cfg.mu = MuSource::parse(v)?;
        }
        if let Some(v) = &self.noise_sweep {
            cfg.noise_sweep = v.clone();
        }
        if let Some(v) = self.trees {
            cfg.trees = v;
        }
        if let Some(v) = self.signals {
            cfg.signals = v;
        }
        if let Some(v) = self.noise_draws {
            cfg.noise_draws = v;
        }
        if let Some(v) = &self.true_tree {
            cfg.true_model = Some(v.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit(table: &ResultTable, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => write_results_csv(table, path),
        None => {
            print!("{}", table.to_csv_string());
            Ok(())
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Denoise(a) => {
            let y = load_signal(&a.input, a.format)?;
            let hp = a.hyper.resolve(y.d_max())?;
            let out = match &a.tree {
                Some(bits) => fixed_tree_denoise(&y, &QuadTreeModel::from_bitstring(y.d_max(), bits)?, &hp)?,
                None => {
                    let st = compute_posterior_state(&y, &hp)?;
                    bayes_denoise_with_state(&y, &hp, &st)?
                }
            };
            save_signal(&a.output, &out, a.format)
        }
        Command::Sample(a) => {
            let hp = a.hyper.resolve(a.dmax)?;
            let mut rng = trial_rng(a.seed, 0);
            let m = match &a.tree {
                Some(bits) => QuadTreeModel::from_bitstring(a.dmax, bits)?,
                None => sample_model(&hp.g, &mut rng),
            };
            let x = sample_theta_and_signal(&m, &hp, &mut rng)?;
            let y = add_noise(&x, hp.noise_sigma2, &mut rng)?;
            save_signal(&a.clean, &x, a.format)?;
            save_signal(&a.noisy, &y, a.format)?;
            println!("{}", m.to_bitstring());
            Ok(())
        }
        Command::Posterior(a) => {
            let y = load_signal(&a.input, a.format)?;
            let hp = a.hyper.resolve(y.d_max())?;
            let st = compute_posterior_state(&y, &hp)?;
            let table = if a.nodes || y.d_max() > ENUMERATION_MAX_DEPTH {
                let mut t = ResultTable::new(&["node", "ln_psi", "ln_psi_tilde", "g_tilde", "leaf_marginal"]);
                for s in all_nodes(y.d_max()) {
                    t.push(vec![
                        s.key(),
                        st.ln_psi(s).to_string(),
                        st.ln_psi_tilde(s).to_string(),
                        st.g_tilde(s).to_string(),
                        leaf_marginal(s, &st).to_string(),
                    ]);
                }
                t
            } else {
                let mut t = ResultTable::new(&["model_index", "model", "posterior"]);
                for (k, m) in enumerate_models(y.d_max())?.iter().enumerate() {
                    t.push(vec![k.to_string(), m.to_bitstring(), posterior_tree_probability(m, &st).to_string()]);
                }
                t
            };
            emit(&table, a.out.as_deref())
        }
        Command::Transform(a) => {
            let input = load_signal(&a.input, a.format)?;
            let d_max = input.d_max();
            let m = match &a.tree {
                Some(bits) => QuadTreeModel::from_bitstring(d_max, bits)?,
                None => QuadTreeModel::perfect(d_max, d_max)?,
            };
            let out = if a.inverse {
                synthesize_tree(&m, &unpack_leaf_blocks(&m, &input)?)?
            } else {
                pack_leaf_blocks(&m, &analyze_full(&input))?
            };
            save_signal(&a.output, &out, a.format)
        }
        Command::EstimateMu(a) => {
            let corpus = read_corpus(&a.corpus)?;
            let mu = crate::io::estimate_mu(&corpus, a.dmax)?;
            write_mu_file(&a.output, &mu)?;
            println!("estimated mu from {} images", corpus.len());
            Ok(())
        }
        Command::Experiment1(a) => {
            let cfg = a.resolve(ExperimentConfig::experiment1)?;
            let result = run_experiment1(&cfg)?;
            let path = write_experiment1(&result, &a.out)?;
            println!(
                "true tree {} (index {}), argmax index {}, recovered: {}",
                result.models[result.true_index],
                result.true_index,
                result.argmax(),
                result.true_model_recovered()
            );
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Experiment2(a) => {
            let cfg = a.resolve(ExperimentConfig::experiment2)?;
            let result = run_experiment2(&cfg)?;
            let (risk, depth) = write_experiment2(&result, &a.out)?;
            for row in &result.rows {
                let parts: Vec<String> = row
                    .methods
                    .iter()
                    .map(|m| format!("{}={:.4}", m.method, m.risk.mean))
                    .collect();
                println!(
                    "noise={} g={} depth={:.3} {}",
                    row.noise_sigma2,
                    row.g,
                    row.avg_depth.mean,
                    parts.join(" ")
                );
            }
            println!("wrote {} and {}", risk.display(), depth.display());
            Ok(())
        }
    }
}

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => 2,
        _ => 1,
    }
}
