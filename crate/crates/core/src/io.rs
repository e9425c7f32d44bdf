//! Signal files (plain PGM and numeric CSV), the hyperparameter JSON file,
//! result tables, and corpus-based estimation of the prior mean.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bayes::HyperParams;
use crate::error::{Error, Result};
use crate::node::{all_nodes, check_depth, NodeId};
use crate::signal::{side_depth, Signal2D};
use crate::tree::{BranchProbabilities, QuadTreeModel};
use crate::wavelet::{analyze_full, PacketTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalFormat {
    /// Plain (ASCII, `P2`) PGM. Gray levels are used verbatim as reals.
    Pgm,
    /// Comma-separated grid, one image row per line.
    Csv,
}

impl SignalFormat {
    /// Guesses the format from the file extension.
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("pgm") => Ok(SignalFormat::Pgm),
            Some("csv") => Ok(SignalFormat::Csv),
            _ => Err(Error::Config(format!(
                "cannot tell the signal format of {} (expected .pgm or .csv)",
                path.display()
            ))),
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_signal(path: &Path, format: SignalFormat) -> Result<Signal2D> {
    let text = read_text(path)?;
    let label = path.display().to_string();
    match format {
        SignalFormat::Pgm => parse_pgm(&text, &label),
        SignalFormat::Csv => parse_csv_grid(&text, &label),
    }
}

pub fn write_signal(path: &Path, signal: &Signal2D, format: SignalFormat) -> Result<()> {
    let text = match format {
        SignalFormat::Pgm => format_pgm(signal),
        SignalFormat::Csv => format_csv_grid(signal),
    };
    write_text(path, &text)
}

fn parse_error(label: &str, line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: label.to_string(),
        line,
        column,
        message: message.into(),
    }
}

fn check_square(label: &str, rows: usize, cols: usize) -> Result<()> {
    if rows != cols {
        return Err(parse_error(label, 1, 1, format!("signal must be square, got {rows} rows and {cols} columns")));
    }
    if side_depth(rows).is_err() {
        return Err(parse_error(label, 1, 1, format!("side must be a power of two, got {rows}")));
    }
    Ok(())
}

struct Token<'a> {
    text: &'a str,
    line: usize,
    column: usize,
}

fn pgm_tokens(text: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("");
        let mut rest = body;
        let mut offset = 0;
        while let Some(start) = rest.find(|c: char| !c.is_ascii_whitespace()) {
            let tail = &rest[start..];
            let len = tail.find(|c: char| c.is_ascii_whitespace()).unwrap_or(tail.len());
            out.push(Token {
                text: &tail[..len],
                line: ln + 1,
                column: offset + start + 1,
            });
            offset += start + len;
            rest = &tail[len..];
        }
    }
    out
}

/// Parses a plain `P2` PGM.
pub fn parse_pgm(text: &str, label: &str) -> Result<Signal2D> {
    let tokens = pgm_tokens(text);
    let mut it = tokens.iter();
    let magic = it.next().ok_or_else(|| parse_error(label, 1, 1, "empty file"))?;
    if magic.text != "P2" {
        return Err(parse_error(label, magic.line, magic.column, format!("expected magic number P2, found {:?}", magic.text)));
    }
    let mut header = |what: &str| -> Result<(usize, &Token)> {
        let t = it.next().ok_or_else(|| parse_error(label, magic.line, magic.column, format!("missing {what} in header")))?;
        let v = t
            .text
            .parse::<usize>()
            .map_err(|_| parse_error(label, t.line, t.column, format!("invalid {what} {:?}", t.text)))?;
        Ok((v, t))
    };
    let (width, _) = header("width")?;
    let (height, _) = header("height")?;
    let (maxval, mt) = header("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(parse_error(label, mt.line, mt.column, format!("maxval must be in 1..=65535, got {maxval}")));
    }
    check_square(label, height, width)?;
    let mut data = Vec::with_capacity(width * height);
    for t in it {
        let v = t
            .text
            .parse::<usize>()
            .map_err(|_| parse_error(label, t.line, t.column, format!("invalid gray level {:?}", t.text)))?;
        if v > maxval {
            return Err(parse_error(label, t.line, t.column, format!("gray level {v} exceeds maxval {maxval}")));
        }
        if data.len() == width * height {
            return Err(parse_error(label, t.line, t.column, "more gray levels than width x height"));
        }
        data.push(v as f64);
    }
    if data.len() != width * height {
        return Err(parse_error(
            label,
            text.lines().count().max(1),
            1,
            format!("expected {} gray levels, found {}", width * height, data.len()),
        ));
    }
    Signal2D::new(width, data)
}

/// Formats a signal as plain PGM. Values are rounded to the nearest integer
/// and clamped to `0..=65535`; maxval is the larger of 255 and the data maximum.
pub fn format_pgm(signal: &Signal2D) -> String {
    let levels: Vec<u32> = signal
        .as_slice()
        .iter()
        .map(|v| v.round().clamp(0.0, 65535.0) as u32)
        .collect();
    let maxval = levels.iter().copied().max().unwrap_or(0).max(255);
    let side = signal.side();
    let mut out = format!("P2\n{side} {side}\n{maxval}\n");
    for row in levels.chunks(side) {
        let line: Vec<String> = row.iter().map(u32::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Parses a square numeric CSV grid (no header).
pub fn parse_csv_grid(text: &str, label: &str) -> Result<Signal2D> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            parse_error(label, line, 1, e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(rows.len() + 1);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(c, field)| {
                field
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| parse_error(label, line, c + 1, format!("invalid number {field:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_error(
                    label,
                    line,
                    row.len().min(first.len()) + 1,
                    format!("row has {} values, expected {}", row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
    }
    let cols = rows.first().map_or(0, Vec::len);
    check_square(label, rows.len(), cols)?;
    Signal2D::new(cols, rows.concat())
}

/// Formats a signal as a CSV grid; every value round-trips exactly.
pub fn format_csv_grid(signal: &Signal2D) -> String {
    let mut out = String::new();
    for row in signal.as_slice().chunks(signal.side()) {
        let line: Vec<String> = row.iter().map(f64::to_string).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

/// Branch probabilities as stored on disk: one number for every node, or a
/// map from `"i/j0/j1"` to a value (unlisted nodes never expand).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BranchSpec {
    Uniform(f64),
    PerNode(BTreeMap<String, f64>),
}

/// The hyperparameter file.
///
/// ```json
/// {
///   "d_max": 2,
///   "sigma2": 10.0,
///   "noise_sigma2": 4.0,
///   "g": 0.5,
///   "mu": { "0/0/0": [ ... 16 values ... ], "1/0/0": [ ... 4 values ... ] }
/// }
/// ```
///
/// `mu` is optional and sparse: each entry is one node's block in row-major
/// order, absent nodes are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperParamsFile {
    pub d_max: u32,
    pub sigma2: f64,
    pub noise_sigma2: f64,
    pub g: BranchSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<BTreeMap<String, Vec<f64>>>,
}

impl HyperParamsFile {
    pub fn to_hyperparams(&self) -> Result<HyperParams> {
        let d_max = self.d_max;
        check_depth(d_max)?;
        let g = match &self.g {
            BranchSpec::Uniform(v) => BranchProbabilities::uniform(d_max, *v)?,
            BranchSpec::PerNode(map) => {
                let mut values = vec![0.0; crate::node::node_count(d_max)];
                for (key, &v) in map {
                    let s = NodeId::parse_key(key)?;
                    if s.depth > d_max {
                        return Err(Error::Config(format!("g entry {key} is deeper than d_max = {d_max}")));
                    }
                    values[s.flat_index()] = v;
                }
                BranchProbabilities::from_values(d_max, values)?
            }
        };
        let mut mu = PacketTable::zeros(d_max);
        if let Some(map) = &self.mu {
            for (key, block) in map {
                let s = NodeId::parse_key(key)?;
                if s.depth > d_max {
                    return Err(Error::Config(format!("mu entry {key} is deeper than d_max = {d_max}")));
                }
                mu.set_block(s, block)?;
            }
        }
        HyperParams::new(g, mu, self.sigma2, self.noise_sigma2)
    }

    /// Full description of `hp`; all-zero mean blocks are omitted.
    pub fn from_hyperparams(hp: &HyperParams) -> Self {
        let d_max = hp.d_max();
        let g = BranchSpec::PerNode(
            all_nodes(d_max)
                .filter(|s| s.depth < d_max)
                .map(|s| (s.key(), hp.g.get(s)))
                .collect(),
        );
        let mu: BTreeMap<String, Vec<f64>> = all_nodes(d_max)
            .filter(|&s| hp.mu.block(s).iter().any(|&v| v != 0.0))
            .map(|s| (s.key(), hp.mu.block(s).to_vec()))
            .collect();
        HyperParamsFile {
            d_max,
            sigma2: hp.sigma2,
            noise_sigma2: hp.noise_sigma2,
            g,
            mu: (!mu.is_empty()).then_some(mu),
        }
    }
}

pub fn parse_hyperparams(text: &str, label: &str) -> Result<HyperParams> {
    let file: HyperParamsFile =
        serde_json::from_str(text).map_err(|e| parse_error(label, e.line(), e.column(), e.to_string()))?;
    file.to_hyperparams()
}

pub fn read_hyperparams(path: &Path) -> Result<HyperParams> {
    parse_hyperparams(&read_text(path)?, &path.display().to_string())
}

pub fn write_hyperparams(path: &Path, hp: &HyperParams) -> Result<()> {
    let text = serde_json::to_string_pretty(&HyperParamsFile::from_hyperparams(hp))
        .expect("hyperparameters serialize");
    write_text(path, &(text + "\n"))
}

/// Prior mean blocks estimated from a corpus: every entry of node `s`'s block
/// is the corpus average of the mean coefficient of `W_s x_n`,
/// `sum_n sum(W_s x_n) / (N 4^(d_max - i))`.
pub fn estimate_mu(corpus: &[Signal2D], d_max: u32) -> Result<PacketTable> {
    check_depth(d_max)?;
    if corpus.is_empty() {
        return Err(Error::domain("cannot estimate mu from an empty corpus"));
    }
    if let Some(k) = corpus.iter().position(|x| x.d_max() != d_max) {
        return Err(Error::domain(format!(
            "corpus image {k} is {0}x{0}, expected side 2^{d_max}",
            corpus[k].side()
        )));
    }
    let mut sums = vec![0.0; crate::node::node_count(d_max)];
    for x in corpus {
        let t = analyze_full(x);
        for s in all_nodes(d_max) {
            sums[s.flat_index()] += t.block(s).iter().sum::<f64>();
        }
    }
    let n = corpus.len() as f64;
    Ok(PacketTable::constant_blocks(d_max, |s| {
        let block_len = (1u64 << (2 * (d_max - s.depth))) as f64;
        sums[s.flat_index()] / (n * block_len)
    }))
}

/// A stand-alone prior-mean file: `{"d_max": 2, "mu": {"i/j0/j1": [...], ...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MuFile {
    pub d_max: u32,
    pub mu: BTreeMap<String, Vec<f64>>,
}

pub fn read_mu_file(path: &Path) -> Result<PacketTable> {
    let label = path.display().to_string();
    let file: MuFile = serde_json::from_str(&read_text(path)?)
        .map_err(|e| parse_error(&label, e.line(), e.column(), e.to_string()))?;
    check_depth(file.d_max)?;
    let mut mu = PacketTable::zeros(file.d_max);
    for (key, block) in &file.mu {
        let s = NodeId::parse_key(key)?;
        if s.depth > file.d_max {
            return Err(Error::Config(format!("mu entry {key} is deeper than d_max = {}", file.d_max)));
        }
        mu.set_block(s, block)?;
    }
    Ok(mu)
}

pub fn write_mu_file(path: &Path, mu: &PacketTable) -> Result<()> {
    let file = MuFile {
        d_max: mu.d_max(),
        mu: all_nodes(mu.d_max()).map(|s| (s.key(), mu.block(s).to_vec())).collect(),
    };
    let text = serde_json::to_string_pretty(&file).expect("mu serializes");
    write_text(path, &(text + "\n"))
}

/// Reads every `.pgm` and `.csv` file in `dir` (sorted by file name).
pub fn read_corpus(dir: &Path) -> Result<Vec<Signal2D>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths: Vec<PathBuf> = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if SignalFormat::from_path(&path).is_ok() {
            paths.push(path);
        }
    }
    paths.sort();
    paths
        .iter()
        .map(|p| read_signal(p, SignalFormat::from_path(p)?))
        .collect()
}

/// A CSV table with a header row.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl ResultTable {
    pub fn new(header: &[&str]) -> Self {
        ResultTable {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width differs from header");
        self.rows.push(row);
    }

    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("write to memory");
        for r in &self.rows {
            w.write_record(r).expect("write to memory");
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
    }
}

pub fn write_results_csv(table: &ResultTable, path: &Path) -> Result<()> {
    write_text(path, &table.to_csv_string())
}

/// Preorder bit-string of a tree (`1` inner, `0` leaf).
pub fn serialize_model(m: &QuadTreeModel) -> String {
    m.to_bitstring()
}

pub fn parse_model(d_max: u32, bits: &str) -> Result<QuadTreeModel> {
    QuadTreeModel::from_bitstring(d_max, bits)
}
