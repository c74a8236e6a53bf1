//! Experiment configuration, Monte Carlo experiments, EXIT curves and the
//! table writers behind the command-line tool.

use crate::bits::BitVec;
use crate::bounds::{
    self, alpha_relation, alpha_relation_bsc, floor_rate_check, rate_phi_bound, theorem_trace,
    Theorem, TraceParams, TransferParams,
};
use crate::channels::{binary_entropy, erasure_cascade, make_channel, ChannelKind, ChannelModel};
use crate::codes::{
    is_automorphism, min_distance, repetition, rm_generator, single_parity_check, BinaryCode,
    CoordPermutation, RmParams,
};
use crate::decoders::{
    bec_pe_rational, bec_recoverable, bec_unrecoverable_counts, build_syndrome_table,
    extrinsic_metrics, majority_union, ErasurePattern, EvalMode, ExtrinsicBscDecoder,
    ExtrinsicMetrics, MetricSource, MultiLookDecoder, PosteriorEngine,
};
use crate::error::{infeasible, param, Error, Result};
use crate::fourier::{
    biased_transform, hypercontractive_check, level_k_check, level_profile, BooleanFn,
};
use crate::mc;
use crate::subspaces::{multi_look_family, spread_family, LookFamily};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const DEFAULT_GRID_POINTS: usize = 201;
pub const MIN_MC_SAMPLES: u64 = 1000;
/// Cap on (output patterns) × (codewords) for exact mutual information.
pub const MAX_MI_WORK: u64 = 1 << 28;

/// Where a code comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CodeSpec {
    Rm { r: usize, m: usize },
    Repetition(usize),
    Spc(usize),
    File(PathBuf),
}

impl CodeSpec {
    pub fn build(&self) -> Result<BinaryCode> {
        match self {
            CodeSpec::Rm { r, m } => rm_generator(RmParams::new(*r, *m)?),
            CodeSpec::Repetition(n) => repetition(*n),
            CodeSpec::Spc(n) => single_parity_check(*n),
            CodeSpec::File(path) => BinaryCode::from_text(&std::fs::read_to_string(path)?),
        }
    }
}

impl FromStr for CodeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let words: Vec<&str> = s.split_whitespace().collect();
        let num = |w: &str| {
            w.parse::<usize>()
                .map_err(|_| Error::Parameter(format!("code: cannot parse {w:?} as an integer")))
        };
        match words.as_slice() {
            ["rm", r, m] => Ok(CodeSpec::Rm {
                r: num(r)?,
                m: num(m)?,
            }),
            ["rep" | "repetition", n] => Ok(CodeSpec::Repetition(num(n)?)),
            ["spc", n] => Ok(CodeSpec::Spc(num(n)?)),
            ["file", path] => Ok(CodeSpec::File(PathBuf::from(path))),
            _ => param(format!(
                "code {s:?} is not one of `rm R M`, `rep N`, `spc N`, `file PATH`"
            )),
        }
    }
}

impl fmt::Display for CodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodeSpec::Rm { r, m } => write!(f, "rm {r} {m}"),
            CodeSpec::Repetition(n) => write!(f, "rep {n}"),
            CodeSpec::Spc(n) => write!(f, "spc {n}"),
            CodeSpec::File(p) => write!(f, "file {}", p.display()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Mc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    RmInfo,
    Metrics,
    BoundTable,
    BoundTrace,
    FourierAnalyze,
    ExitCurve,
    Looks,
    Spread,
    Transfer,
    Verify,
}

const COMMANDS: [(&str, Command); 10] = [
    ("rm-info", Command::RmInfo),
    ("metrics", Command::Metrics),
    ("bound-table", Command::BoundTable),
    ("bound-trace", Command::BoundTrace),
    ("fourier-analyze", Command::FourierAnalyze),
    ("exit-curve", Command::ExitCurve),
    ("looks", Command::Looks),
    ("spread", Command::Spread),
    ("transfer", Command::Transfer),
    ("verify", Command::Verify),
];

impl FromStr for Command {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        COMMANDS
            .iter()
            .find(|(name, _)| *name == s)
            .map(|(_, c)| *c)
            .ok_or_else(|| Error::Parameter(format!("unknown command {s:?}")))
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = COMMANDS
            .iter()
            .find(|(_, c)| c == self)
            .map(|(n, _)| *n)
            .unwrap();
        f.write_str(name)
    }
}

/// Keys accepted in a config file; each matches a command-line flag.
pub const CONFIG_KEYS: [&str; 26] = [
    "command",
    "code",
    "channel",
    "p",
    "target",
    "mode",
    "samples",
    "seed",
    "workers",
    "out",
    "format",
    "table",
    "theorem",
    "r",
    "m",
    "s",
    "t",
    "k",
    "delta",
    "eta",
    "grid_points",
    "n",
    "d",
    "theta",
    "tol",
    "criteria",
];

/// A parsed experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub code: Option<CodeSpec>,
    pub channel: Option<String>,
    pub p: Vec<f64>,
    pub target: usize,
    pub mode: Mode,
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub grid_points: usize,
    /// Every key as given, for command-specific options and hashing.
    pub raw: BTreeMap<String, String>,
}

fn parse_list(v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::Parameter(format!("p: cannot parse {s:?} as a number")))
        })
        .collect()
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse::<T>()
        .map_err(|_| Error::Parameter(format!("{key}: cannot parse {v:?}")))
}

impl ExperimentConfig {
    /// Builds a config from `(line, key, value)` triples. Errors carry the
    /// line when one is given.
    pub fn from_pairs<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Option<usize>, String, String)>,
    {
        let mut raw = BTreeMap::new();
        let mut lines = BTreeMap::new();
        for (line, key, value) in pairs {
            let at = |msg: String| match line {
                Some(line) => Error::Parse { line, msg },
                None => Error::Parameter(msg),
            };
            if !CONFIG_KEYS.contains(&key.as_str()) {
                return Err(at(format!("unknown key {key:?}")));
            }
            if raw.insert(key.clone(), value).is_some() {
                return Err(at(format!("duplicate key {key:?}")));
            }
            lines.insert(key, line);
        }
        let wrap = |key: &str, e: Error| match lines.get(key).copied().flatten() {
            Some(line) => Error::Parse {
                line,
                msg: e.to_string(),
            },
            None => e,
        };
        let get = |key: &str| raw.get(key).map(String::as_str);
        let command = match get("command") {
            Some(c) => c.parse().map_err(|e| wrap("command", e))?,
            None => {
                return Err(Error::Parse {
                    line: 1,
                    msg: "missing key \"command\"".into(),
                })
            }
        };
        let code = get("code")
            .map(|c| c.parse())
            .transpose()
            .map_err(|e| wrap("code", e))?;
        let p = get("p")
            .map(parse_list)
            .transpose()
            .map_err(|e| wrap("p", e))?
            .unwrap_or_default();
        let channel = get("channel").map(str::to_string);
        let mode = match get("mode") {
            None | Some("exact") => Mode::Exact,
            Some("mc") => Mode::Mc,
            Some(other) => {
                return Err(wrap(
                    "mode",
                    Error::Parameter(format!("mode {other:?} is not exact or mc")),
                ))
            }
        };
        let format = match get("format") {
            None | Some("csv") => OutputFormat::Csv,
            Some("json") => OutputFormat::Json,
            Some(other) => {
                return Err(wrap(
                    "format",
                    Error::Parameter(format!("format {other:?} is not csv or json")),
                ))
            }
        };
        let num_or = |key: &str, default: u64| -> Result<u64> {
            get(key)
                .map(|v| parse_num(key, v))
                .transpose()
                .map_err(|e| wrap(key, e))
                .map(|v| v.unwrap_or(default))
        };
        let cfg = ExperimentConfig {
            command,
            code,
            channel,
            p,
            target: num_or("target", 0)? as usize,
            mode,
            samples: num_or("samples", 100_000)?,
            seed: num_or("seed", 1)?,
            workers: num_or("workers", 1)? as usize,
            out: get("out").map(PathBuf::from),
            format,
            grid_points: num_or("grid_points", DEFAULT_GRID_POINTS as u64)? as usize,
            raw: raw.clone(),
        };
        if cfg.channel.is_some() {
            cfg.channels().map_err(|e| wrap("channel", e))?;
        }
        Ok(cfg)
    }

    /// Parses flat `key = value` text; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let body = line.split('#').next().unwrap().trim();
            if body.is_empty() {
                continue;
            }
            let (k, v) = body.split_once('=').ok_or_else(|| Error::Parse {
                line: line_no,
                msg: format!("expected key = value, found {body:?}"),
            })?;
            pairs.push((Some(line_no), k.trim().to_string(), v.trim().to_string()));
        }
        Self::from_pairs(pairs)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Canonical `key=value` text, sorted by key.
    pub fn canonical_text(&self) -> String {
        self.raw.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn config_hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_text().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.raw.get(key).map(String::as_str)
    }

    fn opt<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key).map(|v| parse_num(key, v)).transpose()
    }

    pub fn code(&self) -> Result<BinaryCode> {
        match &self.code {
            Some(spec) => spec.build(),
            None => param(format!("command {} needs --code", self.command)),
        }
    }

    /// One channel per value of `p` when `channel` names only a kind,
    /// otherwise the single channel `channel` describes.
    pub fn channels(&self) -> Result<Vec<ChannelModel>> {
        let spec = self
            .channel
            .as_deref()
            .ok_or_else(|| Error::Parameter("missing --channel".into()))?;
        let kind = spec.trim().to_ascii_lowercase();
        if self.p.is_empty() {
            return Ok(vec![make_channel(spec)?]);
        }
        if kind != "bec" && kind != "bsc" {
            return param(format!(
                "channel {spec:?}: with --p the channel must be the bare kind bec or bsc"
            ));
        }
        self.p
            .iter()
            .map(|p| make_channel(&format!("{kind} {p}")))
            .collect()
    }

    pub fn channel(&self) -> Result<ChannelModel> {
        let mut chs = self.channels()?;
        if chs.len() != 1 {
            return param(format!("command {} takes a single channel", self.command));
        }
        Ok(chs.pop().unwrap())
    }

    pub fn eval_mode(&self) -> Result<EvalMode> {
        Ok(match self.mode {
            Mode::Exact => EvalMode::Exact,
            Mode::Mc => {
                if self.samples < MIN_MC_SAMPLES {
                    return param(format!(
                        "Monte Carlo needs at least {MIN_MC_SAMPLES} samples"
                    ));
                }
                EvalMode::MonteCarlo {
                    samples: self.samples,
                    seed: self.seed,
                    workers: self.workers,
                }
            }
        })
    }
}

/// One output value.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
    Missing,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}
impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}
impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}
impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}
impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}
impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}
impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Missing, Into::into)
    }
}

/// `%.17g` formatting.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{x:.16e}");
    let (mant, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    let strip = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-4..17).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", strip(mant), exp.abs())
    } else {
        strip(&format!("{:.*}", (16 - exp) as usize, x))
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format_float(*x),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => {
                format!("\"{}\"", s.replace('"', "\"\""))
            }
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) if x.is_finite() => format_float(*x),
            Cell::Float(_) | Cell::Missing => "null".into(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => serde_json::to_string(s).unwrap(),
        }
    }
}

/// Rows of one command's output plus summary values.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub meta: Vec<(String, Cell)>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn meta(&mut self, key: &str, value: impl Into<Cell>) {
        self.meta.push((key.to_string(), value.into()));
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn meta_value(&self, key: &str) -> Option<&Cell> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    fn provenance(&self, cfg: &ExperimentConfig) -> Vec<(String, Cell)> {
        let mut out = vec![
            (
                "tool".to_string(),
                Cell::Text(format!("rmnest {TOOL_VERSION}")),
            ),
            ("command".to_string(), Cell::Text(cfg.command.to_string())),
            ("seed".to_string(), Cell::Int(cfg.seed as i64)),
            ("config_sha256".to_string(), Cell::Text(cfg.config_hash())),
        ];
        out.extend(self.meta.iter().cloned());
        out
    }

    pub fn to_csv(&self, cfg: &ExperimentConfig) -> String {
        let mut s = String::new();
        for (k, v) in self.provenance(cfg) {
            s.push_str(&format!("# {k}: {}\n", v.csv()));
        }
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self, cfg: &ExperimentConfig) -> String {
        let object = |pairs: &mut dyn Iterator<Item = (&str, &Cell)>| {
            let body: Vec<String> = pairs
                .map(|(k, v)| format!("{}: {}", serde_json::to_string(k).unwrap(), v.json()))
                .collect();
            format!("{{{}}}", body.join(", "))
        };
        let prov = self.provenance(cfg);
        let meta = object(&mut prov.iter().map(|(k, v)| (k.as_str(), v)));
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|r| {
                format!(
                    "    {}",
                    object(&mut self.columns.iter().map(String::as_str).zip(r.iter()))
                )
            })
            .collect();
        format!(
            "{{\n  \"meta\": {meta},\n  \"rows\": [\n{}\n  ]\n}}\n",
            rows.join(",\n")
        )
    }

    pub fn render(&self, cfg: &ExperimentConfig) -> String {
        match cfg.format {
            OutputFormat::Csv => self.to_csv(cfg),
            OutputFormat::Json => self.to_json(cfg),
        }
    }
}

/// Monte Carlo extrinsic metrics of the configured code, channel and target.
pub fn mc_estimate(cfg: &ExperimentConfig, workers: usize) -> Result<ExtrinsicMetrics> {
    if cfg.mode != Mode::Mc {
        return param("mc_estimate needs mode = mc");
    }
    if cfg.samples < MIN_MC_SAMPLES {
        return param(format!(
            "Monte Carlo needs at least {MIN_MC_SAMPLES} samples"
        ));
    }
    let mode = EvalMode::MonteCarlo {
        samples: cfg.samples,
        seed: cfg.seed,
        workers,
    };
    extrinsic_metrics(&cfg.code()?, &cfg.channel()?, cfg.target, mode)
}

/// EXIT function samples and both sides of the area identity.
#[derive(Clone, Debug, PartialEq)]
pub struct ExitCurve {
    pub grid: Vec<f64>,
    /// I(X_0; Y_0 | Y_~0(t)).
    pub exit_values: Vec<f64>,
    /// H(X_0 | Y_~0(t)).
    pub entropy_values: Vec<f64>,
    pub area: f64,
    pub mutual_info_per_bit: f64,
    /// Whether a transitive group of automorphisms was found.
    pub transitive: bool,
}

/// Composite Simpson rule on a uniform grid of odd length over [a, b].
pub fn simpson(values: &[f64], a: f64, b: f64) -> Result<f64> {
    let n = values.len();
    if n < 3 || n.is_multiple_of(2) {
        return param(format!(
            "Simpson's rule needs an odd number (>= 3) of points, got {n}"
        ));
    }
    let h = (b - a) / (n - 1) as f64;
    let mut s = values[0] + values[n - 1];
    for (i, v) in values.iter().enumerate().take(n - 1).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    Ok(s * h / 3.0)
}

/// True when the cyclic shift, or every translation x -> x + e_i of the
/// index space (length a power of two), is an automorphism.
pub fn transitivity_witness(code: &BinaryCode) -> Result<bool> {
    let n = code.length();
    if n <= 1 {
        return Ok(true);
    }
    let shift = CoordPermutation::new((0..n).map(|j| (j + 1) % n).collect())?;
    if is_automorphism(code, &shift)? {
        return Ok(true);
    }
    if n.is_power_of_two() {
        for b in 0..n.trailing_zeros() {
            let perm = CoordPermutation::new((0..n).map(|j| j ^ (1 << b)).collect())?;
            if !is_automorphism(code, &perm)? {
                return Ok(false);
            }
        }
        return Ok(true);
    }
    Ok(false)
}

/// H(X_0 | Y_~0(t)) and I(X_0; Y_0 | Y_~0(t)) at one cascade erasure rate.
pub fn exit_point(code: &BinaryCode, base: &ChannelModel, t: f64) -> Result<(f64, f64)> {
    let engine = PosteriorEngine::new(code, &erasure_cascade(base, t)?, 0)?;
    let y0: Vec<(f64, f64)> = (0..base.alphabet_size())
        .filter(|&i| base.prob(i) > 0.0)
        .map(|i| (base.prob(i), base.prob(base.negation(i))))
        .collect();
    let s = engine.exact_fold(2, |(p1, _), out| {
        out[0] = binary_entropy(p1);
        let mut h = 0.0;
        for &(q, q_neg) in &y0 {
            let num = p1 * q_neg;
            let den = num + (1.0 - p1) * q;
            if den > 0.0 {
                h += q * binary_entropy(num / den);
            }
        }
        out[1] = h;
    })?;
    Ok((s[0], (s[0] - s[1]).clamp(0.0, 1.0)))
}

/// I(X;Y)/n for a uniformly chosen codeword, by enumerating outputs.
pub fn mutual_information_per_bit(code: &BinaryCode, ch: &ChannelModel) -> Result<f64> {
    let n = code.length();
    let codewords = code.codewords_u64()?;
    let alphabet: Vec<usize> = (0..ch.alphabet_size())
        .filter(|&i| ch.prob(i) > 0.0)
        .collect();
    let a = alphabet.len() as u64;
    let outputs = (0..n)
        .try_fold(1u64, |acc, _| acc.checked_mul(a))
        .unwrap_or(u64::MAX);
    if outputs.saturating_mul(codewords.len() as u64) > MAX_MI_WORK {
        return infeasible(format!(
            "exact mutual information needs {outputs} outputs × {} codewords",
            codewords.len()
        ));
    }
    let chunk = 1024u64.min(outputs);
    let cond: f64 = (0..outputs.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut acc = 0.0;
            let mut lik = vec![[0.0f64; 2]; n];
            let mut post = vec![0.0f64; codewords.len()];
            for idx in c * chunk..((c + 1) * chunk).min(outputs) {
                let mut rest = idx;
                for l in lik.iter_mut() {
                    let sym = alphabet[(rest % a) as usize];
                    rest /= a;
                    *l = [ch.prob(sym), ch.prob(ch.negation(sym))];
                }
                let mut total = 0.0;
                for (slot, &cw) in post.iter_mut().zip(&codewords) {
                    let mut v = 1.0;
                    for (i, l) in lik.iter().enumerate() {
                        v *= l[((cw >> i) & 1) as usize];
                    }
                    *slot = v;
                    total += v;
                }
                let weight: f64 = lik.iter().map(|l| l[0]).product();
                let h: f64 = post
                    .iter()
                    .filter(|&&v| v > 0.0)
                    .map(|&v| {
                        let q = v / total;
                        -q * q.log2()
                    })
                    .sum();
                acc += weight * h;
            }
            acc
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    Ok((code.dim() as f64 - cond) / n as f64)
}

/// EXIT curve of target 0 on the grid t_i = i/(points-1).
pub fn exit_curve(code: &BinaryCode, base: &ChannelModel, grid_points: usize) -> Result<ExitCurve> {
    if grid_points < 3 || grid_points.is_multiple_of(2) {
        return param(format!(
            "grid_points must be odd and at least 3, got {grid_points}"
        ));
    }
    let grid: Vec<f64> = (0..grid_points)
        .map(|i| i as f64 / (grid_points - 1) as f64)
        .collect();
    let mut exit_values = Vec::with_capacity(grid_points);
    let mut entropy_values = Vec::with_capacity(grid_points);
    for &t in &grid {
        let (h, i) = exit_point(code, base, t)?;
        entropy_values.push(h);
        exit_values.push(i);
    }
    Ok(ExitCurve {
        area: simpson(&exit_values, 0.0, 1.0)?,
        mutual_info_per_bit: mutual_information_per_bit(code, base)?,
        transitive: transitivity_witness(code)?,
        grid,
        exit_values,
        entropy_values,
    })
}

fn bsc_parameter(ch: &ChannelModel) -> Result<f64> {
    match ch.kind() {
        ChannelKind::Bsc(p) => Ok(p),
        _ => param("this experiment runs on a BSC"),
    }
}

fn draw_bsc_word<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> BitVec {
    let mut z = BitVec::zeros(n);
    for j in 0..n {
        if rng.gen::<f64>() < p {
            z.set(j, true);
        }
    }
    z
}

/// Per-bit extrinsic hard decisions collected into a candidate vector.
#[derive(Clone, Debug, PartialEq)]
pub struct ListBallReport {
    pub samples: u64,
    /// Measured bit-error rate Q̂ and its standard error.
    pub q_hat: f64,
    pub q_std_error: f64,
    /// √Q̂, used both as the radius and as the bound.
    pub radius: f64,
    /// Measured Pr(Δ >= √Q̂) and its standard error.
    pub tail: f64,
    pub tail_std_error: f64,
    pub pass: bool,
}

pub fn list_ball_experiment(
    code: &BinaryCode,
    ch: &ChannelModel,
    samples: u64,
    seed: u64,
    workers: usize,
) -> Result<ListBallReport> {
    let p = bsc_parameter(ch)?;
    let n = code.length();
    if n > 63 {
        return infeasible("list-ball experiment packs words into 63 bits");
    }
    let decoders: Vec<ExtrinsicBscDecoder> = (0..n)
        .map(|i| ExtrinsicBscDecoder::new(code, i, p))
        .collect::<Result<_>>()?;
    // Statistic j counts samples with exactly j wrong decisions.
    let mom = mc::run(samples, seed, workers, n + 1, |rng, out| {
        let z = draw_bsc_word(n, p, rng).to_u64();
        let wrong = decoders
            .iter()
            .filter(|d| d.decode_packed(z).0 == 1)
            .count();
        out.iter_mut().for_each(|o| *o = 0.0);
        out[wrong] = 1.0;
        Ok(())
    })?;
    let total = mom.n as f64;
    let freq: Vec<f64> = (0..=n).map(|j| mom.mean(j)).collect();
    let q_hat: f64 = freq
        .iter()
        .enumerate()
        .map(|(j, f)| j as f64 / n as f64 * f)
        .sum();
    let second: f64 = freq
        .iter()
        .enumerate()
        .map(|(j, f)| (j as f64 / n as f64).powi(2) * f)
        .sum();
    let q_std_error = ((second - q_hat * q_hat).max(0.0) / total).sqrt();
    let radius = q_hat.sqrt();
    let tail: f64 = freq
        .iter()
        .enumerate()
        .filter(|(j, _)| *j as f64 / n as f64 >= radius)
        .map(|(_, f)| f)
        .sum();
    let tail_std_error = (tail * (1.0 - tail) / total).sqrt();
    Ok(ListBallReport {
        samples,
        q_hat,
        q_std_error,
        radius,
        tail,
        tail_std_error,
        pass: tail <= radius + 3.0 * tail_std_error,
    })
}

/// Majority decoding over three nested looks against the three-look bound.
#[derive(Clone, Debug, PartialEq)]
pub struct MajorityReport {
    pub samples: u64,
    pub rho: f64,
    /// Mean per-look error rate q̂ and its standard error.
    pub q_hat: f64,
    pub q_std_error: f64,
    pub majority_error: f64,
    pub majority_std_error: f64,
    /// 3ρq̂ + 3(1-ρ)q̂².
    pub bound: f64,
    pub pass: bool,
}

pub fn majority_look_experiment(
    code: &BinaryCode,
    family: &LookFamily,
    ch: &ChannelModel,
    samples: u64,
    seed: u64,
    workers: usize,
) -> Result<MajorityReport> {
    let p = bsc_parameter(ch)?;
    if family.looks.len() != 3 {
        return param("majority decoding needs s = 3 looks");
    }
    let decoder = MultiLookDecoder::from_family(code, family, ch, 0)?;
    let n = code.length();
    let mut union: Vec<usize> = family.looks.concat();
    union.sort_unstable();
    union.dedup();
    let mom = mc::run(samples, seed, workers, 2, |rng, out| {
        let mut z = BitVec::zeros(n);
        for &j in &union {
            if j != 0 && rng.gen::<f64>() < p {
                z.set(j, true);
            }
        }
        let [a, b, c] = decoder.look_bits(&z)?;
        out[0] = (a + b + c) as f64 / 3.0;
        out[1] = majority_union(a, b, c).0 as f64;
        Ok(())
    })?;
    let rho = *family.pairwise_overlap.numer() as f64 / *family.pairwise_overlap.denom() as f64;
    let q_hat = mom.mean(0);
    let bound = 3.0 * rho * q_hat + 3.0 * (1.0 - rho) * q_hat * q_hat;
    let majority_error = mom.mean(1);
    let majority_std_error = mom.std_error(1);
    Ok(MajorityReport {
        samples,
        rho,
        q_hat,
        q_std_error: mom.std_error(0),
        majority_error,
        majority_std_error,
        bound,
        pass: majority_error <= bound + 3.0 * majority_std_error,
    })
}

/// Block error rate of syndrome decoding over BSC(p). Noise is drawn as
/// uniforms compared against p, so fixing the seed couples all probes and
/// the estimate is monotone in p for monotone decoders.
pub fn block_error_mc(
    code: &BinaryCode,
    p: f64,
    samples: u64,
    seed: u64,
    workers: usize,
) -> Result<(f64, f64)> {
    let table = build_syndrome_table(code)?;
    let n = code.length();
    let mom = mc::run(samples, seed, workers, 1, |rng, out| {
        let z = draw_bsc_word(n, p, rng).to_u64();
        out[0] = (table.decode_block(z) != 0) as u8 as f64;
        Ok(())
    })?;
    Ok((mom.mean(0), mom.std_error(0)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThetaEstimate {
    pub theta: f64,
    /// B̂ at the returned θ and its standard error.
    pub block_error: f64,
    pub std_error: f64,
    pub probes: usize,
}

/// Bisection on B(p) = 1/2 over p ∈ [0, 1/2] to width `tol`.
pub fn estimate_theta(
    code: &BinaryCode,
    samples: u64,
    seed: u64,
    workers: usize,
    tol: f64,
) -> Result<ThetaEstimate> {
    if !(tol > 0.0 && tol < 0.5) {
        return param("tol must lie in (0, 1/2)");
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    let mut probes = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let (b, _) = block_error_mc(code, mid, samples, seed, workers)?;
        probes += 1;
        if b < 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let theta = 0.5 * (lo + hi);
    let (block_error, std_error) = block_error_mc(code, theta, samples, seed, workers)?;
    Ok(ThetaEstimate {
        theta,
        block_error,
        std_error,
        probes,
    })
}

/// Pr[Bin(n, p) >= ⌈(n+1)/2⌉], the majority block error of repetition-n.
pub fn repetition_block_error(n: usize, p: f64) -> f64 {
    let need = n / 2 + 1;
    (need..=n)
        .map(|w| {
            crate::codes::binomial(n as u64, w as u64) as f64
                * p.powi(w as i32)
                * (1.0 - p).powi((n - w) as i32)
        })
        .sum()
}

/// Erasure pattern over the non-target coordinates, bit j of `x` standing for
/// the j-th of them, mapped onto all n coordinates.
fn pattern_on(n: usize, target: usize, x: u64) -> ErasurePattern {
    let mut v = BitVec::zeros(n);
    let mut j = 0;
    for i in 0..n {
        if i == target {
            continue;
        }
        if (x >> j) & 1 == 1 {
            v.set(i, true);
        }
        j += 1;
    }
    ErasurePattern(v)
}

/// The extrinsic BEC failure indicator of `target` as a function of the
/// erasure pattern on the other n-1 coordinates, with bias `p`.
pub fn bec_failure_indicator(code: &BinaryCode, target: usize, p: f64) -> Result<BooleanFn> {
    let n = code.length();
    if target >= n {
        return param("target out of range");
    }
    let arity = n - 1;
    if arity > 20 {
        return infeasible(format!("indicator arity {arity} exceeds 20"));
    }
    let values: Vec<f64> = (0..1u64 << arity)
        .into_par_iter()
        .map(|x| {
            bec_recoverable(code, &pattern_on(n, target, x), target).map(|ok| (!ok) as u8 as f64)
        })
        .collect::<Result<_>>()?;
    BooleanFn::new(arity, values, p)
}

/// Default p grid j/20 for j = 1..=19.
pub fn default_p_grid() -> Vec<f64> {
    (1..=19).map(|j| j as f64 / 20.0).collect()
}

fn rational_of(p: f64) -> BigRational {
    BigRational::from_float(p).unwrap_or_else(|| BigRational::from_integer(BigInt::from(0)))
}

/// (p, pe_long, pe_short, ρ, bound, pass).
pub type TwoLookRow = (f64, f64, f64, f64, f64, bool);

/// Exact two-look check of RM(r,m+1) against RM(r,m) on the BEC, per p.
pub fn two_look_rows(r: usize, m: usize, grid: &[f64]) -> Result<Vec<TwoLookRow>> {
    if m == 0 {
        return param("the two-look check needs m >= 1");
    }
    let short = rm_generator(RmParams::new(r, m)?)?;
    let long = rm_generator(RmParams::new(r, m + 1)?)?;
    let cs = bec_unrecoverable_counts(&short, 0)?;
    let cl = bec_unrecoverable_counts(&long, 0)?;
    let rho = BigRational::new(
        BigInt::from((1u64 << (m - 1)) - 1),
        BigInt::from((1u64 << m) - 1),
    );
    let one = BigRational::from_integer(BigInt::from(1));
    let to_f = |x: &BigRational| {
        use num_traits::ToPrimitive;
        x.to_f64().unwrap()
    };
    grid.iter()
        .map(|&p| {
            if !(0.0..=1.0).contains(&p) {
                return param(format!("p = {p} outside [0,1]"));
            }
            let pr = rational_of(p);
            let pe_long = bec_pe_rational(&cl, &pr);
            let pe_short = bec_pe_rational(&cs, &pr);
            let bound = (&one - &rho) * &pe_short * &pe_short + &rho * &pe_short;
            Ok((
                p,
                to_f(&pe_long),
                to_f(&pe_short),
                to_f(&rho),
                to_f(&bound),
                pe_long <= bound,
            ))
        })
        .collect()
}

/// Runs one command.
pub fn run_command(cfg: &ExperimentConfig) -> Result<Table> {
    match cfg.command {
        Command::RmInfo => rm_info(cfg),
        Command::Metrics => metrics(cfg),
        Command::BoundTable => bound_table(cfg),
        Command::BoundTrace => bound_trace(cfg),
        Command::FourierAnalyze => fourier_analyze(cfg),
        Command::ExitCurve => exit_curve_table(cfg),
        Command::Looks => looks(cfg),
        Command::Spread => spread(cfg),
        Command::Transfer => transfer(cfg),
        Command::Verify => verify(cfg),
    }
}

/// Runs a command and writes its output to `out` when set; returns the text.
pub fn execute(cfg: &ExperimentConfig) -> Result<String> {
    let text = run_command(cfg)?.render(cfg);
    if let Some(out) = &cfg.out {
        std::fs::write(out, &text)?;
    }
    Ok(text)
}

/// Loads a config file, runs it and writes the results.
pub fn run_experiment(path: &Path) -> Result<String> {
    execute(&ExperimentConfig::load(path)?)
}

fn rm_info(cfg: &ExperimentConfig) -> Result<Table> {
    let code = cfg.code()?;
    let mut t = Table::new(&["code", "n", "k", "rate", "min_distance"]);
    let d = match min_distance(&code) {
        Ok(d) => Cell::from(d),
        Err(Error::UndefinedDistance) => Cell::Missing,
        Err(e) => return Err(e),
    };
    let rate = code.rate();
    t.push(vec![
        cfg.code.as_ref().unwrap().to_string().into(),
        code.length().into(),
        code.dim().into(),
        format!("{}/{}", rate.numer(), rate.denom()).into(),
        d,
    ]);
    t.meta("rate_float", code.rate_f64());
    Ok(t)
}

fn metrics(cfg: &ExperimentConfig) -> Result<Table> {
    let code = cfg.code()?;
    let mode = cfg.eval_mode()?;
    let mut t = Table::new(&[
        "channel",
        "capacity",
        "rate",
        "mode",
        "pe",
        "pb",
        "mmse",
        "ber",
        "cond_entropy",
        "hw_pe",
        "hw_pb",
        "hw_mmse",
        "hw_ber",
        "hw_cond_entropy",
    ]);
    for ch in cfg.channels()? {
        let mx = extrinsic_metrics(&code, &ch, cfg.target, mode)?;
        let (mode_name, hw) = match mx.source {
            MetricSource::Exact => ("exact", None),
            MetricSource::MonteCarlo { half_width, .. } => ("mc", Some(half_width)),
        };
        t.push(vec![
            ch.to_string().into(),
            ch.capacity().into(),
            code.rate_f64().into(),
            mode_name.into(),
            mx.pe.into(),
            mx.pb.into(),
            mx.mmse.into(),
            mx.ber.into(),
            mx.cond_entropy.into(),
            hw.and_then(|h| h.pe).into(),
            hw.map(|h| h.pb).into(),
            hw.map(|h| h.mmse).into(),
            hw.map(|h| h.ber).into(),
            hw.map(|h| h.cond_entropy).into(),
        ]);
    }
    t.meta("target", cfg.target);
    if let EvalMode::MonteCarlo {
        samples, workers, ..
    } = mode
    {
        t.meta("samples", samples);
        t.meta("workers", workers);
    }
    Ok(t)
}

fn bound_table(cfg: &ExperimentConfig) -> Result<Table> {
    match cfg.get("table").unwrap_or("rate") {
        "rate" => {
            let m_max: usize = cfg.opt("m")?.unwrap_or(10);
            if m_max > 64 {
                return param("rate table supports m <= 64");
            }
            let mut t = Table::new(&["r", "m", "rate", "phi", "gap", "gap_bound", "holds"]);
            let mut all = true;
            for m in 1..=m_max {
                for r in 0..=m {
                    let b = rate_phi_bound(r, m)?;
                    all &= b.holds;
                    t.push(vec![
                        r.into(),
                        m.into(),
                        bounds::ratio_to_f64(&b.rate).into(),
                        b.phi.into(),
                        b.gap.into(),
                        b.gap_bound.into(),
                        b.holds.into(),
                    ]);
                }
            }
            t.meta("all_hold", all);
            Ok(t)
        }
        "floor" => {
            let m_max: usize = cfg.opt("m")?.unwrap_or(20);
            let rates = if cfg.p.is_empty() {
                vec![0.25, 0.5, 0.75]
            } else {
                cfg.p.clone()
            };
            let mut t = Table::new(&["target_rate", "m", "r", "rate", "lower", "upper", "holds"]);
            for &rate in &rates {
                for m in 1..=m_max {
                    let c = floor_rate_check(rate, m)?;
                    t.push(vec![
                        rate.into(),
                        m.into(),
                        c.r.into(),
                        c.rate.into(),
                        c.lower.into(),
                        c.upper.into(),
                        c.holds.into(),
                    ]);
                }
            }
            Ok(t)
        }
        "two-look" => {
            let (r, m) = match cfg.code {
                Some(CodeSpec::Rm { r, m }) => (r, m),
                _ => return param("table two-look needs --code \"rm R M\" for the shorter code"),
            };
            let grid = if cfg.p.is_empty() {
                default_p_grid()
            } else {
                cfg.p.clone()
            };
            let mut t = Table::new(&["p", "pe_long", "pe_short", "rho", "bound", "pass"]);
            let mut all = true;
            for (p, pl, ps, rho, b, pass) in two_look_rows(r, m, &grid)? {
                all &= pass;
                t.push(vec![
                    p.into(),
                    pl.into(),
                    ps.into(),
                    rho.into(),
                    b.into(),
                    pass.into(),
                ]);
            }
            t.meta("short_code", format!("rm {r} {m}"));
            t.meta("long_code", format!("rm {r} {}", m + 1));
            t.meta("all_pass", all);
            Ok(t)
        }
        "alpha" => {
            let points: usize = cfg.opt("n")?.unwrap_or(10_000);
            let ps = if cfg.p.is_empty() {
                (1..=10).map(|i| i as f64 * 0.05).collect()
            } else {
                cfg.p.clone()
            };
            let mut t = Table::new(&[
                "p",
                "points",
                "max_excess",
                "holds",
                "max_excess_l2",
                "holds_l2",
            ]);
            for &p in &ps {
                let (ex1, ex2) = alpha_grid(p, points)?;
                t.push(vec![
                    p.into(),
                    points.into(),
                    ex1.into(),
                    (ex1 <= 0.0).into(),
                    ex2.into(),
                    (ex2 <= 0.0).into(),
                ]);
            }
            Ok(t)
        }
        other => param(format!(
            "table {other:?} is not one of rate, floor, two-look, alpha"
        )),
    }
}

/// Largest lhs - rhs over α = i/(points+1) for the ℓ = 1 relation and the
/// ℓ = 2 three-look relation.
pub fn alpha_grid(p: f64, points: usize) -> Result<(f64, f64)> {
    let mut ex1 = f64::NEG_INFINITY;
    let mut ex2 = f64::NEG_INFINITY;
    for i in 1..=points {
        let a = i as f64 / (points + 1) as f64;
        let (l, r) = alpha_relation(a, p)?;
        ex1 = ex1.max(l - r);
        let (l, r) = alpha_relation_bsc(a, p)?;
        ex2 = ex2.max(l - r);
    }
    Ok((ex1, ex2))
}

fn bound_trace(cfg: &ExperimentConfig) -> Result<Table> {
    let theorem: Theorem = cfg
        .get("theorem")
        .ok_or_else(|| Error::Parameter("missing --theorem".into()))?
        .parse()?;
    let params = TraceParams {
        s: cfg.opt("s")?,
        t: cfg.opt("t")?,
        r: cfg.opt("r")?,
        m: cfg.opt("m")?,
        k: cfg.opt("k")?,
        delta: cfg.opt("delta")?,
        eta: cfg.opt("eta")?,
        p: cfg.p.first().copied(),
        capacity: None,
    };
    let tr = theorem_trace(theorem, &params)?;
    let mut t = Table::new(&["stage", "k", "r", "code_m", "value", "rule", "vacuous"]);
    for (i, st) in tr.stages.iter().enumerate() {
        t.push(vec![
            i.into(),
            st.k.into(),
            st.r.into(),
            st.code_m.into(),
            st.value.into(),
            st.rule.clone().into(),
            st.vacuous.into(),
        ]);
    }
    t.meta("theorem", theorem.to_string());
    t.meta("initial_delta", tr.initial_delta);
    t.meta("rho", tr.rho);
    t.meta("final_bound", tr.final_bound);
    t.meta("closed_form", tr.closed_form);
    t.meta("vacuous", tr.is_vacuous());
    for (name, ok) in &tr.preconditions {
        t.meta(&format!("pre[{name}]"), *ok);
    }
    Ok(t)
}

fn fourier_analyze(cfg: &ExperimentConfig) -> Result<Table> {
    let code = cfg.code()?;
    let p = *cfg
        .p
        .first()
        .ok_or_else(|| Error::Parameter("fourier-analyze needs --p (the erasure bias)".into()))?;
    let f = bec_failure_indicator(&code, cfg.target, p)?;
    let profile = level_profile(&biased_transform(&f)?);
    let mut t = Table::new(&["level", "mass", "cumulative"]);
    let mut acc = 0.0;
    for (k, &mass) in profile.level_mass.iter().enumerate() {
        acc += mass;
        t.push(vec![k.into(), mass.into(), acc.into()]);
    }
    let lk = level_k_check(&f)?;
    let hc = hypercontractive_check(&f)?;
    t.meta("arity", f.arity());
    t.meta("mean", f.mean());
    t.meta("variance", profile.variance);
    t.meta("level_k_threshold", lk.threshold);
    t.meta("level_k_mass", lk.mass);
    t.meta("level_k_bound", lk.bound);
    t.meta("level_k_pass", lk.pass);
    t.meta("noise_mass", hc.noise_mass);
    t.meta("noise_bound", hc.bound);
    t.meta("noise_pass", hc.pass);
    Ok(t)
}

fn exit_curve_table(cfg: &ExperimentConfig) -> Result<Table> {
    let code = cfg.code()?;
    let ch = cfg.channel()?;
    let curve = exit_curve(&code, &ch, cfg.grid_points)?;
    let mut t = Table::new(&["t", "exit", "entropy"]);
    for i in 0..curve.grid.len() {
        t.push(vec![
            curve.grid[i].into(),
            curve.exit_values[i].into(),
            curve.entropy_values[i].into(),
        ]);
    }
    t.meta("area", curve.area);
    t.meta("mutual_info_per_bit", curve.mutual_info_per_bit);
    t.meta("gap", (curve.area - curve.mutual_info_per_bit).abs());
    t.meta("transitive", curve.transitive);
    Ok(t)
}

fn need_usize(cfg: &ExperimentConfig, key: &str) -> Result<usize> {
    cfg.opt(key)?
        .ok_or_else(|| Error::Parameter(format!("command {} needs --{key}", cfg.command)))
}

fn looks(cfg: &ExperimentConfig) -> Result<Table> {
    let (m, s, tt) = (
        need_usize(cfg, "m")?,
        need_usize(cfg, "s")?,
        need_usize(cfg, "t")?,
    );
    let fam = multi_look_family(m, s, tt)?;
    let mut t = Table::new(&["look", "size", "dim", "coords"]);
    for (i, look) in fam.looks.iter().enumerate() {
        let coords: Vec<String> = look.iter().map(|c| c.to_string()).collect();
        t.push(vec![
            i.into(),
            look.len().into(),
            fam.look_dim().into(),
            coords.join(" ").into(),
        ]);
    }
    t.meta(
        "pairwise_overlap",
        format!(
            "{}/{}",
            fam.pairwise_overlap.numer(),
            fam.pairwise_overlap.denom()
        ),
    );
    t.meta("common_intersection", fam.common_intersection().len());
    Ok(t)
}

fn spread(cfg: &ExperimentConfig) -> Result<Table> {
    let (s, tt) = (need_usize(cfg, "s")?, need_usize(cfg, "t")?);
    let fam = spread_family(s, tt)?;
    let mut t = Table::new(&["index", "basis"]);
    for (i, basis) in fam.subspaces.iter().enumerate() {
        let b: Vec<String> = basis.iter().map(|v| format!("{v:#x}")).collect();
        t.push(vec![i.into(), b.join(" ").into()]);
    }
    t.meta("count", fam.count);
    t.meta("field_degree", fam.field_degree);
    Ok(t)
}

fn transfer(cfg: &ExperimentConfig) -> Result<Table> {
    let p = *cfg
        .p
        .first()
        .ok_or_else(|| Error::Parameter("transfer needs --p".into()))?;
    let mut t = Table::new(&[
        "n",
        "d",
        "p",
        "theta",
        "kappa",
        "alpha",
        "block_tail",
        "width",
        "p_low",
        "bms_capacity_threshold",
        "bms_block_bound",
        "bms_block_bound_simplified",
        "stated_block_bound",
    ]);
    let (n, d, theta) = match &cfg.code {
        Some(_) => {
            let code = cfg.code()?;
            let d = min_distance(&code)? as f64;
            let theta = match cfg.opt::<f64>("theta")? {
                Some(th) => th,
                None => {
                    let tol = cfg.opt("tol")?.unwrap_or(1e-3);
                    let est = estimate_theta(&code, cfg.samples, cfg.seed, cfg.workers, tol)?;
                    t.meta("theta_block_error", est.block_error);
                    t.meta("theta_std_error", est.std_error);
                    t.meta("theta_probes", est.probes);
                    est.theta
                }
            };
            (code.length() as f64, d, theta)
        }
        None => (
            cfg.opt("n")?
                .ok_or_else(|| Error::Parameter("transfer needs --code or --n".into()))?,
            cfg.opt("d")?
                .ok_or_else(|| Error::Parameter("transfer needs --d".into()))?,
            cfg.opt("theta")?
                .ok_or_else(|| Error::Parameter("transfer needs --theta".into()))?,
        ),
    };
    let params = TransferParams::new(n, d, p, theta)?;
    let delta = cfg.opt("delta")?.unwrap_or(1.0 / (n * n));
    let rep = bounds::bsc_to_bms_transfer(&params, delta)?;
    t.push(vec![
        n.into(),
        d.into(),
        p.into(),
        theta.into(),
        params.kappa.into(),
        rep.alpha.into(),
        rep.block_tail.into(),
        rep.width.into(),
        rep.p_low.into(),
        rep.bms_capacity_threshold.into(),
        rep.bms_block_bound.into(),
        rep.bms_block_bound_simplified.into(),
        rep.stated_block_bound.into(),
    ]);
    t.meta("delta", delta);
    Ok(t)
}

fn verify(cfg: &ExperimentConfig) -> Result<Table> {
    let ids: Vec<usize> = match cfg.get("criteria") {
        None | Some("all") => (1..=crate::verify::CRITERIA).collect(),
        Some(list) => list
            .split(',')
            .map(|s| parse_num::<usize>("criteria", s))
            .collect::<Result<_>>()?,
    };
    let mut t = Table::new(&["id", "name", "pass", "detail"]);
    let mut all = true;
    for id in ids {
        let r = crate::verify::run_criterion(id)?;
        all &= r.pass;
        t.push(vec![
            r.id.into(),
            r.name.into(),
            r.pass.into(),
            r.detail.into(),
        ]);
    }
    t.meta("all_pass", all);
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format() {
        assert_eq!(format_float(0.25), "0.25");
        assert_eq!(format_float(0.1), "0.10000000000000001");
        assert_eq!(format_float(1.0), "1");
        assert_eq!(format_float(1e-7), "9.9999999999999995e-08");
        assert_eq!(format_float(123456.0), "123456");
        assert_eq!(format_float(1e20), "1e+20");
        assert_eq!(format_float(-2.5), "-2.5");
    }

    #[test]
    fn config_parse_errors_carry_lines() {
        let err = ExperimentConfig::parse("command = metrics\n\ncode = rm 1 3\nchannel = bsc x\n")
            .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
        assert!(err.to_string().contains("crossover probability"), "{err}");
        let err = ExperimentConfig::parse("command = metrics\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = ExperimentConfig::parse("command = metrics\nseed 3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let cfg = ExperimentConfig::parse(
            "# comment\ncommand = metrics\ncode = rep 3\nchannel = bec\np = 0.1, 0.2\n",
        )
        .unwrap();
        assert_eq!(cfg.channels().unwrap().len(), 2);
        assert_eq!(cfg.code, Some(CodeSpec::Repetition(3)));
    }

    #[test]
    fn simpson_exact_on_cubics() {
        let xs: Vec<f64> = (0..11).map(|i| i as f64 / 10.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * x * x - x).collect();
        assert!((simpson(&ys, 0.0, 1.0).unwrap() - (-0.25)).abs() < 1e-14);
        assert!(simpson(&ys[..10], 0.0, 1.0).is_err());
    }

    #[test]
    fn exit_closed_forms() {
        let noiseless = ChannelModel::bec(0.0).unwrap();
        for n in 2..=5 {
            let rep = repetition(n).unwrap();
            let curve = exit_curve(&rep, &noiseless, 21).unwrap();
            for (t, h) in curve.grid.iter().zip(&curve.entropy_values) {
                assert!((h - t.powi(n as i32 - 1)).abs() < 1e-12);
            }
            assert!((curve.mutual_info_per_bit - 1.0 / n as f64).abs() < 1e-12);
            let spc = single_parity_check(n).unwrap();
            let curve = exit_curve(&spc, &noiseless, 201).unwrap();
            assert!((curve.area - (n as f64 - 1.0) / n as f64).abs() < 1e-6);
            assert!(curve.transitive);
        }
    }

    #[test]
    fn repetition_block_error_midpoint() {
        assert!((repetition_block_error(15, 0.5) - 0.5).abs() < 1e-15);
        assert!(repetition_block_error(15, 0.4) < 0.5);
        assert!((repetition_block_error(3, 0.1) - 0.028).abs() < 1e-15);
    }

    #[test]
    fn two_look_small() {
        for (_, pl, ps, _, b, pass) in two_look_rows(1, 2, &default_p_grid()).unwrap() {
            assert!(pass, "{pl} {ps} {b}");
        }
    }
}
