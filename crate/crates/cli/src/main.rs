use clap::{Args, Parser, Subcommand};
use rmnest_core::harness::{run_command, Cell, ExperimentConfig};
use rmnest_core::{Error, Result};
use std::path::PathBuf;
use std::process::ExitCode;

/// Reed-Muller nesting experiments: code facts, extrinsic metrics, bound
/// tables and traces, Fourier analysis, EXIT curves and the acceptance suite.
#[derive(Parser)]
#[command(name = "rmnest", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Length, dimension, rate and minimum distance of a code.
    RmInfo(Flags),
    /// Extrinsic metrics (pe, pb, mmse, ber, H) of one target bit.
    Metrics(Flags),
    /// Bound tables: --table rate|floor|two-look|alpha.
    BoundTable(Flags),
    /// Stage-by-stage trace of a theorem bound.
    BoundTrace(Flags),
    /// Level profile and level-k checks of a code's BEC failure indicator.
    FourierAnalyze(Flags),
    /// EXIT curve and both sides of the area identity.
    ExitCurve(Flags),
    /// Coordinate sets of a multi-look family.
    Looks(Flags),
    /// Subspaces of a spread family.
    Spread(Flags),
    /// BSC-to-BMS transfer quantities, estimating θ when not given.
    Transfer(Flags),
    /// Runs acceptance criteria (--criteria 1,2,... or all).
    Verify(Flags),
    /// Runs a key = value config file.
    Run { config: PathBuf },
}

#[derive(Args, Default)]
struct Flags {
    /// `rm R M`, `rep N`, `spc N` or `file PATH`.
    #[arg(long)]
    code: Option<String>,
    /// `bec P`, `bsc P`, `bms z:q,...`, or a bare kind with --p.
    #[arg(long)]
    channel: Option<String>,
    /// Comma-separated channel parameters.
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    target: Option<String>,
    /// exact or mc.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    workers: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    table: Option<String>,
    #[arg(long)]
    theorem: Option<String>,
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    s: Option<String>,
    #[arg(long)]
    t: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    eta: Option<String>,
    #[arg(long = "grid_points")]
    grid_points: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    criteria: Option<String>,
}

impl Flags {
    fn pairs(self, command: &str) -> Vec<(Option<usize>, String, String)> {
        let fields = [
            ("code", self.code),
            ("channel", self.channel),
            ("p", self.p),
            ("target", self.target),
            ("mode", self.mode),
            ("samples", self.samples),
            ("seed", self.seed),
            ("workers", self.workers),
            ("out", self.out),
            ("format", self.format),
            ("table", self.table),
            ("theorem", self.theorem),
            ("r", self.r),
            ("m", self.m),
            ("s", self.s),
            ("t", self.t),
            ("k", self.k),
            ("delta", self.delta),
            ("eta", self.eta),
            ("grid_points", self.grid_points),
            ("n", self.n),
            ("d", self.d),
            ("theta", self.theta),
            ("tol", self.tol),
            ("criteria", self.criteria),
        ];
        let mut out = vec![(None, "command".to_string(), command.to_string())];
        out.extend(
            fields
                .into_iter()
                .filter_map(|(k, v)| v.map(|v| (None, k.to_string(), v))),
        );
        out
    }
}

fn config(cmd: Cmd) -> Result<ExperimentConfig> {
    let (name, flags) = match cmd {
        Cmd::Run { config } => return ExperimentConfig::load(&config),
        Cmd::RmInfo(f) => ("rm-info", f),
        Cmd::Metrics(f) => ("metrics", f),
        Cmd::BoundTable(f) => ("bound-table", f),
        Cmd::BoundTrace(f) => ("bound-trace", f),
        Cmd::FourierAnalyze(f) => ("fourier-analyze", f),
        Cmd::ExitCurve(f) => ("exit-curve", f),
        Cmd::Looks(f) => ("looks", f),
        Cmd::Spread(f) => ("spread", f),
        Cmd::Transfer(f) => ("transfer", f),
        Cmd::Verify(f) => ("verify", f),
    };
    ExperimentConfig::from_pairs(flags.pairs(name))
}

fn run(cmd: Cmd) -> Result<bool> {
    let cfg = config(cmd)?;
    let table = run_command(&cfg)?;
    let text = table.render(&cfg);
    match &cfg.out {
        Some(path) => std::fs::write(path, &text).map_err(Error::from)?,
        None => print!("{text}"),
    }
    Ok(!matches!(
        table.meta_value("all_pass"),
        Some(Cell::Bool(false))
    ))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("rmnest: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
