//! `qwalk`: runs discrete-time quantum walk experiments and writes CSV/JSON
//! (and OpenQASM) into an output directory.
//!
//! Exit status: 0 on success, 2 on invalid input, 3 when a numerical
//! verification fails, 1 for anything else (I/O and the like).

mod angle;
mod commands;
mod init;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qwalk_core::coin::CoinSpec;
use qwalk_core::walk::{Variant, WalkOperator};

use angle::parse_angle;
use init::InitSpec;

/// Invalid user input discovered after argument parsing.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Outcome of a command that ran to completion.
#[derive(Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Parser, Debug)]
#[command(name = "qwalk", version, about = "Discrete-time quantum walks for Dirac and Majorana particles")]
struct Cli {
    /// Directory for output files.
    #[arg(long, global = true, env = "QWALK_OUT_DIR", default_value = "qwalk-out")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evolve an initial state and record the spacetime diagram and observables.
    Run(RunArgs),
    /// Tabulate walk eigenphases against the closed-form dispersion.
    Dispersion(DispersionArgs),
    /// Fit the local error order of each splitting against the exact step.
    Order(OrderArgs),
    /// Shift angle of the position expectation over initial coin states.
    Alpha(AlphaArgs),
    /// Coin-position entanglement entropy series.
    Entropy(EntropyArgs),
    /// Sweep <x> over the Bloch sphere of initial coin states.
    Bloch(BlochArgs),
    /// Compile to gates, verify, and export OpenQASM.
    Circuit(CircuitArgs),
    /// Randomized self-checks (norm, basis independence, reality, circuits).
    Check(CheckArgs),
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse::<Variant>().map_err(|e| e.to_string())
}

fn parse_window(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("window must look like 10:100, got '{s}'"))?;
    let a: usize = a.trim().parse().map_err(|_| format!("invalid window start '{a}'"))?;
    let b: usize = b.trim().parse().map_err(|_| format!("invalid window end '{b}'"))?;
    if a > b {
        return Err(format!("empty window {a}:{b}"));
    }
    Ok((a, b))
}

/// Walk operator selection shared by several commands.
#[derive(Args, Debug, Clone)]
pub struct OpArgs {
    /// Walk variant: sb, bs, bsb, sbs or sqw.
    #[arg(long, default_value = "sb", value_parser = parse_variant)]
    op: Variant,
    /// Coin angle theta (radians; `pi/2` style accepted).
    #[arg(long, default_value = "pi/2", value_parser = parse_angle, allow_hyphen_values = true)]
    theta: f64,
    /// Coin axis phi; pi/2 is the Weyl-Majorana basis, 0 the Weyl-Dirac basis.
    #[arg(long, default_value = "pi/2", value_parser = parse_angle, allow_hyphen_values = true)]
    phi: f64,
    /// First coin angle of the sqw variant (0 reproduces sbs).
    #[arg(long, default_value = "0", value_parser = parse_angle, allow_hyphen_values = true)]
    theta1: f64,
}

impl OpArgs {
    pub fn operator(&self) -> anyhow::Result<WalkOperator> {
        let c = CoinSpec::new(self.theta, self.phi)?;
        Ok(match self.op {
            Variant::Sqw => WalkOperator::sqw(CoinSpec::new(self.theta1, self.phi)?, c),
            v => WalkOperator::new(v, c),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ObserveItem {
    All,
    Distribution,
    Chirality,
    Entropy,
    MeanX,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    op: OpArgs,
    /// Number of walk steps T.
    #[arg(long, default_value_t = 10)]
    steps: usize,
    /// Position qubits k (N = 2^k sites); defaults to 7, or the state file's k.
    #[arg(long)]
    qubits: Option<u32>,
    /// Initial state: `theta0=..,phi0=..[,x0=..]`, `uniform[,theta0=..,phi0=..]`,
    /// `majorana-plane,delta=..`, `dirac-plane,sign=+1|-1`,
    /// `profile=FILE[,theta0=..,phi0=..]` or `state=FILE`.
    #[arg(long, default_value = "theta0=pi/2,phi0=0", value_parser = InitSpec::parse)]
    init: InitSpec,
    /// Observables to record.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "all")]
    observe: Vec<ObserveItem>,
}

#[derive(Args, Debug)]
pub struct DispersionArgs {
    #[arg(long, default_value = "pi/2", value_parser = parse_angle, allow_hyphen_values = true)]
    theta: f64,
    #[arg(long, default_value = "pi/2", value_parser = parse_angle, allow_hyphen_values = true)]
    phi: f64,
    /// Variants to tabulate.
    #[arg(long, default_value = "sb,bs,bsb,sbs", value_parser = parse_variant, value_delimiter = ',')]
    ops: Vec<Variant>,
    /// Number of momenta in (-pi, pi].
    #[arg(long, default_value_t = 64)]
    points: usize,
}

#[derive(Args, Debug)]
pub struct OrderArgs {
    #[arg(long, default_value = "sb,bs,bsb,sbs", value_parser = parse_variant, value_delimiter = ',')]
    ops: Vec<Variant>,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    kappa: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    m: f64,
    #[arg(long, default_value = "pi/2", value_parser = parse_angle, allow_hyphen_values = true)]
    phi: f64,
    /// Step sizes epsilon.
    #[arg(long, default_value = "0.1,0.05,0.02,0.01,0.005,0.002", value_delimiter = ',')]
    eps: Vec<f64>,
}

#[derive(Args, Debug)]
pub struct AlphaArgs {
    #[arg(long, default_value = "sb,bsb,sbs", value_parser = parse_variant, value_delimiter = ',')]
    ops: Vec<Variant>,
    /// Explicit theta values; overrides --points.
    #[arg(long, value_parser = parse_angle, value_delimiter = ',', allow_hyphen_values = true)]
    thetas: Option<Vec<f64>>,
    /// Grid theta = pi j / points for j = 0..points.
    #[arg(long, default_value_t = 16)]
    points: usize,
    #[arg(long, default_value = "pi/2", value_parser = parse_angle, allow_hyphen_values = true)]
    phi: f64,
    /// Step counts T.
    #[arg(long, default_value = "1,7", value_delimiter = ',')]
    steps: Vec<usize>,
    #[arg(long, default_value_t = 7)]
    qubits: u32,
}

#[derive(Args, Debug)]
pub struct EntropyArgs {
    #[arg(long, default_value = "sb,bsb,sbs", value_parser = parse_variant, value_delimiter = ',')]
    ops: Vec<Variant>,
    #[arg(long, default_value = "pi/2", value_parser = parse_angle, allow_hyphen_values = true)]
    theta: f64,
    #[arg(long, default_value = "pi/2", value_parser = parse_angle, allow_hyphen_values = true)]
    phi: f64,
    #[arg(long, default_value = "pi/2", value_parser = parse_angle, allow_hyphen_values = true)]
    theta0: f64,
    /// Initial coin phases, one series each.
    #[arg(long, default_value = "0,pi/4,pi/2", value_parser = parse_angle, value_delimiter = ',', allow_hyphen_values = true)]
    phi0s: Vec<f64>,
    #[arg(long, default_value_t = 8)]
    qubits: u32,
    #[arg(long, default_value_t = 100)]
    steps: usize,
    /// Summary window `start:end` (inclusive).
    #[arg(long, default_value = "10:100", value_parser = parse_window)]
    window: (usize, usize),
}

#[derive(Args, Debug)]
pub struct BlochArgs {
    #[command(flatten)]
    op: OpArgs,
    #[arg(long, default_value_t = 7)]
    steps: usize,
    #[arg(long, default_value_t = 5)]
    qubits: u32,
    /// Grid points per Bloch angle.
    #[arg(long, default_value_t = 16)]
    resolution: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VerifyMode {
    /// Dense check when k <= 3.
    Auto,
    /// Dense check for any k <= 6.
    Always,
    Never,
}

#[derive(Args, Debug)]
pub struct CircuitArgs {
    #[command(flatten)]
    op: OpArgs,
    #[arg(long, default_value_t = 4)]
    qubits: u32,
    #[arg(long, default_value_t = 7)]
    steps: usize,
    /// Prepared state: `theta0=..,phi0=..` at the origin or `uniform,theta0=..,phi0=..`.
    #[arg(long, default_value = "theta0=pi/2,phi0=0", value_parser = InitSpec::parse)]
    init: InitSpec,
    #[arg(long, value_enum, default_value = "auto")]
    verify: VerifyMode,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Random states per check.
    #[arg(long, default_value_t = 10)]
    samples: usize,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<qwalk_core::Error>() {
        Some(qwalk_core::Error::Verification(_)) => 3,
        Some(_) => 2,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.out_dir;
    let result = match &cli.command {
        Command::Run(a) => commands::run(a, &out),
        Command::Dispersion(a) => commands::dispersion(a, &out),
        Command::Order(a) => commands::order(a, &out),
        Command::Alpha(a) => commands::alpha(a, &out),
        Command::Entropy(a) => commands::entropy(a, &out),
        Command::Bloch(a) => commands::bloch(a, &out),
        Command::Circuit(a) => commands::circuit(a, &out),
        Command::Check(a) => commands::check(a, &out),
    };
    match result {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
