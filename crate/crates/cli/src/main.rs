mod commands;
mod source;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Check, refute, simulate and synthesize almost-certain-termination
/// certificates for probabilistic transition systems.
#[derive(Parser, Debug)]
#[command(name = "actcert", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a p,d or ∇ certificate on a window `V ≤ H`.
    Check(CheckArgs),
    /// Certify non-termination with a bounded (sub-)martingale.
    Refute(RefuteArgs),
    /// Monte Carlo escape trials, optionally against the exact oracle.
    Simulate(SimulateArgs),
    /// Build variants and witnesses.
    #[command(subcommand)]
    Synthesize(SynthCommand),
    /// Scan the 2-D walk inequality for log or log log.
    ScanLgg(ScanArgs),
    /// The built-in gallery.
    #[command(subcommand)]
    Examples(ExamplesCommand),
}

#[derive(Args, Debug, Clone)]
pub struct SourceArgs {
    /// `.acts` system description.
    #[arg(required_unless_present = "example", conflicts_with = "example")]
    pub file: Option<PathBuf>,
    /// Use a gallery bundle instead of a file.
    #[arg(long, value_name = "NAME")]
    pub example: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct WindowArgs {
    /// Variant horizon H; defaults to the bundle's for `--example`.
    #[arg(long)]
    pub horizon: Option<String>,
    /// Maximum number of states enumerated.
    #[arg(long, default_value_t = 200_000)]
    pub budget: usize,
    /// Float tolerance; selects float mode.
    #[arg(long, conflicts_with = "exact")]
    pub tol: Option<f64>,
    /// Exact rational arithmetic.
    #[arg(long)]
    pub exact: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Rule {
    Pd,
    Nabla,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Which witness to check; by default the one the source declares.
    #[arg(long, value_enum)]
    pub rule: Option<Rule>,
    #[command(flatten)]
    pub window: WindowArgs,
    #[arg(long)]
    pub json: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RefuteModeArg {
    Martingale,
    Submartingale,
}

#[derive(Args, Debug)]
pub struct RefuteArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Claimed bound B on the variant; overrides the source's `bound`.
    #[arg(long)]
    pub bound: Option<String>,
    #[arg(long, value_enum, default_value = "submartingale")]
    pub mode: RefuteModeArg,
    #[command(flatten)]
    pub window: WindowArgs,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// A walk escapes once `V ≥ H`.
    #[arg(long)]
    pub horizon: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_steps: u64,
    /// `uniform`, `first`, or a comma-separated script of choice indices.
    #[arg(long, default_value = "uniform")]
    pub adversary: String,
    /// Start state as comma-separated coordinates; default the first initial state.
    #[arg(long, allow_hyphen_values = true)]
    pub from: Option<String>,
    /// Also solve the finite window exactly.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long, default_value_t = 200_000)]
    pub budget: usize,
    /// Write per-trial outcomes as CSV.
    #[arg(long, value_name = "PATH")]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Subcommand, Debug)]
pub enum SynthCommand {
    /// Blackwell tree variant `V(d) = Σ 1/(c₀⋯c_i)`.
    Tree {
        /// `pow2` for `2^(2^i)` children at depth i, or a constant count.
        #[arg(long, default_value = "pow2")]
        children: String,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        #[arg(long)]
        json: bool,
    },
    /// Exact martingale of a birth-death walk stepping down with probability q.
    BirthDeath {
        #[arg(long)]
        q: String,
        #[arg(long, default_value_t = 20)]
        max: usize,
        #[arg(long)]
        json: bool,
    },
    /// p,d witness induced by the source's ∇ witness.
    PdFromNabla {
        #[command(flatten)]
        source: SourceArgs,
        /// Largest variant value the witness must cover.
        #[arg(long)]
        hint: String,
    },
    /// Square-root-tail variant of the one-sided symmetric walk.
    Foster {
        #[arg(long, default_value_t = 50_000)]
        t_max: usize,
        #[arg(long, default_value_t = 50)]
        i_max: usize,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[arg(long = "max", default_value_t = 1000)]
    pub max_n: i64,
    #[arg(long, default_value = "loglog")]
    pub function: String,
    /// Cells whose squared radii reach down to this are skipped and listed.
    #[arg(long, default_value_t = 2)]
    pub radius: i64,
    #[arg(long, default_value_t = 2)]
    pub dims: usize,
    #[arg(long, default_value_t = 8)]
    pub chunk: usize,
    /// Write violations and marginal cells as CSV.
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Subcommand, Debug)]
pub enum ExamplesCommand {
    List {
        #[arg(long)]
        json: bool,
    },
    /// Print a bundle's `.acts` source.
    Emit { name: String },
}

/// 0 pass or refuted, 1 fail, 2 inconclusive or nothing to check, 3 usage.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    Fail,
    Inconclusive,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> ExitCode {
        ExitCode::from(match s {
            Status::Ok => 0,
            Status::Fail => 1,
            Status::Inconclusive => 2,
        })
    }
}

fn init_threads() -> anyhow::Result<()> {
    if let Ok(n) = std::env::var("ACTCERT_THREADS") {
        let n: usize = n.parse().map_err(|_| anyhow::anyhow!("ACTCERT_THREADS must be a positive integer, got {n:?}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match init_threads().and_then(|()| commands::run(cli.command)) {
        Ok(status) => status.into(),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
