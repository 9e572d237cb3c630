//! `chromaforge` command-line front end.
//!
//! Exit codes: 0 success, 2 bad arguments or configuration, 3 I/O, 4
//! processing failure. Failures print one `ERROR <code>: <message>` line on
//! stderr.

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;

pub use config::PipelineConfig;

/// Environment variable capping worker threads; 0 means one per core.
pub const THREADS_ENV: &str = "CHROMAFORGE_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_PROCESSING: i32 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ERROR {}: {}", self.code, self.message)
    }
}

impl From<chromaforge::Error> for Failure {
    fn from(e: chromaforge::Error) -> Self {
        use chromaforge::Error as E;
        let code = match &e {
            E::InvalidParam(_) | E::Config(_) => EXIT_USAGE,
            e if e.is_io() => EXIT_IO,
            _ => EXIT_PROCESSING,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T = ()> = Result<T, Failure>;

#[derive(Debug, Parser)]
#[command(name = "chromaforge", version, about = "Synthetic detection datasets from green-screen captures")]
pub struct Cli {
    /// Worker threads (0 = one per core); overrides CHROMAFORGE_THREADS.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Equalize one PNG with automatic color equalization.
    Ace(AceArgs),
    /// Key out the green backdrop of one frame.
    Segment(SegmentArgs),
    /// Turn a capture tree into matted RGBA crops.
    Ingest(IngestArgs),
    /// Build a darknet dataset from a pipeline config.
    Generate(GenerateArgs),
    /// Summarize an emitted darknet tree.
    Stats(StatsArgs),
    /// Run the preference-learning model over an interaction schedule.
    Amygdala(AmygdalaArgs),
}

#[derive(Debug, Clone, Args)]
pub struct AceFlags {
    /// Contrast slope of the saturating difference function.
    #[arg(long, default_value_t = 10.0)]
    pub slope: f64,
    /// Sampled comparison pixels per pixel (0 = exhaustive).
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
    /// Seed of the sampled comparison sets.
    #[arg(long = "seed", default_value_t = 0)]
    pub ace_seed: u64,
    /// Output level of a channel with no spread.
    #[arg(long, default_value_t = 128)]
    pub degenerate: u8,
}

#[derive(Debug, Clone, Args)]
pub struct KeyFlags {
    #[arg(long, default_value_t = 64)]
    pub hue_min: u8,
    #[arg(long, default_value_t = 106)]
    pub hue_max: u8,
    #[arg(long, default_value_t = 77)]
    pub sat_min: u8,
    #[arg(long, default_value_t = 38)]
    pub val_min: u8,
    #[arg(long, default_value_t = 1)]
    pub open_radius: u32,
    #[arg(long, default_value_t = 2)]
    pub close_radius: u32,
    /// Keep green spill on the object.
    #[arg(long)]
    pub no_despill: bool,
}

#[derive(Debug, Args)]
pub struct AceArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    #[command(flatten)]
    pub ace: AceFlags,
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    pub input: PathBuf,
    /// Where to write the 0/255 foreground mask.
    pub mask: PathBuf,
    /// Also write the tight RGBA cutout here.
    #[arg(long)]
    pub cutout: Option<PathBuf>,
    /// Take cutout colors from the equalized frame.
    #[arg(long)]
    pub ace: bool,
    #[command(flatten)]
    pub key: KeyFlags,
    #[command(flatten)]
    pub ace_flags: AceFlags,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Capture root: <class>/<high|low>/<frame>.png
    pub captures: PathBuf,
    /// Class manifest, one `id<TAB>name` per line.
    #[arg(long)]
    pub classes: PathBuf,
    /// Empty or missing directory for the crops and report.json.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub views: usize,
    #[command(flatten)]
    pub key: KeyFlags,
    #[command(flatten)]
    pub ace: AceFlags,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    pub config: PathBuf,
    /// Replaces the config's output root.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Replaces the generation seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Replaces the round count.
    #[arg(long)]
    pub rounds: Option<u32>,
    /// Replace an existing dataset tree at the output root.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    pub root: PathBuf,
    /// Classes with fewer boxes than this fraction of the per-class mean are flagged.
    #[arg(long, default_value_t = 0.5)]
    pub balance_threshold: f64,
    /// Print JSON instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct AmygdalaArgs {
    /// Schedule JSON: {"objects": [...], "steps": [{"face", "place", "hour", "object"}]}
    #[arg(required_unless_present = "two_situation", conflicts_with = "two_situation")]
    pub schedule: Option<PathBuf>,
    /// Five orders of object A in situation A, then five of object B in situation B.
    #[arg(long)]
    pub two_situation: bool,
    /// Trajectory CSV.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 8)]
    pub rows: usize,
    #[arg(long, default_value_t = 8)]
    pub cols: usize,
    #[arg(long, default_value_t = 0.5)]
    pub lr: f64,
    /// Face embedding length for --two-situation.
    #[arg(long, default_value_t = 8)]
    pub face_dim: usize,
    /// Save the trained model here.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Start from a saved model instead of a fresh one.
    #[arg(long)]
    pub resume: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    EXIT_OK
                }
                _ => {
                    let text = e.to_string();
                    let first = text.lines().next().unwrap_or("invalid arguments");
                    eprintln!("ERROR {EXIT_USAGE}: {}", first.trim_start_matches("error: "));
                    eprint!("{}", text.lines().skip(1).map(|l| format!("{l}\n")).collect::<String>());
                    EXIT_USAGE
                }
            };
        }
    };
    let level = if cli.verbose { "info" } else { "warn" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .is_test(false)
        .try_init();

    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("{f}");
            f.code
        }
    }
}

fn execute(cli: Cli) -> CliResult {
    let threads = thread_count(cli.threads)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure {
            code: EXIT_PROCESSING,
            message: format!("cannot start worker threads: {e}"),
        })?;
    pool.install(|| match cli.command {
        Command::Ace(a) => commands::ace(a),
        Command::Segment(a) => commands::segment(a),
        Command::Ingest(a) => commands::ingest(a),
        Command::Generate(a) => commands::generate(a),
        Command::Stats(a) => commands::stats(a),
        Command::Amygdala(a) => commands::amygdala(a),
    })
}

/// `--threads` wins over the environment; 0 or unset means automatic.
fn thread_count(flag: Option<usize>) -> CliResult<usize> {
    if let Some(n) = flag {
        return Ok(n);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map_err(|_| Failure::usage(format!("{THREADS_ENV} must be a non-negative integer, got {v:?}"))),
        _ => Ok(0),
    }
}
