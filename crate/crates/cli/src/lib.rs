//! Command-line front end: reads a map document, runs one analysis and
//! writes a text report, CSV point clouds and a `run.json` record.

mod commands;
mod csv;
mod record;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;

use blochcomp::document::{parse_spec, MapSpecDocument};
use blochcomp::{Alpha, Budget, Error};
use clap::{Parser, Subcommand};

pub use record::RunRecord;

/// Exit code for a run whose verdicts are definite.
pub const EXIT_DEFINITE: i32 = 0;
/// Exit code for malformed input, non-self-maps and unbounded operators.
pub const EXIT_INPUT: i32 = 1;
/// Exit code when every verdict is inconclusive.
pub const EXIT_INCONCLUSIVE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "blochcomp", version, about = "Composition operators on harmonic alpha-Bloch spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Boundedness and compactness verdicts for C_phi.
    Classify,
    /// CSV of tau on dyadic circles.
    TauProfile,
    /// Level set Omega_c and its image as CSV point clouds.
    Omega,
    /// Closed-range diagnostics over a grid of c values.
    ClosedRange,
    /// Seminorm and norm of the harmonic function in the document.
    Seminorm,
    /// Whether phi(Omega_c) is an r-net for the probe lattice.
    NetCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::TauProfile => "tau-profile",
            Command::Omega => "omega",
            Command::ClosedRange => "closed-range",
            Command::Seminorm => "seminorm",
            Command::NetCheck => "net-check",
        }
    }
}

#[derive(Debug, Clone, clap::Args)]
pub struct Options {
    /// Map document, or `-` for standard input.
    #[arg(long, global = true, value_name = "FILE")]
    pub spec: Option<PathBuf>,
    /// Overrides the document's alpha.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Level-set threshold(s); comma-separated for closed-range.
    #[arg(long = "c", global = true, value_delimiter = ',', value_name = "C")]
    pub c: Vec<f64>,
    /// Net radius.
    #[arg(long, global = true)]
    pub r: Option<f64>,
    /// Inner annulus radius (replaces the default sweep).
    #[arg(long, global = true)]
    pub r0: Option<f64>,
    /// Deepest refinement level.
    #[arg(long, global = true)]
    pub kmax: Option<usize>,
    /// Directory for CSV files and run.json.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Rays per circle for tau-profile.
    #[arg(long, global = true, default_value_t = 16)]
    pub rays: usize,
}

/// Failure of a run, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: e.to_string(),
        }
    }
}

pub(crate) fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

/// Everything a command needs after the document has been read.
pub(crate) struct Context<'a> {
    pub command: Command,
    pub opts: &'a Options,
    pub doc: MapSpecDocument,
    pub alpha: Alpha,
    pub budget: Budget,
    pub digest: String,
}

fn read_spec(path: &PathBuf, stdin: &mut dyn Read) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        stdin.read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
    }
}

fn prepare<'a>(cli: &'a Cli, stdin: &mut dyn Read) -> Result<Context<'a>, Failure> {
    let path = cli.opts.spec.as_ref().ok_or_else(|| usage("--spec is required"))?;
    let text = read_spec(path, stdin)?;
    let doc = parse_spec(&text)?;
    let alpha = match cli.opts.alpha {
        Some(a) => Alpha::new(a)?,
        None => doc.alpha,
    };
    let mut budget = doc.budget.clone();
    if let Some(k) = cli.opts.kmax {
        budget.k_max = k;
    }
    budget.validate()?;
    Ok(Context {
        command: cli.command,
        opts: &cli.opts,
        alpha,
        budget,
        digest: record::digest(&text),
        doc,
    })
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("BLOCHCOMP_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| usage(format!("BLOCHCOMP_THREADS must be a non-negative integer, got `{v}`")))?;
    // a second initialisation in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_INPUT;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_DEFINITE;
        }
    };
    let result = configure_threads()
        .and_then(|()| prepare(&cli, stdin))
        .and_then(|ctx| commands::dispatch(&ctx, out));
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
