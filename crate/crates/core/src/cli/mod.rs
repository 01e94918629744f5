//! Front end of the `circsim` binary.
//!
//! Exit codes: 0 success, 2 configuration or input error, 3 solver error,
//! 4 I/O error. Setting `CIRCSIM_THREADS` caps the sweep thread pool.

pub mod commands;
pub mod config;
pub mod format;

use std::ffi::OsString;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use commands::Model;
use config::{parse_quantity, Quantity, ScenarioConfig, SweepSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_IO: i32 = 4;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::UnknownParam { .. } | Error::InvalidParameter(_) | Error::Parse { .. } => {
            EXIT_CONFIG
        }
        Error::Io(_) => EXIT_IO,
        Error::AtFrequency { source, .. } => exit_code(source),
        _ => EXIT_SOLVER,
    }
}

#[derive(Debug, Parser)]
#[command(name = "circsim", version, about = "Harmonic-domain simulation of switched-filter circulators")]
pub struct Cli {
    /// Scenario file; defaults reproduce the canonical differential circulator.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Harmonic truncation, overriding `[solver] n_max`.
    #[arg(long, global = true)]
    pub n_max: Option<usize>,
    /// Fail when doubling the truncation moves any fundamental |S| by more than the tolerance.
    #[arg(long, global = true)]
    pub strict: bool,
    #[arg(long, global = true, value_enum, default_value_t = ModelArg::Solver)]
    pub model: ModelArg,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    ClosedForm,
    Solver,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fundamental S-parameters over a frequency sweep (CSV).
    Sparams {
        #[arg(long)]
        start: Option<String>,
        #[arg(long)]
        stop: Option<String>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Output sideband spectrum for a single tone (CSV).
    Spectrum {
        /// Tone frequency; defaults to the filter center.
        #[arg(long)]
        tone: Option<String>,
        #[arg(long, default_value_t = 1)]
        in_port: usize,
        #[arg(long, default_value_t = 2)]
        out_port: usize,
    },
    /// IL, isolation, return loss, isolation bandwidth and IMP summary.
    Metrics,
    /// Metrics as one parameter varies (CSV).
    Sweep {
        /// One of phase_error_deg, duty, ron_ohm, roff_ohm, fm_hz.
        #[arg(long)]
        param: String,
        /// Comma-separated values, e.g. `0,1,2,5,10` or `1kohm,10kohm`.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        /// Emit only this metrics column.
        #[arg(long)]
        metric: Option<String>,
    },
    /// Summary of a two-port Touchstone file.
    Touchstone {
        path: PathBuf,
        #[arg(long)]
        band_start: Option<String>,
        #[arg(long)]
        band_stop: Option<String>,
    },
}

fn frequency(key: &str, text: &str) -> Result<f64> {
    parse_quantity(text, Quantity::Frequency)
        .ok_or_else(|| Error::config(key, format!("cannot read `{text}` as a frequency")))
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("CIRCSIM_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| Error::config("CIRCSIM_THREADS", format!("expected a positive integer, got `{v}`")))?;
    if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
        log::debug!("thread pool already initialized");
    }
    Ok(())
}

/// Executes a parsed command line and returns the text to emit.
pub fn execute(cli: &Cli) -> Result<String> {
    configure_threads()?;
    let mut cfg = match &cli.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(n) = cli.n_max {
        if n == 0 {
            return Err(Error::config("--n-max", "must be >= 1"));
        }
        cfg.n_max = n;
    }
    cfg.strict |= cli.strict;
    let model = match cli.model {
        ModelArg::ClosedForm => Model::ClosedForm,
        ModelArg::Solver => Model::Solver,
    };
    if model == Model::ClosedForm && !matches!(cli.command, Command::Spectrum { .. }) {
        return Err(Error::config("--model", "closed-form is only available for `spectrum`"));
    }

    match &cli.command {
        Command::Sparams { start, stop, points } => {
            if start.is_some() || stop.is_some() || points.is_some() {
                let (s0, s1, p0) = match cfg.sweep {
                    SweepSpec::Range { start_hz, stop_hz, points } => (start_hz, stop_hz, points),
                    SweepSpec::List(ref v) => (v[0], v[v.len() - 1], v.len()),
                };
                cfg.sweep = SweepSpec::Range {
                    start_hz: start.as_deref().map(|s| frequency("--start", s)).transpose()?.unwrap_or(s0),
                    stop_hz: stop.as_deref().map(|s| frequency("--stop", s)).transpose()?.unwrap_or(s1),
                    points: points.unwrap_or(p0),
                };
                cfg.validate()?;
            }
            commands::cmd_sparams(&cfg, &cfg.sweep.frequencies())
        }
        Command::Spectrum { tone, in_port, out_port } => {
            let tone = match tone {
                Some(t) => frequency("--tone", t)?,
                None => cfg.filter_model()?.center_hz(),
            };
            commands::cmd_spectrum(&cfg, tone, *in_port, *out_port, model)
        }
        Command::Metrics => {
            let r = commands::cmd_metrics(&cfg)?;
            let csv = format::report_csv(&r);
            if cli.out.is_some() {
                print!("{}", format::report_table(&r));
                Ok(csv)
            } else {
                Ok(format!("{}\n{csv}", format::report_table(&r)))
            }
        }
        Command::Sweep { param, values, metric } => {
            let values = commands::parse_sweep_values(param, values)?;
            commands::cmd_sweep_param(&cfg, param, &values, metric.as_deref())
        }
        Command::Touchstone { path, band_start, band_stop } => {
            let band = match (band_start, band_stop) {
                (Some(a), Some(b)) => Some((frequency("--band-start", a)?, frequency("--band-stop", b)?)),
                (None, None) => None,
                _ => return Err(Error::config("--band-start", "give both --band-start and --band-stop")),
            };
            commands::cmd_touchstone_info(path, band)
        }
    }
}

/// Parses `args` (including the program name), runs the command, writes its
/// output and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = execute(&cli).and_then(|text| match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(Error::from)
        }
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
