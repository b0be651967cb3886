//! `rotoblur` command line.
//!
//! Exit codes: 0 success, 1 domain error (bad file contents), 2 usage error
//! (bad flags, missing input files). Diagnostics go to stderr; data goes to
//! `--out` or stdout.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analytics::io as study_io;
use crate::analytics::ssq::{prescreen, PRESCREEN_CUTOFF};
use crate::analytics::{analyze, AnalyticsError};
use crate::blur::{self, ImageBuffer, DEFAULT_TRUNCATION};
use crate::config;
use crate::controller::ControllerConfig;
use crate::image_io;
use crate::trace;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "rotoblur", version, about = "Rotation-blur comfort toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Replay an input trace through the blur controller and write the sigma series.
    Replay {
        #[arg(long)]
        trace: PathBuf,
        /// Controller config (TOML); falls back to $ROTOBLUR_CONFIG, then defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply a uniform Gaussian blur to a binary PGM/PPM image.
    Blur {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_parser = parse_sigma)]
        sigma: f64,
        #[arg(long, default_value_t = DEFAULT_TRUNCATION, value_parser = parse_truncation)]
        truncation: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print Gaussian kernel weights, one per line.
    Kernel {
        #[arg(long, value_parser = parse_sigma)]
        sigma: f64,
        #[arg(long, default_value_t = DEFAULT_TRUNCATION, value_parser = parse_truncation)]
        truncation: f64,
        /// Also check the separable blur against the direct 2D convolution.
        #[arg(long)]
        verify: bool,
    },
    /// Simulator Sickness Questionnaire scoring and pre-screening.
    Ssq {
        #[command(subcommand)]
        command: SsqCommand,
    },
    /// Summaries, ΔTS partition, signed-rank test and rating curves for a study.
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Subcommand)]
enum SsqCommand {
    /// Score every response row.
    Score {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Accept or reject each response by total sickness.
    Prescreen {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = PRESCREEN_CUTOFF, value_parser = parse_sigma)]
        cutoff: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long)]
    fms: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_sigma(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !v.is_finite() || v < 0.0 {
        return Err(format!("`{s}` must be a finite non-negative number"));
    }
    Ok(v)
}

fn parse_truncation(s: &str) -> Result<f64, String> {
    let v = parse_sigma(s)?;
    if v == 0.0 {
        return Err("truncation must be positive".into());
    }
    Ok(v)
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Domain(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Domain(_) => EXIT_DOMAIN,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Domain(m) => m,
        }
    }
}

type CliResult = Result<(), CliError>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{rendered}")
            } else {
                write!(stdout, "{rendered}")
            };
            return code;
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message());
            e.code()
        }
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult {
    match command {
        Command::Replay { trace, config, out } => {
            replay_cmd(&trace, config.as_deref(), out.as_deref(), stdout)
        }
        Command::Blur {
            input,
            sigma,
            truncation,
            out,
        } => blur_image_cmd(&input, sigma, truncation, &out),
        Command::Kernel {
            sigma,
            truncation,
            verify,
        } => kernel_cmd(sigma, truncation, verify, stdout, stderr),
        Command::Ssq { command } => match command {
            SsqCommand::Score { input, out } => ssq_score_cmd(&input, out.as_deref(), stdout),
            SsqCommand::Prescreen { input, cutoff, out } => {
                ssq_prescreen_cmd(&input, cutoff, out.as_deref(), stdout)
            }
        },
        Command::Analyze(args) => analyze_cmd(&args, stdout),
    }
}

fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    if !path.is_file() {
        return Err(CliError::Usage(format!("{}: no such file", path.display())));
    }
    fs::read(path).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    let bytes = read_input(path)?;
    String::from_utf8(bytes)
        .map_err(|_| CliError::Domain(format!("{}: not valid UTF-8", path.display())))
}

fn emit(out: Option<&Path>, data: &[u8], stdout: &mut dyn Write) -> CliResult {
    match out {
        Some(path) => {
            fs::write(path, data).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))
        }
        None => stdout
            .write_all(data)
            .map_err(|e| CliError::Domain(format!("stdout: {e}"))),
    }
}

fn in_file(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Domain(format!("{}: {e}", path.display()))
}

fn replay_cmd(
    trace_path: &Path,
    config_path: Option<&Path>,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> CliResult {
    let config = match config::resolve_config_path(config_path) {
        Some(path) => {
            if !path.is_file() {
                return Err(CliError::Usage(format!("{}: no such file", path.display())));
            }
            config::load_config(&path).map_err(|e| CliError::Domain(e.to_string()))?
        }
        None => ControllerConfig::default(),
    };
    let text = read_text(trace_path)?;
    let parsed = trace::parse_trace(&text).map_err(|e| in_file(trace_path, e))?;
    let series = trace::replay(&parsed, &config).map_err(|e| in_file(trace_path, e))?;
    emit(out, trace::write_sigma_series(&series).as_bytes(), stdout)
}

fn blur_image_cmd(input: &Path, sigma: f64, truncation: f64, out: &Path) -> CliResult {
    let bytes = read_input(input)?;
    let img = image_io::decode(&bytes).map_err(|e| in_file(input, e))?;
    let kernel =
        blur::make_kernel(sigma, truncation).map_err(|e| CliError::Usage(e.to_string()))?;
    let blurred = blur::blur(&img, &kernel).map_err(|e| in_file(input, e))?;
    fs::write(out, image_io::encode(&blurred)).map_err(|e| in_file(out, e))
}

fn kernel_cmd(
    sigma: f64,
    truncation: f64,
    verify: bool,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CliResult {
    let kernel =
        blur::make_kernel(sigma, truncation).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut text = String::new();
    for w in kernel.weights() {
        text.push_str(&format!("{w}\n"));
    }
    emit(None, text.as_bytes(), stdout)?;

    if verify {
        let img = verification_image(32, 32);
        let separable = blur::blur(&img, &kernel).map_err(|e| CliError::Domain(e.to_string()))?;
        let direct = blur::blur_reference_2d(&img, sigma, truncation)
            .map_err(|e| CliError::Domain(e.to_string()))?;
        let rms = blur::rms_difference(&separable, &direct).unwrap_or(f64::INFINITY);
        let _ = writeln!(stderr, "verify: separable vs direct 2D rms = {rms:e}");
        if rms > 1e-6 {
            return Err(CliError::Domain(format!(
                "separable blur deviates from 2D reference (rms {rms:e})"
            )));
        }
    }
    Ok(())
}

/// Deterministic textured test card.
fn verification_image(width: usize, height: usize) -> ImageBuffer {
    let mut state: u32 = 0x9e37_79b9;
    let data = (0..width * height)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 17;
            state ^= state << 5;
            f64::from(state) / f64::from(u32::MAX)
        })
        .collect();
    ImageBuffer::new(width, height, 1, data).expect("dimensions match")
}

fn study_err(path: &Path, e: AnalyticsError) -> CliError {
    in_file(path, e)
}

fn ssq_score_cmd(input: &Path, out: Option<&Path>, stdout: &mut dyn Write) -> CliResult {
    let text = read_text(input)?;
    let scored = study_io::score_ssq_csv(&text).map_err(|e| study_err(input, e))?;
    emit(out, study_io::write_scores_csv(&scored).as_bytes(), stdout)
}

fn ssq_prescreen_cmd(
    input: &Path,
    cutoff: f64,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> CliResult {
    let text = read_text(input)?;
    let scored = study_io::score_ssq_csv(&text).map_err(|e| study_err(input, e))?;
    let mut rows = Vec::with_capacity(scored.len());
    for (response, scores) in scored {
        let decision = prescreen(scores.ts, cutoff).map_err(|e| study_err(input, e))?;
        rows.push((response, scores.ts, decision));
    }
    emit(out, study_io::write_screening_csv(&rows).as_bytes(), stdout)
}

fn analyze_cmd(args: &AnalyzeArgs, stdout: &mut dyn Write) -> CliResult {
    let pairs_text = read_text(&args.pairs)?;
    let fms_text = args.fms.as_deref().map(read_text).transpose()?;

    let pairs = study_io::parse_pairs_csv(&pairs_text).map_err(|e| study_err(&args.pairs, e))?;
    let fms = match (&fms_text, &args.fms) {
        (Some(text), Some(path)) => {
            Some(study_io::parse_fms_csv(text).map_err(|e| study_err(path, e))?)
        }
        _ => None,
    };
    let report = analyze(&pairs, fms.as_deref()).map_err(|e| study_err(&args.pairs, e))?;
    emit(args.out.as_deref(), report.to_json().as_bytes(), stdout)
}
