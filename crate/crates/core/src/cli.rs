//! The `dca` command line: argument parsing, config-file merging and the
//! four subcommands.
//!
//! Exit codes: 0 on success, 2 for input or validation errors, 3 when every
//! requested model fails to fit.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::arps::DeclineKind;
use crate::error::DcaError;
use crate::fitting::{self, FitOptions, ProductionHistory, SmoothingSpec};
use crate::forecasting::{
    self, compare_models_with, ForecastSpec, DEFAULT_ABANDONMENT_RATE, DEFAULT_STEP,
};
use crate::ingest_report::report::{ForecastHeader, ForecastOutcome};
use crate::ingest_report::{
    emit_plot_series, emit_report, fit_json, forecast_json, parse_history, IngestError, PlotKind,
    WellInput,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_FIT_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "dca",
    version,
    about = "Arps decline curve analysis for gas wells"
)]
pub struct Cli {
    /// TOML file supplying defaults for any flag; flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit decline models and write parameters with fit diagnostics.
    Fit(CommonArgs),
    /// Fit, then forecast each model down to the abandonment rate.
    Forecast(CommonArgs),
    /// Fit and forecast all models and pick the best one.
    Compare(CommonArgs),
    /// Write plot-ready CSV of observed data with fitted overlays.
    PlotData(CommonArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Production CSV (`t_days` or `date`, `rate_mmscfd`, optional `cumulative_mmscf`).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output path; `-` writes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// exp, harm, hyp, all, or a comma-separated list.
    #[arg(long)]
    pub model: Option<String>,
    /// Centered moving-average window (odd, at least 3).
    #[arg(long)]
    pub smooth_window: Option<usize>,
    /// Fit window as `tmin:tmax` in days.
    #[arg(long)]
    pub window: Option<String>,
    /// Abandonment rate, mmscf/day.
    #[arg(long)]
    pub q_ab: Option<f64>,
    /// Cumulative production to date, mmscf. Overrides `cumulative_mmscf`.
    #[arg(long)]
    pub np: Option<f64>,
    /// Forecast sampling interval, days.
    #[arg(long)]
    pub step: Option<f64>,
    /// Current rate to forecast from; defaults to the last observed rate.
    #[arg(long)]
    pub q_start: Option<f64>,
    /// Later production used to score predicted remaining life.
    #[arg(long)]
    pub holdout: Option<PathBuf>,
    /// Plot kind: cartesian, semilog or rate-cum.
    #[arg(long)]
    pub kind: Option<String>,
    /// Well identifier; defaults to the input file stem.
    #[arg(long)]
    pub well_id: Option<String>,
}

/// Flag defaults read from `--config`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub model: Option<String>,
    pub smooth_window: Option<usize>,
    pub window: Option<String>,
    pub q_ab: Option<f64>,
    pub np: Option<f64>,
    pub step: Option<f64>,
    pub q_start: Option<f64>,
    pub holdout: Option<PathBuf>,
    pub kind: Option<String>,
    pub well_id: Option<String>,
}

impl CommonArgs {
    /// Fills every unset flag from `config`.
    pub fn merged(self, config: ConfigFile) -> CommonArgs {
        CommonArgs {
            input: self.input.or(config.input),
            out: self.out.or(config.out),
            model: self.model.or(config.model),
            smooth_window: self.smooth_window.or(config.smooth_window),
            window: self.window.or(config.window),
            q_ab: self.q_ab.or(config.q_ab),
            np: self.np.or(config.np),
            step: self.step.or(config.step),
            q_start: self.q_start.or(config.q_start),
            holdout: self.holdout.or(config.holdout),
            kind: self.kind.or(config.kind),
            well_id: self.well_id.or(config.well_id),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Ingest {
        path: PathBuf,
        #[source]
        source: IngestError,
    },

    #[error(transparent)]
    Dca(#[from] DcaError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("every requested model failed to fit")]
    AllModelsFailed,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::AllModelsFailed | CliError::Dca(DcaError::AllModelsFailed(_)) => {
                EXIT_FIT_FAILED
            }
            _ => EXIT_INPUT,
        }
    }
}

pub fn parse_models(spec: &str) -> Result<Vec<DeclineKind>, CliError> {
    if spec.trim().eq_ignore_ascii_case("all") {
        return Ok(DeclineKind::ALL.to_vec());
    }
    let mut out = Vec::new();
    for part in spec.split(',') {
        let kind: DeclineKind = part.parse().map_err(|e| CliError::Usage(format!("{e}")))?;
        if !out.contains(&kind) {
            out.push(kind);
        }
    }
    Ok(out)
}

pub fn parse_window(spec: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Usage(format!("window must look like tmin:tmax, got '{spec}'"));
    let (lo, hi) = spec.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn load_config(path: Option<&Path>) -> Result<ConfigFile, CliError> {
    let Some(path) = path else {
        return Ok(ConfigFile::default());
    };
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn load_well(path: &Path, well_id: Option<&str>) -> Result<WellInput, CliError> {
    let file = File::open(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "well".to_string());
    let parsed =
        parse_history(io::BufReader::new(file), well_id.unwrap_or(&stem)).map_err(|source| {
            CliError::Ingest {
                path: path.to_path_buf(),
                source,
            }
        })?;
    if parsed.dropped_rows > 0 {
        eprintln!(
            "warning: {}: dropped {} row(s) with non-positive rate",
            path.display(),
            parsed.dropped_rows
        );
    }
    Ok(parsed.well)
}

fn open_out(path: &Path) -> Result<Box<dyn Write>, CliError> {
    if path.as_os_str() == "-" {
        return Ok(Box::new(io::stdout().lock()));
    }
    let file = File::create(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(Box::new(BufWriter::new(file)))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = open_out(path)?;
    out.write_all(text.as_bytes()).map_err(io_err)?;
    out.flush().map_err(io_err)
}

/// Everything a subcommand needs after flags, config and input are merged.
struct Session {
    args: CommonArgs,
    well: WellInput,
    out: PathBuf,
    models: Vec<DeclineKind>,
    options: FitOptions<f64>,
}

impl Session {
    fn open(args: CommonArgs) -> Result<Self, CliError> {
        let input = args
            .input
            .clone()
            .ok_or_else(|| CliError::Usage("--input is required".into()))?;
        let out = args
            .out
            .clone()
            .ok_or_else(|| CliError::Usage("--out is required".into()))?;
        let models = parse_models(args.model.as_deref().unwrap_or("all"))?;
        let smoothing = match args.smooth_window {
            Some(n) => SmoothingSpec::new(n)?,
            None => SmoothingSpec::disabled(),
        };
        let window = args.window.as_deref().map(parse_window).transpose()?;
        let mut well = load_well(&input, args.well_id.as_deref())?;
        well.q_ab = args.q_ab;
        if let Some(flag) = args.np {
            if let Some(from_csv) = well.np.filter(|&v| v != flag) {
                eprintln!(
                    "warning: --np {flag} overrides cumulative_mmscf {from_csv} from the input"
                );
            }
            well.np = Some(flag);
        }
        well.history = well.history.clone().with_np(well.np)?;
        Ok(Self {
            args,
            well,
            out,
            models,
            options: FitOptions {
                smoothing,
                window,
                ..FitOptions::default()
            },
        })
    }

    fn forecast_spec(&self) -> Result<ForecastSpec<f64>, CliError> {
        let q_start = match self.args.q_start {
            Some(q) => q,
            None => self
                .well
                .history
                .last()
                .map(|r| r.rate)
                .expect("history has records"),
        };
        let q_ab = self.well.q_ab.unwrap_or(DEFAULT_ABANDONMENT_RATE);
        Ok(ForecastSpec::new(
            q_start,
            q_ab,
            self.args.step.unwrap_or(DEFAULT_STEP),
        )?)
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let config = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Fit(args) => run_fit(Session::open(args.merged(config))?),
        Command::Forecast(args) => run_forecast(Session::open(args.merged(config))?),
        Command::Compare(args) => run_compare(Session::open(args.merged(config))?),
        Command::PlotData(args) => run_plot(Session::open(args.merged(config))?),
    }
}

fn run_fit(s: Session) -> Result<(), CliError> {
    let fits: Vec<_> = s
        .models
        .iter()
        .map(|&kind| {
            let fit = fitting::fit(&s.well.history, kind, &s.options).map_err(|e| e.to_string());
            (kind, fit)
        })
        .collect();
    let smoothing = s.options.smoothing;
    let json = fit_json(
        &s.well.well_id,
        smoothing.is_enabled().then(|| smoothing.window()),
        s.options.window,
        &fits,
    );
    write_text(&s.out, &json)?;
    if fits.iter().all(|(_, f)| f.is_err()) {
        return Err(CliError::AllModelsFailed);
    }
    Ok(())
}

fn run_forecast(s: Session) -> Result<(), CliError> {
    let spec = s.forecast_spec()?;
    let outcomes: Vec<ForecastOutcome> = s
        .models
        .iter()
        .map(|&kind| {
            let outcome = fitting::fit(&s.well.history, kind, &s.options)
                .and_then(|fit| {
                    let fc = forecasting::forecast(&fit.params, &spec, s.well.np)?;
                    Ok((fit, fc))
                })
                .map_err(|e| e.to_string());
            (kind, outcome)
        })
        .collect();
    let header = ForecastHeader {
        well_id: &s.well.well_id,
        np: s.well.np,
        q_start: spec.q_start(),
        q_ab: spec.q_ab(),
        step: spec.step(),
    };
    write_text(&s.out, &forecast_json(&header, &outcomes))?;
    if outcomes.iter().all(|(_, o)| o.is_err()) {
        return Err(CliError::AllModelsFailed);
    }
    Ok(())
}

fn run_compare(s: Session) -> Result<(), CliError> {
    let spec = s.forecast_spec()?;
    let mut report = compare_models_with(&s.well.history, &spec, &s.models, &s.options)?;
    if let Some(path) = &s.args.holdout {
        let holdout: ProductionHistory<f64> = load_well(path, Some("holdout"))?.history;
        match forecasting::observed_life(&holdout, spec.q_ab()) {
            Some(actual) if actual > 0.0 => report = report.with_actual_life(actual)?,
            _ => eprintln!(
                "warning: {}: holdout never reaches the abandonment rate; life accuracy not computed",
                path.display()
            ),
        }
    }
    let io_err = |source| CliError::Io {
        path: s.out.clone(),
        source,
    };
    let out = open_out(&s.out)?;
    emit_report(&s.well.well_id, &report, out).map_err(io_err)
}

fn run_plot(s: Session) -> Result<(), CliError> {
    let kind: PlotKind = s
        .args
        .kind
        .as_deref()
        .ok_or_else(|| CliError::Usage("--kind is required for plot-data".into()))?
        .parse()
        .map_err(|e| CliError::Usage(format!("{e}")))?;
    let mut fits = Vec::new();
    for &model in &s.models {
        match fitting::fit(&s.well.history, model, &s.options) {
            Ok(fit) => fits.push(fit),
            Err(e) => eprintln!("warning: {model} fit failed, overlay omitted: {e}"),
        }
    }
    let out = open_out(&s.out)?;
    emit_plot_series(&s.well, &fits, kind, out).map_err(|e| CliError::Io {
        path: s.out.clone(),
        source: io::Error::other(e),
    })
}

/// Parses arguments, runs, reports errors on stderr and returns the exit code.
pub fn main_with_args<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
