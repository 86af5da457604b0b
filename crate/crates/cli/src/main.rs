mod report;
mod scenario;

use clap::{Parser, Subcommand};
use fracwave::config::{apply_key, parse_config, preset, JobConfig, ScenarioId};
use fracwave::diagnostics::fit_decay;
use fracwave::error::ConfigError;
use fracwave::series::FunctionalSeries;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "fracwave",
    about = "1-D viscoelastic wave solver with fractional boundary damping and trajectory diagnostics",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation described by a key = value config file
    Run { config: PathBuf },
    /// Run a named scenario preset, optionally overriding config keys
    Scenario {
        /// conservative | global_decay | blowup_negE | blowup_zeroE |
        /// blowup_posE | quadrature_check | convergence
        id: String,
        /// Override preset keys, e.g. --set t_end=5 --set nx=401
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Check the diffusive quadrature against its closed form
    VerifyQuadrature {
        /// Relative-error tolerance of the calibration table
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
    /// Manufactured-solution refinement study on a config's physics
    Convergence {
        config: PathBuf,
        #[arg(long, default_value_t = 4)]
        levels: usize,
    },
    /// Fit K e^{-k t} to the energy column of an emitted series
    DecayFit {
        series: PathBuf,
        /// Fit window as lo:hi (defaults to the last 90% of the series)
        #[arg(long)]
        window: Option<String>,
    },
    /// Run a blow-up configuration and report case, bounds, and times
    BlowupStudy { config: PathBuf },
}

/// Process outcome with the documented exit codes.
pub enum AppError {
    /// exit 2
    Config(String),
    /// exit 3
    Instability(String),
    /// exit 4
    CheckFailed(String),
    /// exit 5
    Io(String),
}

impl AppError {
    fn code(&self) -> u8 {
        match self {
            AppError::Config(_) => 2,
            AppError::Instability(_) => 3,
            AppError::CheckFailed(_) => 4,
            AppError::Io(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            AppError::Config(m)
            | AppError::Instability(m)
            | AppError::CheckFailed(m)
            | AppError::Io(m) => m,
        }
    }
}

impl From<ConfigError> for AppError {
    fn from(e: ConfigError) -> Self {
        AppError::Config(e.to_string())
    }
}

impl From<fracwave::Error> for AppError {
    fn from(e: fracwave::Error) -> Self {
        AppError::Config(e.to_string())
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Io(e.to_string())
    }
}

fn load_config(path: &PathBuf) -> Result<JobConfig, AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Io(format!("reading {}: {e}", path.display())))?;
    Ok(parse_config(&text)?)
}

fn scenario_job(id: ScenarioId, overrides: &[String]) -> Result<JobConfig, AppError> {
    let mut job = preset(id);
    let mut touched_grid = false;
    let mut touched_dt = false;
    for (i, kv) in overrides.iter().enumerate() {
        let (key, value) = kv.split_once('=').ok_or_else(|| {
            AppError::Config(format!("override {kv:?} is not of the form key=value"))
        })?;
        let key = key.trim();
        touched_grid |= key == "nx" || key == "L";
        touched_dt |= key == "dt";
        apply_key(&mut job, key, value.trim(), i + 1)?;
    }
    if touched_grid && !touched_dt {
        job.run.dt = job.run.cfl_safety * job.run.dx();
    }
    job.run.validate()?;
    Ok(job)
}

fn parse_window(spec: &Option<String>) -> Result<Option<(f64, f64)>, AppError> {
    match spec {
        None => Ok(None),
        Some(s) => {
            let (lo, hi) = s
                .split_once(':')
                .ok_or_else(|| AppError::Config(format!("window {s:?} is not lo:hi")))?;
            let lo: f64 = lo
                .parse()
                .map_err(|e| AppError::Config(format!("bad window start: {e}")))?;
            let hi: f64 = hi
                .parse()
                .map_err(|e| AppError::Config(format!("bad window end: {e}")))?;
            Ok(Some((lo, hi)))
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), AppError> {
    match cli.cmd {
        Command::Run { config } => {
            let stem = config
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "run".into());
            let job = load_config(&config)?;
            let bundle = scenario::run_job(&job, &stem)?;
            scenario::print_summary(&bundle);
            scenario::exit_on_instability(&bundle)
        }
        Command::Scenario { id, set } => {
            let id: ScenarioId = id.parse().map_err(|e: ConfigError| AppError::Config(e.to_string()))?;
            let job = scenario_job(id, &set)?;
            match id {
                ScenarioId::QuadratureCheck => {
                    scenario::verify_quadrature(job.run.grid_spec.calibration_tol, &job)
                }
                ScenarioId::Convergence => scenario::convergence(&job, 4),
                _ => {
                    let bundle = scenario::run_job(&job, id.name())?;
                    scenario::print_summary(&bundle);
                    scenario::exit_on_instability(&bundle)
                }
            }
        }
        Command::VerifyQuadrature { tol } => {
            scenario::verify_quadrature(tol, &JobConfig::default())
        }
        Command::Convergence { config, levels } => {
            let job = load_config(&config)?;
            scenario::convergence(&job, levels)
        }
        Command::DecayFit { series, window } => {
            let text = std::fs::read_to_string(&series)
                .map_err(|e| AppError::Io(format!("reading {}: {e}", series.display())))?;
            let parsed = FunctionalSeries::parse_csv(&text)?;
            let window = match parse_window(&window)? {
                Some(w) => w,
                None => {
                    let t_max = parsed.rows().last().map(|r| r.t).unwrap_or(0.0);
                    (0.1 * t_max, t_max)
                }
            };
            let fit = fit_decay(&parsed, window)
                .map_err(|e| AppError::Config(e.to_string()))?;
            println!(
                "decay fit on [{}, {}]: K = {:.6e}, k = {:.6}, R^2 = {:.6} ({} samples)",
                window.0, window.1, fit.k_coef, fit.rate, fit.r_squared, fit.samples
            );
            Ok(())
        }
        Command::BlowupStudy { config } => {
            let stem = config
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "blowup".into());
            let job = load_config(&config)?;
            scenario::blowup_study(&job, &stem)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
