//! Thin command-line shell over the study harness.
//!
//! Every behavior routes through the library APIs, so a CSV produced here is
//! byte-identical to one produced by calling [`spde_core::run_study`]
//! directly with the same configuration.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical abort
//! (non-finite fields during integration).

mod config;

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use spde_core::harness::format_sig17;
use spde_core::{
    initial_condition, integrate, run_study, sample_ladder, theoretical_rate, EigenBasis,
    HarnessError, NoiseParams, NoiseStream, Nonlinearity, SchemeConfig, SchemeError, StudyConfig,
};

#[derive(Parser, Debug)]
#[command(name = "spde", version, about = "Temporal convergence studies for a fractional stochastic heat equation")]
struct Cli {
    /// Output path for CSV / coefficient dumps (stdout when omitted).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Worker threads for the Monte Carlo loop (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Fail instead of warning when gamma = 2rho+alpha-(d+eps)/2 <= 0.
    #[arg(long, global = true)]
    strict_gamma: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default, Clone)]
struct Overrides {
    /// Fractional order alpha in (0,1).
    #[arg(long)]
    alpha: Option<f64>,

    /// Noise decay exponent rho (sigma_i = lambda_i^-rho).
    #[arg(long)]
    rho: Option<f64>,

    /// Retained spectral modes.
    #[arg(long = "M", value_name = "MODES")]
    modes: Option<usize>,

    /// Final time.
    #[arg(long = "T", value_name = "TIME")]
    final_time: Option<f64>,

    /// Comma-separated step counts, e.g. 2,4,8.
    #[arg(long = "N", value_delimiter = ',', value_name = "STEPS")]
    n_list: Option<Vec<usize>>,

    /// Monte Carlo trajectory count.
    #[arg(long = "K", value_name = "COUNT")]
    trajectories: Option<usize>,

    /// Master seed (fallbacks: SPDE_SEED env var, then 42).
    #[arg(long)]
    seed: Option<u64>,

    /// Scheme: baseline or modified.
    #[arg(long)]
    scheme: Option<String>,

    /// Epsilon bookkeeping term of the theoretical rate.
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one study from defaults, an optional config file, and overrides.
    Run {
        /// Flat key = value config file (see README for the keys).
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// The three rate-table presets: alpha in {0.4, 0.6, 0.8}, rho = 0.2,
    /// T = 0.2, M = 500, N = 2,4,8, K = 1000. Override for desk scale.
    Table1 {
        #[command(flatten)]
        overrides: Overrides,
    },
    /// The smooth-regime preset (rho = 1.2, T = 0.5, M = 100, N = 2,4,8,16)
    /// for both schemes, or one scheme when --scheme is given.
    Fig1 {
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Integrate a single seeded trajectory (--N takes one step count) and
    /// dump the final solution coefficients.
    Single {
        #[command(flatten)]
        overrides: Overrides,
        /// Switch the noise amplitude off (sigma = 0).
        #[arg(long)]
        sigma_zero: bool,
        /// Use f = 0 instead of f = sin.
        #[arg(long)]
        f_zero: bool,
    },
}

enum CliError {
    Config(String),
    Numerical(String),
    Io(std::io::Error),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Scheme(SchemeError::NonFinite { .. }) => CliError::Numerical(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<SchemeError> for CliError {
    fn from(e: SchemeError) -> Self {
        match e {
            SchemeError::NonFinite { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

/// Parses `argv` and runs the selected command; returns the process exit
/// code.
pub fn parse_and_dispatch(argv: &[String]) -> u8 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.threads {
        Some(threads) => {
            match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
                Ok(pool) => pool.install(|| run_command(&cli)),
                Err(e) => Err(CliError::Config(format!("cannot build thread pool: {e}"))),
            }
        }
        None => run_command(&cli),
    };
    match outcome {
        Ok(()) => 0,
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("numerical abort: {msg}");
            2
        }
        Err(CliError::Io(e)) => {
            eprintln!("io error: {e}");
            1
        }
    }
}

fn run_command(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Run { config, overrides } => {
            let mut study = StudyConfig::default();
            apply_env_seed(&mut study)?;
            if let Some(path) = config {
                let text = fs::read_to_string(path).map_err(|e| {
                    CliError::Config(format!("cannot read config {}: {e}", path.display()))
                })?;
                config::apply_config_text(&mut study, &text).map_err(CliError::Config)?;
            }
            apply_overrides(&mut study, overrides)?;
            check_gamma(&study, cli.strict_gamma)?;
            let csv = run_study(&study)?.to_csv();
            write_output(cli.out.as_deref(), &csv)
        }
        Command::Table1 { overrides } => {
            let alphas = match overrides.alpha {
                Some(a) => vec![a],
                None => vec![0.4, 0.6, 0.8],
            };
            let mut blocks = String::new();
            for alpha in alphas {
                let mut study = StudyConfig::table1_preset(alpha);
                apply_env_seed(&mut study)?;
                apply_overrides(&mut study, overrides)?;
                study.alpha = alpha;
                check_gamma(&study, cli.strict_gamma)?;
                blocks.push_str(&run_study(&study)?.to_csv());
            }
            write_output(cli.out.as_deref(), &blocks)
        }
        Command::Fig1 { overrides } => {
            let schemes = match &overrides.scheme {
                Some(s) => vec![config::parse_scheme(s).map_err(CliError::Config)?],
                None => vec![spde_core::SchemeKind::Modified, spde_core::SchemeKind::Baseline],
            };
            let mut blocks = String::new();
            for scheme in schemes {
                let mut study = StudyConfig::fig1_preset(scheme);
                apply_env_seed(&mut study)?;
                apply_overrides(&mut study, overrides)?;
                study.scheme = scheme;
                check_gamma(&study, cli.strict_gamma)?;
                blocks.push_str(&run_study(&study)?.to_csv());
            }
            write_output(cli.out.as_deref(), &blocks)
        }
        Command::Single {
            overrides,
            sigma_zero,
            f_zero,
        } => {
            let mut study = StudyConfig::default();
            apply_env_seed(&mut study)?;
            apply_overrides(&mut study, overrides)?;
            study.sigma_zero = *sigma_zero;
            study.f_zero = *f_zero;
            let csv = run_single(&study)?;
            write_output(cli.out.as_deref(), &csv)
        }
    }
}

/// One seeded trajectory at step count `N` (the single entry of the N list);
/// returns `mode,coeff` lines for u(T).
fn run_single(study: &StudyConfig) -> Result<String, CliError> {
    if study.n_list.len() != 1 {
        return Err(CliError::Config(format!(
            "single takes exactly one step count via --N, got {:?}",
            study.n_list
        )));
    }
    let steps = study.n_list[0];
    if steps == 0 {
        return Err(CliError::Config("step count must be positive".into()));
    }
    let basis = EigenBasis::with_dealiased_grid(study.modes)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let params = if study.sigma_zero {
        NoiseParams::noiseless(study.alpha, &basis, study.final_time, steps)
    } else {
        NoiseParams::new(study.alpha, study.rho, &basis, study.final_time, steps)
    }
    .map_err(|e| CliError::Config(e.to_string()))?;
    let mut stream = NoiseStream::for_trajectory(study.master_seed, 0);
    let ladder = sample_ladder(&params, &mut stream);
    let nonlinearity = if study.f_zero {
        Nonlinearity::zero()
    } else {
        Nonlinearity::sine()
    };
    let cfg = SchemeConfig::new(
        study.alpha,
        ladder.tau(),
        study.modes,
        nonlinearity,
        study.scheme,
    );
    let u0 = initial_condition(study.modes);
    let solutions = integrate(&cfg, &u0, &ladder, &basis, &params, &BTreeSet::new())?;
    let u_final = &solutions[&steps];
    let mut out = String::from("mode,coeff\n");
    for (i, &c) in u_final.coeffs().iter().enumerate() {
        out.push_str(&format!("{},{}\n", i + 1, format_sig17(c)));
    }
    Ok(out)
}

fn apply_env_seed(study: &mut StudyConfig) -> Result<(), CliError> {
    if let Ok(text) = std::env::var("SPDE_SEED") {
        study.master_seed = text
            .parse::<u64>()
            .map_err(|e| CliError::Config(format!("invalid SPDE_SEED '{text}': {e}")))?;
    }
    Ok(())
}

fn apply_overrides(study: &mut StudyConfig, o: &Overrides) -> Result<(), CliError> {
    if let Some(v) = o.alpha {
        study.alpha = v;
    }
    if let Some(v) = o.rho {
        study.rho = v;
    }
    if let Some(v) = o.modes {
        study.modes = v;
    }
    if let Some(v) = o.final_time {
        study.final_time = v;
    }
    if let Some(v) = &o.n_list {
        study.n_list = v.clone();
    }
    if let Some(v) = o.trajectories {
        study.trajectories = v;
    }
    if let Some(v) = o.seed {
        study.master_seed = v;
    }
    if let Some(s) = &o.scheme {
        study.scheme = config::parse_scheme(s).map_err(CliError::Config)?;
    }
    if let Some(v) = o.epsilon {
        study.epsilon = v;
    }
    Ok(())
}

fn check_gamma(study: &StudyConfig, strict: bool) -> Result<(), CliError> {
    match theoretical_rate(study.alpha, study.rho, 1, study.epsilon, study.scheme) {
        Ok(_) => Ok(()),
        Err(e) if strict => Err(CliError::Config(e.to_string())),
        Err(e) => {
            eprintln!("warning: {e}; the theory_rate column will be empty");
            Ok(())
        }
    }
}

fn write_output(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    match path {
        Some(path) => fs::write(path, content)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(content.as_bytes())?;
        }
    }
    Ok(())
}
