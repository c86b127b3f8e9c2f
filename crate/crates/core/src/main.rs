use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ris_ioi::experiments::{
    self, evaluate, figure_preset, parse_config, validation_report, write_csv, ExperimentError,
    SweepConfig, SweepOutcome, Tolerances, EXIT_CONFIG, EXIT_PASS, EXIT_TOLERANCE, FIGURES,
};

/// Outage and spectral efficiency of a RIS-assisted link under
/// inter-operator RIS interference: closed forms and Monte Carlo.
#[derive(Parser)]
#[command(name = "ris-ioi", version)]
struct Cli {
    /// Worker threads; changes wall time only, never results.
    #[arg(long, global = true, value_name = "K")]
    threads: Option<usize>,
    /// Random seed; overrides the config value.
    #[arg(long, global = true, env = "RIS_IOI_SEED", value_name = "S")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configured sweep and write its rows as CSV.
    Sweep {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        #[arg(long, value_name = "CSV")]
        out: PathBuf,
    },
    /// Regenerate a figure's data as `<name>.csv` plus `<name>_report.txt`.
    Figure {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(FIGURES))]
        name: String,
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
        /// Monte Carlo trials per scenario (0 disables simulation).
        #[arg(long, value_name = "T")]
        trials: Option<u64>,
    },
    /// Compare closed forms against Monte Carlo and gate on tolerances.
    Validate {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        /// Maximum relative outage error.
        #[arg(long, value_name = "X")]
        tol_outage: Option<f64>,
        /// Maximum relative spectral-efficiency error.
        #[arg(long, value_name = "Y")]
        tol_se: Option<f64>,
        /// Maximum sup distance between analytic and empirical CDFs.
        #[arg(long, value_name = "Z")]
        tol_ks: Option<f64>,
        /// Also write the report to this file.
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
    },
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), ExperimentError> {
    std::fs::write(path, bytes).map_err(|source| ExperimentError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_rows(path: &Path, outcomes: &[SweepOutcome]) -> Result<(), ExperimentError> {
    let rows: Vec<_> = outcomes
        .iter()
        .flat_map(|o| o.rows.iter().cloned())
        .collect();
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf)?;
    write_file(path, &buf)
}

fn with_seed(mut config: SweepConfig, seed: Option<u64>) -> SweepConfig {
    if let Some(s) = seed {
        config.run.seed = s;
    }
    config
}

fn run(cli: Cli) -> Result<i32, ExperimentError> {
    match cli.command {
        Command::Sweep { config, out } => {
            let config = with_seed(parse_config(&config)?, cli.seed);
            let outcome = evaluate(&config)?;
            write_rows(&out, std::slice::from_ref(&outcome))?;
            eprintln!(
                "{}: {} rows written to {}",
                config.id,
                outcome.rows.len(),
                out.display()
            );
            Ok(EXIT_PASS)
        }
        Command::Figure {
            name,
            out_dir,
            trials,
        } => {
            let configs = figure_preset(&name).expect("clap restricts names");
            std::fs::create_dir_all(&out_dir).map_err(|source| ExperimentError::Io {
                path: out_dir.display().to_string(),
                source,
            })?;
            let mut outcomes = Vec::new();
            for mut config in configs {
                config = with_seed(config, cli.seed);
                if let Some(t) = trials {
                    config.run.trials = t;
                    config.run.chunks = config.run.chunks.min(t.max(1) as u32);
                }
                outcomes.push(evaluate(&config)?);
                eprintln!("{}: done", config.id);
            }
            let csv = out_dir.join(format!("{name}.csv"));
            write_rows(&csv, &outcomes)?;
            let report = validation_report(&outcomes, &Tolerances::default());
            let report_path = out_dir.join(format!("{name}_report.txt"));
            write_file(&report_path, report.to_string().as_bytes())?;
            eprintln!("wrote {} and {}", csv.display(), report_path.display());
            Ok(EXIT_PASS)
        }
        Command::Validate {
            config,
            tol_outage,
            tol_se,
            tol_ks,
            report,
        } => {
            let config = with_seed(parse_config(&config)?, cli.seed);
            let outcome = evaluate(&config)?;
            let tolerances = Tolerances::default()
                .with(experiments::Metric::Outage.as_str(), tol_outage)
                .with(experiments::Metric::SpectralEfficiency.as_str(), tol_se)
                .with(experiments::report::KS_KEY, tol_ks);
            let result = validation_report(&[outcome], &tolerances);
            let text = result.to_string();
            print!("{text}");
            if let Some(path) = report {
                write_file(&path, text.as_bytes())?;
            }
            Ok(if result.passed {
                EXIT_PASS
            } else {
                EXIT_TOLERANCE
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if k == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
