use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use infobound_cli::calibrate::{all_passed, render_table, run_calibration, CalibrationOptions};
use infobound_cli::config::{ConfigError, ExperimentConfig, ProblemSpec};
use infobound_cli::{analyze, plot, sweep};

#[derive(Parser)]
#[command(
    name = "infobound",
    version,
    about = "Information-theoretic generalization bound experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Use m = 2000 replicates and smaller calibration budgets.
    #[arg(long, global = true)]
    fast: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the replicate sweep and write one dump per n plus a manifest.
    Simulate,
    /// Estimate risks, MI, conditions and bounds from the dumps; write results.csv.
    Analyze,
    /// Draw the figures from a results CSV.
    Plot {
        /// Defaults to results.csv in the output directory.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Calibrate the estimators against the Gaussian closed forms.
    OracleCheck {
        /// Multiply MI estimates by this factor (mutation check).
        #[arg(long, default_value_t = 1.0)]
        mi_scale: f64,
    },
    /// simulate, analyze and plot.
    All,
}

fn load(cli: &Cli) -> Result<ExperimentConfig, ConfigError> {
    let cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_path(path)?,
        None => ExperimentConfig::gaussian_default(),
    };
    Ok(cfg.with_overrides(cli.seed, cli.out.clone(), cli.fast))
}

fn print_rows(rows: &[analyze::AnalysisRow]) {
    for r in rows {
        let valid = r.bounds.iter().filter(|b| b.valid).count();
        println!(
            "n={:<6} gen={:.6} (se {:.6})  mi_sum={:.5}  bounds valid {}/{}",
            r.n,
            r.risks.gen_error,
            r.risks.std_errors.gen_error,
            r.mi.sum,
            valid,
            r.bounds.len()
        );
    }
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Simulate => {
            let cfg = load(cli)?;
            for row in sweep::simulate(&cfg)? {
                println!(
                    "n={} m={} seed={} failed={} nonconverged={} -> {}",
                    row.n, row.m, row.seed, row.failed, row.nonconverged, row.file
                );
            }
        }
        Command::Analyze => {
            let cfg = load(cli)?;
            print_rows(&analyze::analyze(&cfg)?);
            println!("wrote {}", cfg.out_dir.join(analyze::RESULTS).display());
        }
        Command::Plot { csv } => {
            let cfg = load(cli)?;
            let csv = csv
                .clone()
                .unwrap_or_else(|| cfg.out_dir.join(analyze::RESULTS));
            for f in plot::plot(&csv, &cfg.out_dir)? {
                match f.fit {
                    Some(l) => println!(
                        "{}: 1/value slope {:.4e}, R² {:.4}",
                        f.series, l.slope, l.r_squared
                    ),
                    None => println!("{}: {} point(s), no fit", f.series, f.points),
                }
            }
        }
        Command::OracleCheck { mi_scale } => {
            let mut opts = CalibrationOptions {
                fast: cli.fast,
                mi_scale: *mi_scale,
                ..CalibrationOptions::default()
            };
            if cli.config.is_some() {
                let cfg = load(cli)?;
                if let ProblemSpec::Gaussian { mu, sigma_n } = cfg.problem {
                    opts.mu = mu;
                    opts.sigma_n = sigma_n;
                }
                opts.seed = cfg.seed;
            } else if let Some(seed) = cli.seed {
                opts.seed = seed;
            }
            let checks = run_calibration(&opts);
            print!("{}", render_table(&checks));
            if !all_passed(&checks) {
                return Ok(ExitCode::from(1));
            }
        }
        Command::All => {
            let cfg = load(cli)?;
            sweep::simulate(&cfg)?;
            let rows = analyze::analyze(&cfg)?;
            print_rows(&rows);
            plot::plot(&cfg.out_dir.join(analyze::RESULTS), &cfg.out_dir)?;
            println!("outputs in {}", cfg.out_dir.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
