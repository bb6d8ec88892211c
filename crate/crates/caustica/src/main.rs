use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use caustica::commands::{critical, demo_csv, demo_meanfield};
use caustica::config::SweepConfig;
use caustica::sweep::{plot_script, run_sweep, write_csv};
use caustica::Failure;
use caustica_core::integrand::{Params, REGISTRY};
use clap::{Parser, Subcommand};

/// Airy-corrected saddle-point approximations near fold caustics
#[derive(Parser, Debug)]
#[command(name = "caustica", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate methods over an (alpha, N) grid and write CSV
    Sweep {
        /// Sweep configuration file
        #[arg(short, long)]
        config: PathBuf,
        /// CSV destination; overrides `output` in the config, stdout if neither is set
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write a matplotlib script for the CSV
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Locate the fold (z̃, α̂) of a registered integrand
    Critical {
        name: String,
        /// Integrand parameter, repeatable
        #[arg(long = "param", value_name = "KEY=VALUE", value_parser = parse_kv)]
        params: Vec<(String, f64)>,
        #[arg(long)]
        alpha_guess: Option<f64>,
        #[arg(long)]
        z_guess: Option<f64>,
        #[arg(long)]
        json: bool,
    },
    /// Compare WKB and the corrected formula on the mean-field toy model
    DemoMeanfield {
        /// Explicit symmetry-breaking term
        #[arg(long)]
        m: f64,
        /// Coupling grid, start:stop:steps or a comma list
        #[arg(long)]
        gamma: String,
        /// Comma-separated N values
        #[arg(long = "N", value_delimiter = ',', required = true)]
        n: Vec<u32>,
        /// CSV destination for the per-row comparison
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// List registered integrands and their parameters
    List,
}

fn parse_kv(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("'{s}' is not KEY=VALUE"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("'{v}' is not a number"))?;
    Ok((k.trim().to_owned(), v))
}

fn sweep(config: PathBuf, output: Option<PathBuf>, plot: Option<PathBuf>) -> Result<(), Failure> {
    let text = fs::read_to_string(&config).map_err(|e| Failure::Config(format!("{}: {e}", config.display())))?;
    let cfg = SweepConfig::parse(&text).map_err(Failure::Config)?;
    let outcome = run_sweep(&cfg)?;
    let output = output.or_else(|| cfg.output.clone());
    match &output {
        Some(path) => write_csv(&cfg, &outcome, fs::File::create(path)?)?,
        None => write_csv(&cfg, &outcome, std::io::stdout().lock())?,
    }
    if let Some(plot) = plot.or_else(|| cfg.plot.clone()) {
        let csv_name = output.as_ref().map_or("sweep.csv".into(), |p| p.display().to_string());
        fs::write(plot, plot_script(&cfg, &csv_name))?;
    }
    match outcome.error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Sweep { config, output, plot } => sweep(config, output, plot),
        Command::Critical { name, params, alpha_guess, z_guess, json } => {
            let params: Params = params.into_iter().collect();
            let report = critical(&name, &params, alpha_guess, z_guess)?;
            if json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.to_text());
            }
            Ok(())
        }
        Command::DemoMeanfield { m, gamma, n, output } => {
            let out = demo_meanfield(m, &gamma, &n)?;
            if let Some(path) = output {
                fs::write(path, demo_csv(&out.rows)?)?;
            }
            print!("{}", out.summary);
            Ok(())
        }
        Command::List => {
            let mut stdout = std::io::stdout().lock();
            for e in REGISTRY {
                writeln!(stdout, "{}: {}", e.name, e.summary)?;
                for (key, default, desc) in e.parameters {
                    let default = if default.is_nan() { "optional".to_owned() } else { format!("default {default}") };
                    writeln!(stdout, "    {key} ({default}): {desc}")?;
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("caustica: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
