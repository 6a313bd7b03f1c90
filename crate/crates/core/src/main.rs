//! Command-line front end: simulate data, run a study, redraw a plot.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ecovar::error::{Error, Result};
use ecovar::study::plot::{panel_from_table, render_svg};
use ecovar::study::report::{parse_irf_table, plot_file_name, write_report};
use ecovar::study::{run_study, write_study_data, SimConfig, StudyConfig};

#[derive(Parser)]
#[command(name = "ecovar", version, about = "GARCH volatility, VAR and impulse-response study runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic input files from a simulation config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every variant of a study and write the report directory.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Redraw one impulse-response panel from a report directory.
    Plot {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        impulse: String,
        #[arg(long)]
        response: String,
        #[arg(long, default_value = "base")]
        variant: String,
        /// Defaults to the standard file name inside the report directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        context: format!("reading {}", path.display()),
        source: e,
    })
}

fn write(path: &PathBuf, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        context: format!("writing {}", path.display()),
        source: e,
    })
}

fn execute(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Simulate { config, out } => {
            let cfg = SimConfig::from_json(&read(&config)?)?;
            for name in write_study_data(&cfg, &out)? {
                println!("{}", out.join(name).display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Run { config, data, out } => {
            let cfg = StudyConfig::from_json(&read(&config)?)?;
            let report = run_study(&cfg, &data)?;
            write_report(&report, &out)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            for v in &report.variants {
                let status = match &v.result {
                    Ok(r) => match &r.significance {
                        Some(s) => format!("ok, {} <- {} early positive: {}", s.response, s.impulse, s.early_positive),
                        None => "ok".to_string(),
                    },
                    Err(e) => format!("failed: {e}"),
                };
                println!("{}: {status}", v.name);
            }
            println!("report written to {}", out.display());
            Ok(if report.failed_variants() > 0 { ExitCode::from(2) } else { ExitCode::SUCCESS })
        }
        Command::Plot {
            report,
            impulse,
            response,
            variant,
            out,
        } => {
            let rows = parse_irf_table(&read(&report.join(format!("irf_{variant}.csv")))?)?;
            let panel = panel_from_table(&variant, &rows, &impulse, &response)?;
            let out = out.unwrap_or_else(|| report.join(plot_file_name(&variant, &impulse, &response)));
            write(&out, &render_svg(&panel))?;
            println!("{}", out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
