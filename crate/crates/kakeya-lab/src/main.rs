use clap::{Parser, ValueEnum};
use kakeya_lab::{run, ExperimentConfig, HarnessError, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Clone, Copy, ValueEnum)]
enum Cmd {
    Axioms,
    Maximal,
    Dimension,
    Bush,
    Arith,
}

impl From<Cmd> for Subcommand {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Axioms => Subcommand::Axioms,
            Cmd::Maximal => Subcommand::Maximal,
            Cmd::Dimension => Subcommand::Dimension,
            Cmd::Bush => Subcommand::Bush,
            Cmd::Arith => Subcommand::Arith,
        }
    }
}

/// Runs one experiment pipeline and writes CSV, JSON and SVG artifacts.
#[derive(Parser)]
#[command(name = "kakeya-lab", version)]
struct Cli {
    #[arg(value_enum)]
    subcommand: Cmd,
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("kakeya-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: &Cli) -> Result<bool, HarnessError> {
    let mut cfg = ExperimentConfig::load(&cli.config)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let out = cli.out.clone().or_else(|| cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let report = run(&cfg, cli.subcommand.into(), &out)?;
    for c in &report.checks {
        let verdict = match c.pass {
            Some(true) => "PASS",
            Some(false) => "FAIL",
            None => "N/A ",
        };
        println!("{verdict} {} {} ({})", c.name, c.setting.as_deref().unwrap_or("-"), c.invariant);
    }
    println!("report: {}", report.report_path().display());
    Ok(report.pass)
}
