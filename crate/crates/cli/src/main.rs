use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fedfdp::tradeoff::DEFAULT_GRID_SIZE;
use fedfdp_cli::{
    cmd_account, cmd_curve, cmd_partition, cmd_simulate, CliError, CliResult, CurveSpec, ExperimentConfig, Overrides,
};

#[derive(Parser)]
#[command(name = "fedfdp", version, about = "Private federated learning simulator and GDP accountant")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Root seed; overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CurveKind {
    Gaussian,
    Subsample,
    Mixture,
}

#[derive(Subcommand)]
enum Command {
    /// Write the privacy report for a configuration.
    Account(Common),
    /// Run the federation and write metrics, checkpoints and the privacy report.
    Simulate(Common),
    /// Write the partition manifest only.
    Partition(Common),
    /// Write one trade-off curve.
    Curve {
        /// Curve request (JSON); replaces --kind/--mu/--p.
        #[arg(long, conflicts_with_all = ["kind", "mu", "p"])]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "gaussian")]
        kind: CurveKind,
        #[arg(long)]
        mu: Option<f64>,
        /// Sampling probability for subsample and mixture curves.
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_GRID_SIZE)]
        grid: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn load(common: &Common) -> CliResult<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    Overrides { out: common.out.clone(), seed: common.seed }.apply(&mut cfg);
    Ok(cfg)
}

fn curve_spec(config: Option<PathBuf>, kind: CurveKind, mu: Option<f64>, p: Option<f64>) -> CliResult<CurveSpec> {
    if let Some(path) = config {
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::Io { context: path.display().to_string(), source: e })?;
        return serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())));
    }
    let mu = mu.ok_or_else(|| CliError::Validation("--mu is required".into()))?;
    let need_p = || p.ok_or_else(|| CliError::Validation("--p is required for this curve kind".into()));
    Ok(match kind {
        CurveKind::Gaussian => CurveSpec::Gaussian { mu },
        CurveKind::Subsample => CurveSpec::Subsample { mu, p: need_p()? },
        CurveKind::Mixture => CurveSpec::Mixture { mu, p: need_p()? },
    })
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Account(c) => {
            let out = cmd_account(&load(&c)?)?;
            let r = &out.report;
            println!("clients: {}", r.num_clients);
            if let Some(mu) = r.mu_max {
                println!("weak mu (mu_max): {mu:.6}");
            }
            if let Some(mu) = r.strong_mu {
                println!("strong mu: {mu:.6}");
            }
            for note in &r.notes {
                println!("note: {note}");
            }
            println!("report: {}", out.report_path.display());
        }
        Command::Simulate(c) => {
            let out = cmd_simulate(&load(&c)?)?;
            if let Some(last) = out.metrics.last() {
                println!(
                    "round {}: personalized acc {:.4}, global acc {:.4}",
                    last.round, last.avg_personalized_acc, last.global_acc
                );
            }
            if let Some(mu) = out.report.mu_max {
                println!("weak mu (mu_max): {mu:.6}");
            }
            println!("metrics: {}", out.metrics_path.display());
            println!("report: {}", out.report_path.display());
        }
        Command::Partition(c) => {
            let path = cmd_partition(&load(&c)?)?;
            println!("manifest: {}", path.display());
        }
        Command::Curve { config, kind, mu, p, grid, out } => {
            let path = cmd_curve(curve_spec(config, kind, mu, p)?, grid, &out)?;
            println!("curve: {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
