use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use contagion_cli::experiments::{run_b2b, run_fig1, run_fig2, run_price, Outcome};
use contagion_cli::output::{emit, render_checks};
use contagion_cli::validate::run_validate;
use contagion_cli::{ExperimentConfig, RunError, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_OK};

#[derive(Debug, Parser)]
#[command(name = "contagion", version, about = "Collateralized CDS pricing under Clayton default contagion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML experiment configuration (built-in three- or four-party set-up if omitted).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout if omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Cross-check against Monte Carlo where the command supports it.
    #[arg(long, global = true)]
    validate: bool,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo paths (binned hazard checks use forty times as many).
    #[arg(long, global = true)]
    paths: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Value the configured deal on the (alpha, maturity) grid.
    Price,
    /// Three-party par spreads against dependence.
    Fig1,
    /// Four-party par spreads with either counterparty, and the back-to-back gap.
    Fig2,
    /// Back-to-back gap on the grid.
    B2b,
    /// Run the invariant suite.
    Validate,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Price => "price",
            Command::Fig1 => "fig1",
            Command::Fig2 => "fig2",
            Command::B2b => "b2b",
            Command::Validate => "validate",
        }
    }
}

fn load(cli: &Cli) -> Result<ExperimentConfig, RunError> {
    let mut cfg = match (&cli.config, cli.command) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Command::Fig2 | Command::B2b) => ExperimentConfig::fig2(),
        (None, _) => ExperimentConfig::fig1(),
    };
    if let Some(seed) = cli.seed {
        cfg.simulation.seed = seed;
    }
    if let Some(paths) = cli.paths {
        cfg.simulation.paths = paths;
        cfg.simulation.binned_paths = paths.saturating_mul(40);
    }
    if cli.out.is_some() {
        cfg.output.path = cli.out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<bool, RunError> {
    let cfg = load(cli)?;
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .map_err(|e| RunError::Io(std::io::Error::other(e)))?;
    }
    let out = cfg.output.path.as_deref();
    if let Command::Validate = cli.command {
        let checks = run_validate(&cfg)?;
        emit(render_checks(&checks).as_bytes(), out)?;
        return Ok(checks.iter().all(|c| c.ok()));
    }
    let outcome: Outcome = match cli.command {
        Command::Price => run_price(&cfg, cli.validate)?,
        Command::Fig1 => run_fig1(&cfg, cli.validate)?,
        Command::Fig2 => run_fig2(&cfg, cli.validate)?,
        Command::B2b => run_b2b(&cfg, cli.validate)?,
        Command::Validate => unreachable!(),
    };
    emit(&outcome.table.to_csv()?, out)?;
    for c in &outcome.checks {
        eprintln!("{}", c.line());
    }
    Ok(outcome.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let code = match run(&cli) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_CHECK_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    eprintln!("{} finished in {:.2}s", cli.command.name(), start.elapsed().as_secs_f64());
    debug_assert!(code <= EXIT_CONFIG);
    ExitCode::from(code)
}
