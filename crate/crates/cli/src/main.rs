use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dinsim_cli::config::parse_override;
use dinsim_cli::{
    cmd_calibrate, cmd_mc, cmd_sweep, scenario, CliError, RunConfig, EXIT_NOT_CONVERGED,
};

/// Cohort model of venture banking with default insurance notes and clawback liens.
#[derive(Parser)]
#[command(name = "dinsim", version)]
struct Cli {
    /// Config file of `section.key = value` lines.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override one config value; repeatable.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Monte Carlo seed, overriding `mc.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bank and underwriter curves across the return grid, as CSV.
    Sweep,
    /// Fit knobs to the anchors and solve the break-even lien rate.
    Calibrate,
    /// Per-fund Monte Carlo, as CSV with a summary block.
    Mc,
    /// Replay a lien scenario and write its ledger log.
    Lifecycle {
        /// Scenario file, one action per line.
        scenario: PathBuf,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let text = match &cli.config {
        Some(path) => read(path)?,
        None => String::new(),
    };
    let mut overrides = cli
        .set
        .iter()
        .map(|s| parse_override(s))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(seed) = cli.seed {
        overrides.push(("mc.seed".into(), seed.to_string()));
    }
    RunConfig::from_text(&text, &overrides)
}

fn init_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("DINSIM_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| {
            CliError::Config(format!(
                "DINSIM_THREADS: expected a positive integer, got {value:?}"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Run(e.to_string()))
}

fn run(cli: &Cli) -> Result<i32, CliError> {
    init_threads()?;
    if let Command::Lifecycle { scenario: path } = &cli.command {
        let actions = scenario::parse(&read(path)?)?;
        let result = scenario::run(&actions)?;
        emit(cli.out.as_deref(), &result.ledger.export())?;
        print!("{}", scenario::balance_lines(&result.ledger));
        return Ok(0);
    }
    let cfg = load_config(cli)?;
    let out = cli.out.clone().or_else(|| cfg.output.clone());
    match cli.command {
        Command::Sweep => {
            emit(out.as_deref(), &cmd_sweep(&cfg)?)?;
            Ok(0)
        }
        Command::Calibrate => {
            let report = cmd_calibrate(&cfg)?;
            emit(out.as_deref(), &report.to_text())?;
            Ok(if report.converged {
                0
            } else {
                EXIT_NOT_CONVERGED
            })
        }
        Command::Mc => {
            let result = cmd_mc(&cfg)?;
            emit(out.as_deref(), &result.csv)?;
            if out.is_some() {
                println!(
                    "bank_baseline mean {} bank_clawback mean {} uw_net mean {}",
                    result.bank_baseline.mean, result.bank_clawback.mean, result.uw_net.mean
                );
            }
            Ok(0)
        }
        Command::Lifecycle { .. } => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("dinsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
