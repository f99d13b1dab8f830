//! Commands behind the `dinsim` binary.
//!
//! Each command renders its artifact to a `String` so it can be tested
//! without touching the file system; `main` writes it out.

use std::fmt::Write as _;
use std::path::PathBuf;

use dinsim_core::calibrate::{fit_anchors, solve_clawback_rate, CalibrationReport};
use dinsim_core::lifecycle::LifecycleError;
use dinsim_core::model::{self, sweep, ModelParams, SweepRow};
use dinsim_core::montecarlo::{self, FundRun, Summary};

pub mod config;
pub mod scenario;

pub use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid transition: {0}")]
    Transition(LifecycleError),
    #[error("{0}")]
    Run(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Run(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Transition(_) => 4,
        }
    }
}

pub const EXIT_NOT_CONVERGED: i32 = 1;

pub const SWEEP_HEADER: &str =
    "rho,bank_baseline,bank_clawback,uw_per_dollar_baseline,uw_per_dollar_clawback,uw_invested";
pub const MC_HEADER: &str = "fund,rho,bank_baseline,bank_clawback,uw_net";

fn params_metadata(out: &mut String, p: &ModelParams) {
    let _ = writeln!(out, "# model.original_capital = {}", p.original_capital);
    let _ = writeln!(out, "# model.moc = {}", p.moc);
    let _ = writeln!(out, "# model.horizon_years = {}", p.horizon_years);
    let _ = writeln!(
        out,
        "# model.deal_duration_years = {}",
        p.deal_duration_years
    );
    let _ = writeln!(out, "# model.premium_rate = {}", p.premium_rate);
    let _ = writeln!(out, "# model.equity_share = {}", p.equity_share);
    let _ = writeln!(out, "# model.clawback_rate = {}", p.clawback_rate);
    let _ = writeln!(out, "# model.coverage = {}", p.coverage);
    let _ = writeln!(out, "# model.funds_cost_rate = {}", p.funds_cost_rate);
    let _ = writeln!(out, "# model.winner_multiple = {}", p.winner_multiple);
    let _ = writeln!(out, "# model.limited_liability = {}", p.limited_liability);
    let _ = writeln!(out, "# model.reserve_rule = {}", p.reserve_rule.name());
}

/// Sweep CSV: `#` metadata, header, one row per grid point.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<String, CliError> {
    let grid = cfg.sweep.grid();
    let rows = sweep(&cfg.model, &grid).map_err(|e| CliError::Config(e.to_string()))?;
    let mut out = String::from("# dinsim sweep\n");
    params_metadata(&mut out, &cfg.model);
    let (n_lo, n_hi) = model::NORMAL_RANGE;
    let (z_lo, z_hi) = model::ZERO_FUNDS_RANGE;
    let _ = writeln!(out, "# shade.normal_range = {n_lo:.2},{n_hi:.2}");
    let _ = writeln!(out, "# shade.zero_funds_range = {z_lo:.2},{z_hi:.2}");
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for r in &rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.rho,
            r.baseline.bank_multiple,
            r.clawback.bank_multiple,
            r.baseline.uw_per_dollar_insured,
            r.clawback.uw_per_dollar_insured,
            r.clawback.uw_invested_funds,
        );
    }
    Ok(out)
}

/// One data row of a sweep CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    pub rho: f64,
    pub bank_baseline: f64,
    pub bank_clawback: f64,
    pub uw_per_dollar_baseline: f64,
    pub uw_per_dollar_clawback: f64,
    pub uw_invested: f64,
}

impl From<&SweepRow> for SweepRecord {
    fn from(r: &SweepRow) -> Self {
        Self {
            rho: r.rho,
            bank_baseline: r.baseline.bank_multiple,
            bank_clawback: r.clawback.bank_multiple,
            uw_per_dollar_baseline: r.baseline.uw_per_dollar_insured,
            uw_per_dollar_clawback: r.clawback.uw_per_dollar_insured,
            uw_invested: r.clawback.uw_invested_funds,
        }
    }
}

/// Reads the data rows of a sweep CSV, skipping metadata.
pub fn parse_sweep_csv(text: &str) -> Result<Vec<SweepRecord>, CliError> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    if lines.next() != Some(SWEEP_HEADER) {
        return Err(CliError::Run("missing sweep header".into()));
    }
    lines
        .map(|line| {
            let v: Vec<f64> = line
                .split(',')
                .map(|s| s.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| CliError::Run(format!("bad sweep row {line:?}")))?;
            match v[..] {
                [rho, bb, bc, ub, uc, inv] => Ok(SweepRecord {
                    rho,
                    bank_baseline: bb,
                    bank_clawback: bc,
                    uw_per_dollar_baseline: ub,
                    uw_per_dollar_clawback: uc,
                    uw_invested: inv,
                }),
                _ => Err(CliError::Run(format!("bad sweep row {line:?}"))),
            }
        })
        .collect()
}

/// Fits the configured anchors, then solves the break-even lien rate on the
/// fitted knobs.
pub fn cmd_calibrate(cfg: &RunConfig) -> Result<CalibrationReport, CliError> {
    let c = &cfg.calibrate;
    let mut report = fit_anchors(&cfg.model, &cfg.anchors, &c.free, &c.bounds)
        .map_err(|e| CliError::Config(e.to_string()))?;
    report.clawback_rate_solved = solve_clawback_rate(&report.params, c.epsilon).ok();
    Ok(report)
}

fn summary_block(out: &mut String, name: &str, s: &Summary) {
    let _ = writeln!(out, "# summary.{name}.count = {}", s.count);
    let _ = writeln!(out, "# summary.{name}.mean = {}", s.mean);
    for (q, v) in [
        ("q05", s.q05),
        ("q25", s.q25),
        ("q50", s.q50),
        ("q75", s.q75),
        ("q95", s.q95),
    ] {
        let _ = writeln!(out, "# summary.{name}.{q} = {v}");
    }
    let _ = writeln!(
        out,
        "# summary.{name}.past_break_even = {}",
        s.past_break_even
    );
}

pub struct McOutput {
    pub runs: Vec<FundRun>,
    pub bank_baseline: Summary,
    pub bank_clawback: Summary,
    pub uw_net: Summary,
    pub csv: String,
}

/// Per-fund CSV followed by a `#` summary block.
pub fn cmd_mc(cfg: &RunConfig) -> Result<McOutput, CliError> {
    let dist = cfg.distribution()?;
    let runs =
        montecarlo::run(&cfg.sim_config(), &dist).map_err(|e| CliError::Config(e.to_string()))?;
    let col = |f: fn(&FundRun) -> f64| runs.iter().map(f).collect::<Vec<_>>();
    let summarize =
        |v: Vec<f64>| montecarlo::summarize(&v).map_err(|e| CliError::Run(e.to_string()));
    let bank_baseline = summarize(col(|r| r.bank_baseline))?;
    let bank_clawback = summarize(col(|r| r.bank_clawback))?;
    let uw_net = summarize(col(|r| r.uw_net))?;

    let mut csv = String::from("# dinsim mc\n");
    let _ = writeln!(csv, "# mc.seed = {}", cfg.mc.seed);
    let _ = writeln!(csv, "# mc.n_funds = {}", cfg.mc.n_funds);
    let _ = writeln!(
        csv,
        "# mc.investments_per_fund = {}",
        cfg.mc.investments_per_fund
    );
    let _ = writeln!(csv, "# mc.distribution = {dist:?}");
    params_metadata(&mut csv, &cfg.model);
    csv.push_str(MC_HEADER);
    csv.push('\n');
    for r in &runs {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            r.fund, r.rho, r.bank_baseline, r.bank_clawback, r.uw_net
        );
    }
    summary_block(&mut csv, "bank_baseline", &bank_baseline);
    summary_block(&mut csv, "bank_clawback", &bank_clawback);
    summary_block(&mut csv, "uw_net", &uw_net);
    Ok(McOutput {
        runs,
        bank_baseline,
        bank_clawback,
        uw_net,
        csv,
    })
}
