//! Calibration of the cohort model.
//!
//! Two kinds of solve live here. [`solve_clawback_rate`] finds the smallest
//! lien rate at which the underwriter breaks even when every investment
//! fails. [`fit_anchors`] searches free model knobs so the model reproduces
//! a set of quantitative targets, and reports a residual for every target
//! whether it was met or not.
//!
//! The fit objective has kinks (liability caps, invested-funds floors), so
//! it uses a grid followed by a halving coordinate search rather than
//! gradients.

use std::cmp::Ordering;
use std::fmt::Write as _;

use crate::model::{
    self, bank_return, default_grid, perverse_incentive_gap, underwriter_cashflow, ModelError,
    ModelParams, ReserveRule,
};
use crate::money::Money;

pub const CLAWBACK_TOL: f64 = 1e-6;
pub const RHO_STAR_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CalibrateError {
    #[error("target not reachable: value at the upper bracket is {at_upper} (< {target})")]
    NotBracketed { at_upper: f64, target: f64 },
    #[error("objective is not monotone over the bracket")]
    NotMonotone,
    #[error("invested funds stay positive across the whole grid")]
    NoCrossing,
    #[error("invested funds increase with rho; crossing is ill-defined")]
    NonMonotoneInvested,
    #[error("infeasible bounds: {0}")]
    InfeasibleBounds(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Smallest `x` in `[0, 1]` with `f(x) >= target`, for non-decreasing `f`.
pub fn solve_threshold<F>(f: F, target: f64) -> Result<f64, CalibrateError>
where
    F: Fn(f64) -> f64,
{
    let samples: Vec<f64> = (0..=10).map(|i| f(f64::from(i) / 10.0)).collect();
    let slack = 1e-12 * samples.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    if samples.windows(2).any(|w| w[1] < w[0] - slack) {
        return Err(CalibrateError::NotMonotone);
    }
    if samples[0] >= target {
        return Ok(0.0);
    }
    if samples[10] < target {
        return Err(CalibrateError::NotBracketed {
            at_upper: samples[10],
            target,
        });
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo >= CLAWBACK_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Underwriter's contractual net at total failure for lien rate `rate`, in
/// money units. The firm is assumed to pay the lien in full.
pub fn contractual_net_at_zero(params: &ModelParams, rate: f64) -> f64 {
    let p = ModelParams {
        clawback_rate: rate,
        limited_liability: false,
        ..params.clone()
    };
    underwriter_cashflow(&p, 0.0).net * params.original_capital.to_f64()
}

/// Smallest lien rate that leaves the underwriter at least `epsilon` ahead
/// when the whole portfolio goes to zero.
pub fn solve_clawback_rate(params: &ModelParams, epsilon: Money) -> Result<f64, CalibrateError> {
    params.validate()?;
    solve_threshold(|l| contractual_net_at_zero(params, l), epsilon.to_f64())
}

/// First `rho` on `grid` where `invested(rho)` reaches zero, refined by
/// bisection against the previous grid point.
pub fn find_zero_crossing<F>(invested: F, grid: &[f64]) -> Result<f64, CalibrateError>
where
    F: Fn(f64) -> f64,
{
    let values: Vec<f64> = grid.iter().map(|&r| invested(r)).collect();
    let slack = 1e-12 * values.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    if values.windows(2).any(|w| w[1] > w[0] + slack) {
        return Err(CalibrateError::NonMonotoneInvested);
    }
    let first = values
        .iter()
        .position(|&v| v <= 0.0)
        .ok_or(CalibrateError::NoCrossing)?;
    if first == 0 {
        return Ok(grid[0]);
    }
    let (mut lo, mut hi) = (grid[first - 1], grid[first]);
    while hi - lo >= RHO_STAR_TOL {
        let mid = 0.5 * (lo + hi);
        if invested(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Return at which the underwriter stops carrying invested funds.
pub fn find_rho_star(params: &ModelParams) -> Result<f64, CalibrateError> {
    params.validate()?;
    find_zero_crossing(
        |r| underwriter_cashflow(params, r).invested_funds,
        &default_grid(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AnchorKind {
    /// Baseline bank multiple at total failure.
    BankAtZero,
    /// Baseline gain from total failure over a top portfolio.
    IncentiveGap,
    /// Return at which invested funds reach zero.
    RhoStar,
    /// Break-even clawback lien rate.
    ClawbackRate,
}

impl AnchorKind {
    pub fn key(self) -> &'static str {
        match self {
            AnchorKind::BankAtZero => "bank_at_zero",
            AnchorKind::IncentiveGap => "gap",
            AnchorKind::RhoStar => "rho_star",
            AnchorKind::ClawbackRate => "clawback_rate",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        [
            AnchorKind::BankAtZero,
            AnchorKind::IncentiveGap,
            AnchorKind::RhoStar,
            AnchorKind::ClawbackRate,
        ]
        .into_iter()
        .find(|k| k.key() == key)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Anchor {
    pub kind: AnchorKind,
    pub label: String,
    pub target: f64,
    pub tolerance: f64,
}

impl Anchor {
    pub fn new(kind: AnchorKind, label: &str, target: f64, tolerance: f64) -> Self {
        Self {
            kind,
            label: label.to_string(),
            target,
            tolerance,
        }
    }
}

/// Ordered targets; earlier anchors take priority when not all can be met.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSet {
    pub anchors: Vec<Anchor>,
}

impl AnchorSet {
    pub fn new(anchors: Vec<Anchor>) -> Result<Self, CalibrateError> {
        if anchors.is_empty() {
            return Err(CalibrateError::InfeasibleBounds("empty anchor set".into()));
        }
        if anchors
            .iter()
            .any(|a| !(a.tolerance > 0.0 && a.target.is_finite()))
        {
            return Err(CalibrateError::InfeasibleBounds(
                "anchor tolerances must be positive".into(),
            ));
        }
        Ok(Self { anchors })
    }

    /// The four reference targets.
    pub fn reference() -> Self {
        Self {
            anchors: vec![
                Anchor::new(AnchorKind::BankAtZero, "29X", 29.0, 0.5),
                Anchor::new(AnchorKind::IncentiveGap, "64%", 0.64, 0.05),
                Anchor::new(AnchorKind::RhoStar, "2.27-2.28", 2.275, 0.005),
                Anchor::new(AnchorKind::ClawbackRate, "62.3%", 0.623, 0.02),
            ],
        }
    }

    fn needs(&self, kind: AnchorKind) -> bool {
        self.anchors.iter().any(|a| a.kind == kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Knob {
    Moc,
    DealDuration,
    WinnerMultiple,
    FundsCost,
    ReserveRule,
}

impl Knob {
    pub fn key(self) -> &'static str {
        match self {
            Knob::Moc => "moc",
            Knob::DealDuration => "deal_duration_years",
            Knob::WinnerMultiple => "winner_multiple",
            Knob::FundsCost => "funds_cost_rate",
            Knob::ReserveRule => "reserve_rule",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        [
            Knob::Moc,
            Knob::DealDuration,
            Knob::WinnerMultiple,
            Knob::FundsCost,
            Knob::ReserveRule,
        ]
        .into_iter()
        .find(|k| k.key() == key)
    }

    fn get(self, p: &ModelParams) -> f64 {
        match self {
            Knob::Moc => p.moc,
            Knob::DealDuration => p.deal_duration_years,
            Knob::WinnerMultiple => p.winner_multiple,
            Knob::FundsCost => p.funds_cost_rate,
            Knob::ReserveRule => f64::NAN,
        }
    }

    fn set(self, p: &mut ModelParams, v: f64) {
        match self {
            Knob::Moc => p.moc = v,
            Knob::DealDuration => p.deal_duration_years = v,
            Knob::WinnerMultiple => p.winner_multiple = v,
            Knob::FundsCost => p.funds_cost_rate = v,
            Knob::ReserveRule => {}
        }
    }
}

/// Knobs fitted when none are named. The funds cost rate stays at its base
/// value so the underwriter floor at zero return holds.
pub const DEFAULT_FREE: [Knob; 4] = [
    Knob::Moc,
    Knob::DealDuration,
    Knob::WinnerMultiple,
    Knob::ReserveRule,
];

/// Search box for the continuous knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct FitBounds {
    pub moc: (f64, f64),
    pub deal_duration_years: (f64, f64),
    pub winner_multiple: (f64, f64),
    pub funds_cost_rate: (f64, f64),
    /// Grid points per continuous knob before refinement.
    pub grid_points: usize,
}

impl Default for FitBounds {
    fn default() -> Self {
        Self {
            moc: (model::MOC_LOW, model::MOC_MAX),
            deal_duration_years: (0.5, 10.0),
            winner_multiple: (1.0, 4.0),
            funds_cost_rate: (0.0, 0.10),
            grid_points: 9,
        }
    }
}

impl FitBounds {
    fn range(&self, knob: Knob) -> (f64, f64) {
        match knob {
            Knob::Moc => self.moc,
            Knob::DealDuration => self.deal_duration_years,
            Knob::WinnerMultiple => self.winner_multiple,
            Knob::FundsCost => self.funds_cost_rate,
            Knob::ReserveRule => (0.0, 0.0),
        }
    }

    fn check(&self, base: &ModelParams, free: &[Knob]) -> Result<(), CalibrateError> {
        let bad = |msg: String| Err(CalibrateError::InfeasibleBounds(msg));
        if self.grid_points < 2 {
            return bad("need at least two grid points per knob".into());
        }
        for &k in free.iter().filter(|k| **k != Knob::ReserveRule) {
            let (lo, hi) = self.range(k);
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return bad(format!("{}: empty range [{lo}, {hi}]", k.key()));
            }
            let inside = match k {
                Knob::Moc => lo >= model::MOC_MIN && hi <= model::MOC_MAX,
                Knob::DealDuration => lo > 0.0 && hi <= f64::from(base.horizon_years),
                Knob::WinnerMultiple => lo > 0.0,
                Knob::FundsCost => lo >= 0.0,
                Knob::ReserveRule => true,
            };
            if !inside {
                return bad(format!(
                    "{}: [{lo}, {hi}] violates parameter bounds",
                    k.key()
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnchorResidual {
    pub anchor: Anchor,
    /// Model value, absent when the measurement itself failed.
    pub value: Option<f64>,
    /// `value - target`; infinite when the value is absent.
    pub residual: f64,
    pub hit: bool,
}

impl AnchorResidual {
    pub fn normalized(&self) -> f64 {
        self.residual.abs() / self.anchor.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport {
    pub params: ModelParams,
    pub residuals: Vec<AnchorResidual>,
    pub converged: bool,
    pub iterations: usize,
    /// Break-even lien rate on the fitted knobs, when solved.
    pub clawback_rate_solved: Option<f64>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |x| x.to_string())
}

impl CalibrationReport {
    pub fn residual(&self, kind: AnchorKind) -> Option<&AnchorResidual> {
        self.residuals.iter().find(|r| r.anchor.kind == kind)
    }

    /// `key = value` lines.
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("converged", self.converged.to_string());
        kv("iterations", self.iterations.to_string());
        kv("clawback_rate_solved", fmt_opt(self.clawback_rate_solved));
        kv("model.original_capital", p.original_capital.to_string());
        kv("model.moc", p.moc.to_string());
        kv("model.horizon_years", p.horizon_years.to_string());
        kv(
            "model.deal_duration_years",
            p.deal_duration_years.to_string(),
        );
        kv("model.premium_rate", p.premium_rate.to_string());
        kv("model.equity_share", p.equity_share.to_string());
        kv("model.clawback_rate", p.clawback_rate.to_string());
        kv("model.coverage", p.coverage.to_string());
        kv("model.funds_cost_rate", p.funds_cost_rate.to_string());
        kv("model.winner_multiple", p.winner_multiple.to_string());
        kv("model.limited_liability", p.limited_liability.to_string());
        kv("model.reserve_rule", p.reserve_rule.name().to_string());
        for (i, r) in self.residuals.iter().enumerate() {
            let prefix = format!("anchor.{i}");
            kv(&format!("{prefix}.kind"), r.anchor.kind.key().to_string());
            kv(&format!("{prefix}.label"), r.anchor.label.clone());
            kv(&format!("{prefix}.target"), r.anchor.target.to_string());
            kv(
                &format!("{prefix}.tolerance"),
                r.anchor.tolerance.to_string(),
            );
            kv(&format!("{prefix}.value"), fmt_opt(r.value));
            kv(&format!("{prefix}.residual"), r.residual.to_string());
            kv(&format!("{prefix}.hit"), r.hit.to_string());
        }
        out
    }
}

fn measure(kind: AnchorKind, params: &ModelParams) -> Option<f64> {
    match kind {
        AnchorKind::BankAtZero => Some(bank_return(&params.baseline(), 0.0)),
        AnchorKind::IncentiveGap => perverse_incentive_gap(params).ok(),
        AnchorKind::RhoStar => find_rho_star(params).ok(),
        AnchorKind::ClawbackRate => solve_clawback_rate(params, Money::ZERO).ok(),
    }
}

/// Residuals of every anchor at `params`.
pub fn evaluate_anchors(anchors: &AnchorSet, params: &ModelParams) -> Vec<AnchorResidual> {
    let kinds = [
        AnchorKind::BankAtZero,
        AnchorKind::IncentiveGap,
        AnchorKind::RhoStar,
        AnchorKind::ClawbackRate,
    ];
    let measured: Vec<(AnchorKind, Option<f64>)> = kinds
        .into_iter()
        .filter(|k| anchors.needs(*k))
        .map(|k| (k, measure(k, params)))
        .collect();
    anchors
        .anchors
        .iter()
        .map(|a| {
            let value = measured.iter().find(|m| m.0 == a.kind).and_then(|m| m.1);
            let residual = value.map_or(f64::INFINITY, |v| v - a.target);
            AnchorResidual {
                anchor: a.clone(),
                value,
                residual,
                hit: residual.abs() <= a.tolerance,
            }
        })
        .collect()
}

/// Fit quality: which anchors are missed (earlier misses are worse), then
/// the worst and summed squared normalized residual over met anchors, then
/// distance to the missed ones.
#[derive(Debug, Clone, PartialEq)]
struct Score {
    misses: Vec<bool>,
    hit_max: f64,
    hit_sumsq: f64,
    miss_max: f64,
}

impl Score {
    fn of(residuals: &[AnchorResidual]) -> Self {
        let mut s = Score {
            misses: residuals.iter().map(|r| !r.hit).collect(),
            hit_max: 0.0,
            hit_sumsq: 0.0,
            miss_max: 0.0,
        };
        for r in residuals {
            let n = r.normalized();
            if r.hit {
                s.hit_max = s.hit_max.max(n);
                s.hit_sumsq += n * n;
            } else {
                s.miss_max = s.miss_max.max(n);
            }
        }
        s
    }

    fn cmp(&self, other: &Self) -> Ordering {
        self.misses
            .cmp(&other.misses)
            .then(self.hit_max.total_cmp(&other.hit_max))
            .then(self.hit_sumsq.total_cmp(&other.hit_sumsq))
            .then(self.miss_max.total_cmp(&other.miss_max))
    }

    fn better_than(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Less
    }
}

fn grid_values(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if hi == lo {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

fn cartesian(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut next = prefix.clone();
                    next.push(v);
                    next
                })
            })
            .collect()
    })
}

fn score_candidates(
    anchors: &AnchorSet,
    candidates: Vec<ModelParams>,
) -> Vec<(ModelParams, Vec<AnchorResidual>, Score)> {
    let eval = |p: ModelParams| {
        let r = evaluate_anchors(anchors, &p);
        let s = Score::of(&r);
        (p, r, s)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        candidates.into_par_iter().map(eval).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        candidates.into_iter().map(eval).collect()
    }
}

const MAX_REFINE_ITERATIONS: usize = 5_000;

/// Fits the free knobs of `base` to `anchors`.
pub fn fit_anchors(
    base: &ModelParams,
    anchors: &AnchorSet,
    free: &[Knob],
    bounds: &FitBounds,
) -> Result<CalibrationReport, CalibrateError> {
    base.validate()?;
    if free.is_empty() {
        return Err(CalibrateError::InfeasibleBounds("no free knobs".into()));
    }
    let anchors = AnchorSet::new(anchors.anchors.clone())?;
    bounds.check(base, free)?;

    let initial = evaluate_anchors(&anchors, base);
    if initial.iter().all(|r| r.hit) {
        return Ok(CalibrationReport {
            params: base.clone(),
            residuals: initial,
            converged: true,
            iterations: 0,
            clawback_rate_solved: None,
        });
    }

    let mut knobs: Vec<Knob> = free
        .iter()
        .copied()
        .filter(|k| *k != Knob::ReserveRule)
        .collect();
    knobs.sort();
    knobs.dedup();
    let rules: Vec<ReserveRule> = if free.contains(&Knob::ReserveRule) {
        ReserveRule::ALL.to_vec()
    } else {
        vec![base.reserve_rule]
    };

    let axes: Vec<Vec<f64>> = knobs
        .iter()
        .map(|&k| {
            let (lo, hi) = bounds.range(k);
            grid_values(lo, hi, bounds.grid_points)
        })
        .collect();
    let points = cartesian(&axes);
    let knob_list = &knobs;
    let candidates: Vec<ModelParams> = rules
        .iter()
        .flat_map(|&rule| {
            points.iter().map(move |values| {
                let mut p = base.clone();
                p.reserve_rule = rule;
                for (k, v) in knob_list.iter().zip(values) {
                    k.set(&mut p, *v);
                }
                p
            })
        })
        .filter(|p| p.validate().is_ok())
        .collect();

    let mut best = (base.clone(), initial.clone(), Score::of(&initial));
    for cand in score_candidates(&anchors, candidates) {
        if cand.2.better_than(&best.2) {
            best = cand;
        }
    }

    let mut steps: Vec<f64> = knobs
        .iter()
        .map(|&k| {
            let (lo, hi) = bounds.range(k);
            (hi - lo) / (bounds.grid_points - 1) as f64 / 2.0
        })
        .collect();
    let floors: Vec<f64> = knobs
        .iter()
        .map(|&k| {
            let (lo, hi) = bounds.range(k);
            ((hi - lo) * 1e-9).max(1e-12)
        })
        .collect();
    let mut iterations = 0;
    while iterations < MAX_REFINE_ITERATIONS && steps.iter().zip(&floors).any(|(s, f)| s > f) {
        iterations += 1;
        let mut improved = false;
        for (i, &k) in knobs.iter().enumerate() {
            let (lo, hi) = bounds.range(k);
            for dir in [1.0, -1.0] {
                let current = k.get(&best.0);
                let v = (current + dir * steps[i]).clamp(lo, hi);
                if v == current {
                    continue;
                }
                let mut p = best.0.clone();
                k.set(&mut p, v);
                if p.validate().is_err() {
                    continue;
                }
                let r = evaluate_anchors(&anchors, &p);
                let s = Score::of(&r);
                if s.better_than(&best.2) {
                    best = (p, r, s);
                    improved = true;
                }
            }
        }
        if !improved {
            steps.iter_mut().for_each(|s| *s *= 0.5);
        }
    }

    let (params, residuals, _) = best;
    let converged = residuals.iter().all(|r| r.hit);
    Ok(CalibrationReport {
        params,
        residuals,
        converged,
        iterations,
        clawback_rate_solved: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StaticsKnob {
    PremiumRate,
    FundsCost,
}

impl StaticsKnob {
    pub fn key(self) -> &'static str {
        match self {
            StaticsKnob::PremiumRate => "premium_rate",
            StaticsKnob::FundsCost => "funds_cost_rate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Increases,
    Decreases,
    Unchanged,
}

/// Response of the break-even lien rate to one knob.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sensitivity {
    pub knob: StaticsKnob,
    pub base_value: f64,
    pub down_value: f64,
    pub up_value: f64,
    pub rate_down: f64,
    pub rate_base: f64,
    pub rate_up: f64,
    /// Direction of the lien rate when the knob goes up.
    pub direction: Direction,
}

/// Absolute perturbation used when a knob sits at zero: the relative step
/// applied to a 1% reference rate.
const ZERO_BASE_REFERENCE: f64 = 0.01;

pub fn comparative_statics(params: &ModelParams) -> Result<Vec<Sensitivity>, CalibrateError> {
    comparative_statics_with(params, 0.10)
}

/// Break-even lien rate at `base × (1 ± relative_step)` for the premium
/// rate and the funds cost rate.
pub fn comparative_statics_with(
    params: &ModelParams,
    relative_step: f64,
) -> Result<Vec<Sensitivity>, CalibrateError> {
    params.validate()?;
    [StaticsKnob::PremiumRate, StaticsKnob::FundsCost]
        .into_iter()
        .map(|knob| {
            let base_value = match knob {
                StaticsKnob::PremiumRate => params.premium_rate,
                StaticsKnob::FundsCost => params.funds_cost_rate,
            };
            let delta = if base_value == 0.0 {
                relative_step * ZERO_BASE_REFERENCE
            } else {
                relative_step * base_value
            };
            let down_value = (base_value - delta).max(0.0);
            let up_value = base_value + delta;
            let at = |v: f64| {
                let mut p = params.clone();
                match knob {
                    StaticsKnob::PremiumRate => p.premium_rate = v,
                    StaticsKnob::FundsCost => p.funds_cost_rate = v,
                }
                solve_clawback_rate(&p, Money::ZERO)
            };
            let rate_base = at(base_value)?;
            let rate_down = at(down_value)?;
            let rate_up = at(up_value)?;
            let direction = if rate_up > rate_base + 10.0 * CLAWBACK_TOL {
                Direction::Increases
            } else if rate_up < rate_base - 10.0 * CLAWBACK_TOL {
                Direction::Decreases
            } else {
                Direction::Unchanged
            };
            Ok(Sensitivity {
                knob,
                base_value,
                down_value,
                up_value,
                rate_down,
                rate_base,
                rate_up,
                direction,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn threshold_on_analytic_root() {
        let l = solve_threshold(|x| x - 0.5, 0.0).unwrap();
        assert_abs_diff_eq!(l, 0.5, epsilon = 1e-6);
    }

    #[test]
    fn threshold_errors() {
        assert!(matches!(
            solve_threshold(|x| x - 2.0, 0.0),
            Err(CalibrateError::NotBracketed { .. })
        ));
        assert_eq!(
            solve_threshold(|x| (x - 0.5).abs() - 0.2, 0.0),
            Err(CalibrateError::NotMonotone)
        );
        assert_eq!(solve_threshold(|x| x + 1.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn clawback_rate_on_linear_regime() {
        // contractual net at total failure is L - 0.5 per unit face
        let p = ModelParams::default();
        assert_abs_diff_eq!(contractual_net_at_zero(&p, 0.0), -15.0, epsilon = 1e-9);
        assert_abs_diff_eq!(contractual_net_at_zero(&p, 1.0), 15.0, epsilon = 1e-9);
        let l = solve_clawback_rate(&p, Money::ZERO).unwrap();
        assert_abs_diff_eq!(l, 0.5, epsilon = 1e-6);
    }

    #[test]
    fn clawback_rate_bracket_property() {
        let p = ModelParams {
            funds_cost_rate: 0.03,
            deal_duration_years: 7.0,
            ..ModelParams::default()
        };
        let l = solve_clawback_rate(&p, Money::ZERO).unwrap();
        assert!(contractual_net_at_zero(&p, l - 1e-5) < 0.0);
        assert!(contractual_net_at_zero(&p, l + 1e-5) >= 0.0);
    }

    #[test]
    fn clawback_rate_not_bracketed() {
        let p = ModelParams {
            funds_cost_rate: 0.2,
            ..ModelParams::default()
        };
        assert!(matches!(
            solve_clawback_rate(&p, Money::ZERO),
            Err(CalibrateError::NotBracketed { .. })
        ));
    }

    #[test]
    fn zero_crossing_examples() {
        let grid = default_grid();
        let r = find_zero_crossing(|rho| (1.0 - rho / 2.0).max(0.0), &grid).unwrap();
        assert_abs_diff_eq!(r, 2.0, epsilon = 1e-9);
        assert_eq!(find_zero_crossing(|_| 0.0, &grid).unwrap(), 0.0);
        assert_eq!(
            find_zero_crossing(|_| 1.0, &grid),
            Err(CalibrateError::NoCrossing)
        );
        assert_eq!(
            find_zero_crossing(|rho| rho, &grid),
            Err(CalibrateError::NonMonotoneInvested)
        );
        let off_grid = find_zero_crossing(|rho| (2.2751 - rho).max(0.0), &grid).unwrap();
        assert_abs_diff_eq!(off_grid, 2.2751, epsilon = 1e-5);
    }

    #[test]
    fn rho_star_is_product_of_winner_and_premium_margin() {
        // invested funds = max(0, w - pD) F crosses zero at g (1 - pD)
        let p = ModelParams {
            deal_duration_years: 4.0,
            winner_multiple: 1.8,
            ..ModelParams::default()
        };
        assert_abs_diff_eq!(find_rho_star(&p).unwrap(), 1.8 * 0.8, epsilon = 1e-5);
    }

    #[test]
    fn single_anchor_fit_solves_closed_form() {
        let anchors =
            AnchorSet::new(vec![Anchor::new(AnchorKind::BankAtZero, "29X", 29.0, 0.5)]).unwrap();
        let base = ModelParams::default();
        let report = fit_anchors(
            &base,
            &anchors,
            &[Knob::Moc, Knob::DealDuration],
            &FitBounds::default(),
        )
        .unwrap();
        assert!(report.converged);
        let p = &report.params;
        assert_abs_diff_eq!(
            p.moc * (1.0 - 0.05 * p.deal_duration_years),
            29.0,
            epsilon = 1e-3
        );
        assert!(report.residuals[0].residual.abs() < 1e-3);
    }

    #[test]
    fn satisfied_anchors_need_no_refinement() {
        let anchors =
            AnchorSet::new(vec![Anchor::new(AnchorKind::BankAtZero, "15X", 15.0, 0.5)]).unwrap();
        let report = fit_anchors(
            &ModelParams::default(),
            &anchors,
            &[Knob::Moc],
            &FitBounds::default(),
        )
        .unwrap();
        assert!(report.converged);
        assert_eq!(report.iterations, 0);
        assert_eq!(report.params, ModelParams::default());
    }

    #[test]
    fn contradictory_anchors_reported() {
        let anchors = AnchorSet::new(vec![
            Anchor::new(AnchorKind::BankAtZero, "29X", 29.0, 0.5),
            Anchor::new(AnchorKind::BankAtZero, "40X", 40.0, 0.5),
        ])
        .unwrap();
        let report = fit_anchors(
            &ModelParams::default(),
            &anchors,
            &[Knob::Moc, Knob::DealDuration],
            &FitBounds::default(),
        )
        .unwrap();
        assert!(!report.converged);
        assert_eq!(report.residuals.len(), 2);
        assert!(report.residuals[0].hit);
        assert!(!report.residuals[1].hit);
        assert!(report.residuals.iter().all(|r| r.residual.is_finite()));
    }

    #[test]
    fn fit_argument_errors() {
        let anchors = AnchorSet::reference();
        let base = ModelParams::default();
        assert!(matches!(
            fit_anchors(&base, &anchors, &[], &FitBounds::default()),
            Err(CalibrateError::InfeasibleBounds(_))
        ));
        let inverted = FitBounds {
            moc: (40.0, 30.0),
            ..FitBounds::default()
        };
        assert!(fit_anchors(&base, &anchors, &[Knob::Moc], &inverted).is_err());
        let outside = FitBounds {
            moc: (1.0, 30.0),
            ..FitBounds::default()
        };
        assert!(fit_anchors(&base, &anchors, &[Knob::Moc], &outside).is_err());
        assert!(AnchorSet::new(vec![Anchor::new(AnchorKind::RhoStar, "x", 1.0, 0.0)]).is_err());
    }

    #[test]
    fn report_text_lists_every_anchor() {
        let base = ModelParams::default();
        let anchors = AnchorSet::reference();
        let report = CalibrationReport {
            params: base.clone(),
            residuals: evaluate_anchors(&anchors, &base),
            converged: false,
            iterations: 3,
            clawback_rate_solved: Some(0.5),
        };
        let text = report.to_text();
        for label in ["29X", "64%", "2.27-2.28", "62.3%"] {
            assert!(text.contains(&format!("= {label}\n")), "{label}");
        }
        assert!(text.contains("clawback_rate_solved = 0.5\n"));
        assert!(text.lines().all(|l| l.contains(" = ")));
    }

    #[test]
    fn statics_signs_on_default_regime() {
        let table = comparative_statics(&ModelParams::default()).unwrap();
        let premium = table
            .iter()
            .find(|s| s.knob == StaticsKnob::PremiumRate)
            .unwrap();
        let funds = table
            .iter()
            .find(|s| s.knob == StaticsKnob::FundsCost)
            .unwrap();
        assert_abs_diff_eq!(premium.up_value, 0.055, epsilon = 1e-12);
        assert_eq!(premium.direction, Direction::Decreases);
        assert_eq!(funds.direction, Direction::Increases);
    }

    #[test]
    fn statics_zero_step_unchanged() {
        let table = comparative_statics_with(&ModelParams::default(), 0.0).unwrap();
        assert!(table.iter().all(|s| s.direction == Direction::Unchanged));
        assert!(table.iter().all(|s| s.rate_up == s.rate_base));
    }
}
