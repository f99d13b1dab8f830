//! Closed-form cohort model of a venture bank and its DIN underwriter.
//!
//! One cohort of insured investments with total face `F = moc × capital` is
//! written at year 0 and closed out at year `D`. The cohort's outcome is a
//! discrete set of exit multiples whose weighted mean is the conventional
//! portfolio return `rho`. Investments exiting below face default: the bank
//! collects the insured face and the underwriter takes the asset. Survivors
//! split their exit value, `1 - e` to the bank and `e` to the underwriter.
//! Premiums run for the full `D` years on every contract.
//!
//! With a clawback lien at rate `L`, the bank owes back `L` of every payout.
//! Under limited liability the repayment is capped by the bank's positive
//! position.
//!
//! All amounts here are multiples of original capital unless noted.

use crate::money::Money;

pub const MOC_MIN: f64 = 2.0;
pub const MOC_MAX: f64 = 47.0;
pub const MOC_LOW: f64 = 30.0;
pub const MOC_HIGH: f64 = 43.0;

/// Top of the normal portfolio-return range.
pub const RHO_TOP: f64 = 1.5;
/// Normal range of total portfolio returns, shaded on the return charts.
pub const NORMAL_RANGE: (f64, f64) = (0.9, 1.5);
/// Range where the underwriter carries no invested funds.
pub const ZERO_FUNDS_RANGE: (f64, f64) = (2.27, 8.0);

pub const DEFAULT_GRID_MAX: f64 = 8.0;
pub const DEFAULT_GRID_STEP: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("multiple of original capital {0} outside [2, 47]")]
    MocOutOfRange(f64),
    #[error("invalid model parameter: {0}")]
    Invalid(&'static str),
    #[error("rho grid must be finite, non-negative and sorted")]
    InvalidGrid,
    #[error("bank return at the top of the normal range is {0}, not positive")]
    NonPositiveDenominator(f64),
    #[error("bad outcome template: {0}")]
    BadTemplate(&'static str),
}

/// How the underwriter sizes the funds it must carry against payouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ReserveRule {
    /// Expected payouts held from inception, offset by premiums collected.
    #[default]
    ExpectedPayout,
    /// Expected payouts with no premium offset.
    GrossPayout,
    /// Expected payouts net of lien recovery, offset by premiums.
    NetOfRecovery,
}

impl ReserveRule {
    pub const ALL: [ReserveRule; 3] = [
        ReserveRule::ExpectedPayout,
        ReserveRule::GrossPayout,
        ReserveRule::NetOfRecovery,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ReserveRule::ExpectedPayout => "expected_payout",
            ReserveRule::GrossPayout => "gross_payout",
            ReserveRule::NetOfRecovery => "net_of_recovery",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.name() == name)
    }

    /// Funds carried given cohort payouts, premiums and lien recovery.
    pub fn invested_funds(self, payouts: f64, premiums: f64, recovery: f64) -> f64 {
        match self {
            ReserveRule::ExpectedPayout => (payouts - premiums).max(0.0),
            ReserveRule::GrossPayout => payouts.max(0.0),
            ReserveRule::NetOfRecovery => (payouts - recovery - premiums).max(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub original_capital: Money,
    pub moc: f64,
    pub horizon_years: u32,
    pub deal_duration_years: f64,
    pub premium_rate: f64,
    pub equity_share: f64,
    pub clawback_rate: f64,
    pub coverage: f64,
    pub funds_cost_rate: f64,
    pub winner_multiple: f64,
    pub limited_liability: bool,
    pub reserve_rule: ReserveRule,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            original_capital: Money::from_int(1),
            moc: MOC_LOW,
            horizon_years: 10,
            deal_duration_years: 10.0,
            premium_rate: crate::contracts::DEFAULT_PREMIUM_RATE,
            equity_share: crate::contracts::DEFAULT_EQUITY_SHARE,
            clawback_rate: crate::contracts::REFERENCE_CLAWBACK_RATE,
            coverage: crate::contracts::DEFAULT_COVERAGE,
            funds_cost_rate: 0.0,
            winner_multiple: 1.5,
            limited_liability: true,
            reserve_rule: ReserveRule::ExpectedPayout,
        }
    }
}

fn fraction(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(MOC_MIN..=MOC_MAX).contains(&self.moc) {
            return Err(ModelError::MocOutOfRange(self.moc));
        }
        if self.original_capital <= Money::ZERO {
            return Err(ModelError::Invalid("original capital must be positive"));
        }
        if self.horizon_years == 0 {
            return Err(ModelError::Invalid("horizon must be at least one year"));
        }
        if !(self.deal_duration_years > 0.0
            && self.deal_duration_years <= f64::from(self.horizon_years))
        {
            return Err(ModelError::Invalid(
                "deal duration must lie in (0, horizon]",
            ));
        }
        if !fraction(self.premium_rate) {
            return Err(ModelError::Invalid("premium rate must lie in [0, 1]"));
        }
        if !fraction(self.equity_share) {
            return Err(ModelError::Invalid("equity share must lie in [0, 1]"));
        }
        if !fraction(self.clawback_rate) {
            return Err(ModelError::Invalid("clawback rate must lie in [0, 1]"));
        }
        if !(self.coverage > 0.0 && self.coverage <= 1.0) {
            return Err(ModelError::Invalid("coverage must lie in (0, 1]"));
        }
        if !(self.funds_cost_rate >= 0.0 && self.funds_cost_rate.is_finite()) {
            return Err(ModelError::Invalid("funds cost rate must be non-negative"));
        }
        if !(self.winner_multiple > 0.0 && self.winner_multiple.is_finite()) {
            return Err(ModelError::Invalid("winner multiple must be positive"));
        }
        Ok(())
    }

    /// Same parameters with the clawback lien switched off.
    pub fn baseline(&self) -> Self {
        self.with_clawback(0.0)
    }

    pub fn with_clawback(&self, rate: f64) -> Self {
        Self {
            clawback_rate: rate,
            ..self.clone()
        }
    }

    pub fn template(&self) -> OutcomeTemplate {
        OutcomeTemplate::TwoPoint {
            winner_multiple: self.winner_multiple,
        }
    }
}

/// Total DIN-insured face, `moc × original_capital`.
pub fn insured_face(params: &ModelParams) -> Result<Money, ModelError> {
    if !(MOC_MIN..=MOC_MAX).contains(&params.moc) {
        return Err(ModelError::MocOutOfRange(params.moc));
    }
    Ok(params.original_capital.scale(params.moc))
}

/// Distribution of exit multiples across a cohort, realized at any mean.
#[derive(Debug, Clone, PartialEq)]
pub enum OutcomeTemplate {
    /// Losers exit at 0 with weight `1 - rho/g`, winners at `g`. Past
    /// `rho = g` nothing fails and every investment exits at `rho`.
    TwoPoint { winner_multiple: f64 },
    /// Fixed shape of `(multiple, weight)` points rescaled to mean `rho`.
    Empirical(Vec<(f64, f64)>),
}

impl OutcomeTemplate {
    /// Builds an empirical template, normalizing weights to sum to one.
    pub fn empirical(points: Vec<(f64, f64)>) -> Result<Self, ModelError> {
        if points.is_empty() {
            return Err(ModelError::BadTemplate("no points"));
        }
        if points
            .iter()
            .any(|&(m, w)| !(m >= 0.0 && m.is_finite() && w >= 0.0 && w.is_finite()))
        {
            return Err(ModelError::BadTemplate(
                "multiples and weights must be finite and non-negative",
            ));
        }
        let total: f64 = points.iter().map(|p| p.1).sum();
        let mean: f64 = points.iter().map(|p| p.0 * p.1).sum::<f64>();
        if total <= 0.0 || mean <= 0.0 {
            return Err(ModelError::BadTemplate("weights and mean must be positive"));
        }
        Ok(OutcomeTemplate::Empirical(
            points.into_iter().map(|(m, w)| (m, w / total)).collect(),
        ))
    }

    /// `(multiple, weight)` points with weights summing to one and weighted
    /// mean `rho`.
    pub fn points(&self, rho: f64) -> Vec<(f64, f64)> {
        match self {
            OutcomeTemplate::TwoPoint { winner_multiple } => two_point(*winner_multiple, rho),
            OutcomeTemplate::Empirical(points) => {
                let mean: f64 = points.iter().map(|p| p.0 * p.1).sum();
                let k = rho / mean;
                points.iter().map(|&(m, w)| (m * k, w)).collect()
            }
        }
    }
}

fn two_point(g: f64, rho: f64) -> Vec<(f64, f64)> {
    let fail = (1.0 - rho / g).max(0.0);
    vec![(0.0, fail), (g.max(rho), 1.0 - fail)]
}

/// Per-unit-face cash flows of one cohort outcome.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct Cohort {
    payouts: f64,
    recovered_assets: f64,
    bank_equity: f64,
    uw_equity: f64,
    premiums: f64,
}

fn cohort(params: &ModelParams, points: &[(f64, f64)]) -> Cohort {
    let mut c = Cohort {
        premiums: params.premium_rate * params.coverage * params.deal_duration_years,
        ..Cohort::default()
    };
    for &(multiple, weight) in points {
        if multiple < 1.0 {
            c.payouts += params.coverage * weight;
            c.recovered_assets += multiple * weight;
        } else {
            c.bank_equity += (1.0 - params.equity_share) * multiple * weight;
            c.uw_equity += params.equity_share * multiple * weight;
        }
    }
    c
}

/// Both sides of one cohort at one `rho`, in multiples of original capital.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub rho: f64,
    /// Bank position before any lien repayment.
    pub bank_before_clawback: f64,
    pub recovery: f64,
    pub bank_multiple: f64,
    pub uw_net: f64,
    pub uw_invested_funds: f64,
    pub uw_per_dollar_insured: f64,
}

impl Evaluation {
    pub fn uw_return_on_invested(&self) -> Option<f64> {
        (self.uw_invested_funds > 0.0).then(|| self.uw_net / self.uw_invested_funds)
    }
}

/// Evaluates the cohort under `template` at mean return `rho`, using the
/// clawback rate in `params`.
pub fn evaluate(params: &ModelParams, template: &OutcomeTemplate, rho: f64) -> Evaluation {
    let face = params.moc;
    let c = cohort(params, &template.points(rho));
    let bank_before = face * (c.payouts + c.bank_equity - c.premiums);
    let claim = params.clawback_rate * c.payouts * face;
    let recovery = if params.limited_liability {
        claim.min(bank_before.max(0.0))
    } else {
        claim
    };
    let invested =
        params
            .reserve_rule
            .invested_funds(c.payouts * face, c.premiums * face, recovery);
    let carry = params.funds_cost_rate * invested * params.deal_duration_years;
    let uw_net =
        face * (c.premiums + c.uw_equity + c.recovered_assets - c.payouts) + recovery - carry;
    Evaluation {
        rho,
        bank_before_clawback: bank_before,
        recovery,
        bank_multiple: bank_before - recovery,
        uw_net,
        uw_invested_funds: invested,
        uw_per_dollar_insured: uw_net / face,
    }
}

/// Bank's multiple of original capital at closeout, after any lien.
pub fn bank_return(params: &ModelParams, rho: f64) -> f64 {
    evaluate(params, &params.template(), rho).bank_multiple
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnderwriterFlows {
    pub net: f64,
    pub invested_funds: f64,
    pub per_dollar: f64,
    /// Defined only while the underwriter carries invested funds.
    pub return_on_invested: Option<f64>,
}

pub fn underwriter_cashflow(params: &ModelParams, rho: f64) -> UnderwriterFlows {
    let e = evaluate(params, &params.template(), rho);
    UnderwriterFlows {
        net: e.uw_net,
        invested_funds: e.uw_invested_funds,
        per_dollar: e.uw_per_dollar_insured,
        return_on_invested: e.uw_return_on_invested(),
    }
}

/// How much more the bank earns from total failure than from a top
/// portfolio, without the lien.
pub fn perverse_incentive_gap(params: &ModelParams) -> Result<f64, ModelError> {
    let base = params.baseline();
    let top = bank_return(&base, RHO_TOP);
    if !(top > 0.0) {
        return Err(ModelError::NonPositiveDenominator(top));
    }
    Ok(bank_return(&base, 0.0) / top - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub rho: f64,
    pub bank_multiple: f64,
    pub uw_return_on_invested: Option<f64>,
    pub uw_per_dollar_insured: f64,
    pub uw_invested_funds: f64,
}

impl From<Evaluation> for CurvePoint {
    fn from(e: Evaluation) -> Self {
        Self {
            rho: e.rho,
            bank_multiple: e.bank_multiple,
            uw_return_on_invested: e.uw_return_on_invested(),
            uw_per_dollar_insured: e.uw_per_dollar_insured,
            uw_invested_funds: e.uw_invested_funds,
        }
    }
}

/// One grid point evaluated without and with the lien.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub rho: f64,
    pub baseline: CurvePoint,
    pub clawback: CurvePoint,
}

/// Evenly spaced grid from `min` to `max` inclusive. Empty when `max < min`.
pub fn rho_grid(min: f64, max: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || max < min {
        return Vec::new();
    }
    let n = ((max - min) / step + 1e-9).floor() as usize + 1;
    (0..n)
        .map(|i| ((min + i as f64 * step) * 1e10).round() / 1e10)
        .collect()
}

/// `0.00, 0.01, ..., 8.00`.
pub fn default_grid() -> Vec<f64> {
    rho_grid(0.0, DEFAULT_GRID_MAX, DEFAULT_GRID_STEP)
}

pub fn sweep(params: &ModelParams, grid: &[f64]) -> Result<Vec<SweepRow>, ModelError> {
    params.validate()?;
    let sorted = grid.windows(2).all(|w| w[0] <= w[1]);
    if !sorted || grid.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
        return Err(ModelError::InvalidGrid);
    }
    let template = params.template();
    let base = params.baseline();
    Ok(grid
        .iter()
        .map(|&rho| SweepRow {
            rho,
            baseline: evaluate(&base, &template, rho).into(),
            clawback: evaluate(params, &template, rho).into(),
        })
        .collect())
}
