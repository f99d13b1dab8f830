//! Instrument definitions and single-contract arithmetic.
//!
//! A default insurance note (DIN) insures one investment administered as a
//! bank loan. On default the insured party receives the face value and the
//! asset's title moves to the underwriter. Survivors pay the underwriter an
//! equity share at closeout. A clawback lien attached to each payout returns
//! part of the payment, growing monthly until it equals the whole payment.

use crate::money::Money;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ContractError {
    #[error("invalid contract: {0}")]
    Invalid(&'static str),
    #[error("asset value {asset} is not below face {face}; no default occurred")]
    NotInDefault { asset: Money, face: Money },
    #[error("investment allocation must be positive")]
    ZeroAllocation,
}

pub const DEFAULT_PREMIUM_RATE: f64 = 0.05;
pub const DEFAULT_EQUITY_SHARE: f64 = 0.50;
pub const DEFAULT_COVERAGE: f64 = 1.0;
/// Clawback lien rate used for the reference model runs.
pub const REFERENCE_CLAWBACK_RATE: f64 = 0.623;

fn is_fraction(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DinContract {
    face: Money,
    premium_rate: f64,
    equity_share: f64,
    coverage: f64,
    term_years: u32,
}

impl DinContract {
    pub fn new(
        face: Money,
        premium_rate: f64,
        equity_share: f64,
        coverage: f64,
        term_years: u32,
    ) -> Result<Self, ContractError> {
        if face <= Money::ZERO {
            return Err(ContractError::Invalid("face must be positive"));
        }
        if !is_fraction(premium_rate) {
            return Err(ContractError::Invalid("premium rate must lie in [0, 1]"));
        }
        if !is_fraction(equity_share) {
            return Err(ContractError::Invalid("equity share must lie in [0, 1]"));
        }
        if !(coverage > 0.0 && coverage <= 1.0) {
            return Err(ContractError::Invalid("coverage must lie in (0, 1]"));
        }
        if term_years == 0 {
            return Err(ContractError::Invalid("term must be at least one year"));
        }
        Ok(Self {
            face,
            premium_rate,
            equity_share,
            coverage,
            term_years,
        })
    }

    /// Contract on `face` with the reference terms: 5% premium, 50% equity,
    /// full coverage.
    pub fn with_defaults(face: Money, term_years: u32) -> Result<Self, ContractError> {
        Self::new(
            face,
            DEFAULT_PREMIUM_RATE,
            DEFAULT_EQUITY_SHARE,
            DEFAULT_COVERAGE,
            term_years,
        )
    }

    pub fn face(&self) -> Money {
        self.face
    }

    pub fn premium_rate(&self) -> f64 {
        self.premium_rate
    }

    pub fn equity_share(&self) -> f64 {
        self.equity_share
    }

    pub fn coverage(&self) -> f64 {
        self.coverage
    }

    pub fn term_years(&self) -> u32 {
        self.term_years
    }

    /// Insured amount, face × coverage.
    pub fn insured_amount(&self) -> Money {
        self.face.scale(self.coverage)
    }
}

pub fn annual_premium(contract: &DinContract) -> Money {
    contract
        .face
        .scale(contract.premium_rate * contract.coverage)
}

/// Settles a default: returns `(insured_receives, underwriter_receives_asset)`.
pub fn din_payout(
    contract: &DinContract,
    asset_value_at_default: Money,
) -> Result<(Money, Money), ContractError> {
    if asset_value_at_default.is_negative() {
        return Err(ContractError::Invalid("asset value must be non-negative"));
    }
    if asset_value_at_default >= contract.face {
        return Err(ContractError::NotInDefault {
            asset: asset_value_at_default,
            face: contract.face,
        });
    }
    Ok((contract.insured_amount(), asset_value_at_default))
}

/// Underwriter's share of a surviving investment's equity at closeout.
pub fn closeout_equity_share(contract: &DinContract, equity_value: Money) -> Money {
    equity_value.scale(contract.equity_share)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LienState {
    NegotiationWindow,
    Accruing,
    Settled,
    Bankrupt,
}

impl LienState {
    pub fn is_closed(self) -> bool {
        matches!(self, LienState::Settled | LienState::Bankrupt)
    }
}

/// Shape of the lien's growth from its initial fraction to the full payment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AccrualSchedule {
    /// Equal monthly steps.
    #[default]
    Linear,
}

impl AccrualSchedule {
    /// Fraction of the payment owed after `months`, never above 1.
    pub fn fraction(self, initial: f64, months: u32, horizon_months: u32) -> f64 {
        if months >= horizon_months {
            return 1.0;
        }
        match self {
            AccrualSchedule::Linear => {
                let progress = f64::from(months) / f64::from(horizon_months);
                (initial + (1.0 - initial) * progress).min(1.0)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClawbackLien {
    pub payment_value: Money,
    pub initial_fraction: f64,
    pub accrual_horizon_months: u32,
    pub months_elapsed: u32,
    pub state: LienState,
    pub schedule: AccrualSchedule,
}

impl ClawbackLien {
    pub fn new(
        payment_value: Money,
        initial_fraction: f64,
        accrual_horizon_months: u32,
    ) -> Result<Self, ContractError> {
        if payment_value.is_negative() {
            return Err(ContractError::Invalid("payment value must be non-negative"));
        }
        if !is_fraction(initial_fraction) {
            return Err(ContractError::Invalid("clawback rate must lie in [0, 1]"));
        }
        if accrual_horizon_months == 0 {
            return Err(ContractError::Invalid("accrual horizon must be positive"));
        }
        Ok(Self {
            payment_value,
            initial_fraction,
            accrual_horizon_months,
            months_elapsed: 0,
            state: LienState::NegotiationWindow,
            schedule: AccrualSchedule::Linear,
        })
    }

    pub fn accrued(&self) -> Money {
        lien_value(self, self.months_elapsed)
    }
}

/// Value of the lien after `months` of accrual.
pub fn lien_value(lien: &ClawbackLien, months: u32) -> Money {
    if months >= lien.accrual_horizon_months {
        return lien.payment_value;
    }
    let fraction =
        lien.schedule
            .fraction(lien.initial_fraction, months, lien.accrual_horizon_months);
    lien.payment_value.scale(fraction).min(lien.payment_value)
}

#[derive(Debug, Clone, PartialEq)]
pub enum SettlementOffer {
    Cash {
        cash_amount: Money,
    },
    /// Transfer of part of one of the firm's investments.
    EquityTransfer {
        policy_amount: Money,
        investment_allocation: Money,
    },
}

/// Ownership share of a named investment transferred to the underwriter,
/// capped at the whole allocation.
pub fn equity_settlement_share(
    policy_amount: Money,
    investment_allocation: Money,
) -> Result<f64, ContractError> {
    if investment_allocation.is_zero() {
        return Err(ContractError::ZeroAllocation);
    }
    if investment_allocation.is_negative() || policy_amount.is_negative() {
        return Err(ContractError::Invalid(
            "settlement amounts must be non-negative",
        ));
    }
    Ok(policy_amount.ratio(investment_allocation).min(1.0))
}

/// Return multiple of the bundled-loan play: sell the loans at par, keep the
/// insurance, collect face on every default, pay the premiums.
pub fn bundled_loan_scenario(default_fraction: f64, premium_fraction: f64) -> f64 {
    1.0 + default_fraction - premium_fraction
}
