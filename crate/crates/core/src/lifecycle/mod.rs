//! Clawback lien lifecycle after a DIN default.
//!
//! A payout attaches a lien to the insured party. The lien sits at its
//! initial value through the negotiation window, then accrues once per
//! 30-day month until it equals the payout. It ends either settled (cash or
//! an equity transfer) or in bankruptcy, where the lien recovers first from
//! the debtor's assets. Settled and bankrupt cases accept no further
//! transitions.

mod ledger;

pub use ledger::{export_log, parse_log, AccountId, EventTag, Ledger, LedgerEvent, Posting};

use crate::contracts::{
    self, equity_settlement_share, lien_value, ClawbackLien, ContractError, DinContract, LienState,
    SettlementOffer,
};
use crate::money::Money;

pub const DAYS_PER_MONTH: u32 = 30;
pub const DEFAULT_NEGOTIATION_WINDOW_DAYS: u32 = 30;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LifecycleError {
    #[error("expected a DinPayout event, got {0}")]
    WrongEventKind(EventTag),
    #[error("payout event has no underwriter debit and insured credit")]
    MalformedPayout,
    #[error("lien case is closed (state {0:?})")]
    CaseClosed(LienState),
    #[error("cash offer {offered} is below the accrued lien value {owed}")]
    InsufficientCash { offered: Money, owed: Money },
    #[error("investment allocation must be positive")]
    ZeroAllocation,
    #[error("event {tag} on day {day} does not balance (net {net})")]
    Unbalanced { day: u32, tag: EventTag, net: Money },
    #[error(transparent)]
    Contract(#[from] ContractError),
    #[error("bad ledger record: {0}")]
    ParseRecord(String),
}

/// Premium for `years` whole years on one contract, paid by `payer`.
pub fn premium_event(
    contract: &DinContract,
    day: u32,
    payer: AccountId,
    years: u32,
) -> LedgerEvent {
    let amount = contracts::annual_premium(contract).scale(f64::from(years));
    LedgerEvent::transfer(
        day,
        EventTag::PremiumPaid,
        payer,
        AccountId::Underwriter,
        amount,
    )
}

/// Payout to `insured` plus transfer of the defaulted asset to the
/// underwriter. The asset transfer is omitted when the asset is worthless.
pub fn default_events(
    contract: &DinContract,
    asset_value: Money,
    day: u32,
    insured: AccountId,
) -> Result<Vec<LedgerEvent>, LifecycleError> {
    let (insured_receives, asset) = contracts::din_payout(contract, asset_value)?;
    let mut events = vec![LedgerEvent::transfer(
        day,
        EventTag::DinPayout,
        AccountId::Underwriter,
        insured,
        insured_receives,
    )];
    if !asset.is_zero() {
        events.push(LedgerEvent::transfer(
            day,
            EventTag::AssetTransfer,
            AccountId::PortfolioCompanies,
            AccountId::Underwriter,
            asset,
        ));
    }
    Ok(events)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LienCase {
    pub lien: ClawbackLien,
    pub attach_day: u32,
    pub negotiation_window_days: u32,
    pub firm_assets: Money,
    /// Account that received the payout and owes the lien.
    pub debtor: AccountId,
    pub current_day: u32,
    pub recovered: Money,
    pub shortfall: Money,
    /// Ownership share handed over in an equity settlement.
    pub transferred_share: Option<f64>,
}

/// Opens a lien case against the recipient of a DIN payout.
pub fn attach_lien(
    payout_event: &LedgerEvent,
    clawback_rate: f64,
    horizon_months: u32,
) -> Result<LienCase, LifecycleError> {
    if payout_event.tag != EventTag::DinPayout {
        return Err(LifecycleError::WrongEventKind(payout_event.tag));
    }
    let underwriter_debit = payout_event
        .postings
        .iter()
        .find(|p| p.account == AccountId::Underwriter)
        .ok_or(LifecycleError::MalformedPayout)?;
    let debtor = payout_event
        .postings
        .iter()
        .find(|p| p.account != AccountId::Underwriter)
        .ok_or(LifecycleError::MalformedPayout)?
        .account;
    let payment = -underwriter_debit.amount;
    if payment.is_negative() {
        return Err(LifecycleError::MalformedPayout);
    }
    let lien = ClawbackLien::new(payment, clawback_rate, horizon_months)?;
    Ok(LienCase {
        lien,
        attach_day: payout_event.day,
        negotiation_window_days: DEFAULT_NEGOTIATION_WINDOW_DAYS,
        firm_assets: Money::ZERO,
        debtor,
        current_day: payout_event.day,
        recovered: Money::ZERO,
        shortfall: Money::ZERO,
        transferred_share: None,
    })
}

impl LienCase {
    pub fn with_firm_assets(mut self, assets: Money) -> Self {
        self.firm_assets = assets.max(Money::ZERO);
        self
    }

    pub fn with_negotiation_window(mut self, days: u32) -> Self {
        self.negotiation_window_days = days;
        self
    }

    pub fn state(&self) -> LienState {
        self.lien.state
    }

    pub fn accrued(&self) -> Money {
        self.lien.accrued()
    }

    /// Memo event recording the attachment.
    pub fn attached_event(&self) -> LedgerEvent {
        LedgerEvent::memo(self.attach_day, EventTag::LienAttached)
    }

    fn ensure_open(&self) -> Result<(), LifecycleError> {
        if self.lien.state.is_closed() {
            Err(LifecycleError::CaseClosed(self.lien.state))
        } else {
            Ok(())
        }
    }

    /// Moves the clock forward by `days`, returning a `LienAccrued` memo for
    /// every month boundary at which the lien grows.
    pub fn advance_time(&mut self, days: u32) -> Result<Vec<LedgerEvent>, LifecycleError> {
        self.ensure_open()?;
        self.current_day += days;
        let since_attach = self.current_day - self.attach_day;
        if since_attach < self.negotiation_window_days {
            return Ok(Vec::new());
        }
        self.lien.state = LienState::Accruing;
        let before = self.lien.months_elapsed;
        let after = since_attach / DAYS_PER_MONTH;
        self.lien.months_elapsed = after;
        let last_growth = after.min(self.lien.accrual_horizon_months);
        let window_end = self.attach_day + self.negotiation_window_days;
        Ok((before + 1..=last_growth)
            .map(|month| {
                let day = (self.attach_day + month * DAYS_PER_MONTH).max(window_end);
                LedgerEvent::memo(day, EventTag::LienAccrued)
            })
            .collect())
    }

    /// Settles the lien. Cash must cover the accrued value; only the accrued
    /// value is taken. An equity transfer is valued at the policy amount,
    /// capped by the allocation and the original payment.
    pub fn settle(&mut self, offer: &SettlementOffer) -> Result<LedgerEvent, LifecycleError> {
        self.ensure_open()?;
        let owed = self.accrued();
        let (tag, value) =
            match *offer {
                SettlementOffer::Cash { cash_amount } => {
                    if cash_amount < owed {
                        return Err(LifecycleError::InsufficientCash {
                            offered: cash_amount,
                            owed,
                        });
                    }
                    (EventTag::LienSettledCash, owed)
                }
                SettlementOffer::EquityTransfer {
                    policy_amount,
                    investment_allocation,
                } => {
                    let share = equity_settlement_share(policy_amount, investment_allocation)
                        .map_err(|e| match e {
                            ContractError::ZeroAllocation => LifecycleError::ZeroAllocation,
                            other => LifecycleError::Contract(other),
                        })?;
                    self.transferred_share = Some(share);
                    let value = policy_amount
                        .min(investment_allocation)
                        .min(self.lien.payment_value);
                    (EventTag::LienSettledEquity, value)
                }
            };
        self.lien.state = LienState::Settled;
        self.recovered = value;
        Ok(LedgerEvent::transfer(
            self.current_day,
            tag,
            self.debtor,
            AccountId::Underwriter,
            value,
        ))
    }

    /// Liquidates the debtor. The lien is senior and recovers up to the
    /// accrued value from the available assets; any remainder is recorded as
    /// the underwriter's shortfall.
    pub fn bankruptcy(&mut self) -> Result<LedgerEvent, LifecycleError> {
        self.ensure_open()?;
        let owed = self.accrued();
        let recovery = owed.min(self.firm_assets);
        self.recovered = recovery;
        self.shortfall = owed - recovery;
        self.lien.state = LienState::Bankrupt;
        Ok(LedgerEvent::transfer(
            self.current_day,
            EventTag::BankruptcyRecovery,
            self.debtor,
            AccountId::Underwriter,
            recovery,
        ))
    }

    /// Lien value the case would show after `months`, ignoring state.
    pub fn value_at(&self, months: u32) -> Money {
        lien_value(&self.lien, months)
    }
}
