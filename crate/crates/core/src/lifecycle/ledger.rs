//! Append-only double-entry ledger.
//!
//! Every event's postings sum to exactly zero, so the total across accounts
//! never changes. Balances can always be rebuilt by replaying the log.

use std::fmt;
use std::str::FromStr;

use crate::money::Money;

use super::LifecycleError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AccountId {
    Bank,
    Underwriter,
    Firm,
    PortfolioCompanies,
    ExternalSink,
}

impl AccountId {
    pub const ALL: [AccountId; 5] = [
        AccountId::Bank,
        AccountId::Underwriter,
        AccountId::Firm,
        AccountId::PortfolioCompanies,
        AccountId::ExternalSink,
    ];

    fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            AccountId::Bank => "Bank",
            AccountId::Underwriter => "Underwriter",
            AccountId::Firm => "Firm",
            AccountId::PortfolioCompanies => "PortfolioCompanies",
            AccountId::ExternalSink => "ExternalSink",
        }
    }
}

impl fmt::Display for AccountId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AccountId {
    type Err = LifecycleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AccountId::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| LifecycleError::ParseRecord(format!("unknown account {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventTag {
    PremiumPaid,
    DinPayout,
    AssetTransfer,
    LienAttached,
    LienAccrued,
    LienSettledCash,
    LienSettledEquity,
    BankruptcyRecovery,
    EquityShare,
    FundsCost,
}

impl EventTag {
    const ALL: [EventTag; 10] = [
        EventTag::PremiumPaid,
        EventTag::DinPayout,
        EventTag::AssetTransfer,
        EventTag::LienAttached,
        EventTag::LienAccrued,
        EventTag::LienSettledCash,
        EventTag::LienSettledEquity,
        EventTag::BankruptcyRecovery,
        EventTag::EquityShare,
        EventTag::FundsCost,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EventTag::PremiumPaid => "PremiumPaid",
            EventTag::DinPayout => "DinPayout",
            EventTag::AssetTransfer => "AssetTransfer",
            EventTag::LienAttached => "LienAttached",
            EventTag::LienAccrued => "LienAccrued",
            EventTag::LienSettledCash => "LienSettledCash",
            EventTag::LienSettledEquity => "LienSettledEquity",
            EventTag::BankruptcyRecovery => "BankruptcyRecovery",
            EventTag::EquityShare => "EquityShare",
            EventTag::FundsCost => "FundsCost",
        }
    }
}

impl fmt::Display for EventTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EventTag {
    type Err = LifecycleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EventTag::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| LifecycleError::ParseRecord(format!("unknown event tag {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    pub account: AccountId,
    pub amount: Money,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerEvent {
    pub day: u32,
    pub tag: EventTag,
    pub postings: Vec<Posting>,
}

impl LedgerEvent {
    pub fn new(day: u32, tag: EventTag, postings: Vec<Posting>) -> Self {
        Self { day, tag, postings }
    }

    /// Moves `amount` from `from` to `to`.
    pub fn transfer(
        day: u32,
        tag: EventTag,
        from: AccountId,
        to: AccountId,
        amount: Money,
    ) -> Self {
        Self::new(
            day,
            tag,
            vec![
                Posting {
                    account: from,
                    amount: -amount,
                },
                Posting {
                    account: to,
                    amount,
                },
            ],
        )
    }

    /// An event that records a fact without moving money.
    pub fn memo(day: u32, tag: EventTag) -> Self {
        Self::new(day, tag, Vec::new())
    }

    pub fn net(&self) -> Money {
        self.postings.iter().map(|p| p.amount).sum()
    }

    pub fn is_balanced(&self) -> bool {
        self.net().is_zero()
    }

    pub fn amount_for(&self, account: AccountId) -> Money {
        self.postings
            .iter()
            .filter(|p| p.account == account)
            .map(|p| p.amount)
            .sum()
    }

    /// `day,tag[,account,amount]*` with amounts at four fixed digits.
    pub fn to_record(&self) -> String {
        let mut line = format!("{},{}", self.day, self.tag);
        for p in &self.postings {
            line.push(',');
            line.push_str(p.account.name());
            line.push(',');
            line.push_str(&p.amount.to_string());
        }
        line
    }

    pub fn from_record(line: &str) -> Result<Self, LifecycleError> {
        let fields: Vec<&str> = line.trim_end_matches(['\r', '\n']).split(',').collect();
        if fields.len() < 2 || !fields.len().is_multiple_of(2) {
            return Err(LifecycleError::ParseRecord(format!(
                "malformed record {line:?}"
            )));
        }
        let day = fields[0]
            .parse()
            .map_err(|_| LifecycleError::ParseRecord(format!("bad day in {line:?}")))?;
        let tag = fields[1].parse()?;
        let postings = fields[2..]
            .chunks(2)
            .map(|pair| {
                Ok(Posting {
                    account: pair[0].parse()?,
                    amount: pair[1]
                        .parse()
                        .map_err(|e| LifecycleError::ParseRecord(format!("{e}")))?,
                })
            })
            .collect::<Result<Vec<_>, LifecycleError>>()?;
        Ok(Self { day, tag, postings })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Ledger {
    opening: [Money; 5],
    balances: [Money; 5],
    log: Vec<LedgerEvent>,
}

impl Ledger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_opening(opening: &[(AccountId, Money)]) -> Self {
        let mut balances = [Money::ZERO; 5];
        for (account, amount) in opening {
            balances[account.index()] += *amount;
        }
        Self {
            opening: balances,
            balances,
            log: Vec::new(),
        }
    }

    /// Applies a balanced event and appends it to the log.
    pub fn post(&mut self, event: LedgerEvent) -> Result<(), LifecycleError> {
        if !event.is_balanced() {
            return Err(LifecycleError::Unbalanced {
                day: event.day,
                tag: event.tag,
                net: event.net(),
            });
        }
        for p in &event.postings {
            self.balances[p.account.index()] += p.amount;
        }
        self.log.push(event);
        Ok(())
    }

    pub fn post_all<I>(&mut self, events: I) -> Result<(), LifecycleError>
    where
        I: IntoIterator<Item = LedgerEvent>,
    {
        events.into_iter().try_for_each(|e| self.post(e))
    }

    pub fn balance(&self, account: AccountId) -> Money {
        self.balances[account.index()]
    }

    pub fn opening_balance(&self, account: AccountId) -> Money {
        self.opening[account.index()]
    }

    pub fn balances(&self) -> impl Iterator<Item = (AccountId, Money)> + '_ {
        AccountId::ALL.into_iter().map(|a| (a, self.balance(a)))
    }

    pub fn total(&self) -> Money {
        self.balances.iter().sum()
    }

    pub fn opening_total(&self) -> Money {
        self.opening.iter().sum()
    }

    pub fn log(&self) -> &[LedgerEvent] {
        &self.log
    }

    pub fn into_log(self) -> Vec<LedgerEvent> {
        self.log
    }

    /// Rebuilds a ledger from its opening balances and an event log.
    pub fn replay<'a, I>(opening: &[(AccountId, Money)], events: I) -> Result<Self, LifecycleError>
    where
        I: IntoIterator<Item = &'a LedgerEvent>,
    {
        let mut ledger = Self::with_opening(opening);
        for e in events {
            ledger.post(e.clone())?;
        }
        Ok(ledger)
    }

    pub fn opening_entries(&self) -> Vec<(AccountId, Money)> {
        AccountId::ALL
            .into_iter()
            .map(|a| (a, self.opening_balance(a)))
            .collect()
    }

    /// One record per event, LF-terminated.
    pub fn export(&self) -> String {
        export_log(&self.log)
    }
}

pub fn export_log(events: &[LedgerEvent]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&e.to_record());
        out.push('\n');
    }
    out
}

pub fn parse_log(text: &str) -> Result<Vec<LedgerEvent>, LifecycleError> {
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(LedgerEvent::from_record)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(x: i64) -> Money {
        Money::from_int(x)
    }

    #[test]
    fn balanced_event_accepted() {
        let mut ledger = Ledger::new();
        let e = LedgerEvent::transfer(
            0,
            EventTag::PremiumPaid,
            AccountId::Firm,
            AccountId::Underwriter,
            m(5),
        );
        ledger.post(e).unwrap();
        assert_eq!(ledger.balance(AccountId::Firm), m(-5));
        assert_eq!(ledger.balance(AccountId::Underwriter), m(5));
        assert_eq!(ledger.total(), Money::ZERO);
    }

    #[test]
    fn unbalanced_event_rejected() {
        let mut ledger = Ledger::new();
        let e = LedgerEvent::new(
            0,
            EventTag::PremiumPaid,
            vec![Posting {
                account: AccountId::Firm,
                amount: m(-5),
            }],
        );
        assert!(matches!(
            ledger.post(e),
            Err(LifecycleError::Unbalanced { .. })
        ));
        assert!(ledger.log().is_empty());
        assert_eq!(ledger.balance(AccountId::Firm), Money::ZERO);
    }

    #[test]
    fn replay_reproduces_balances() {
        let opening = [
            (AccountId::Firm, m(100)),
            (AccountId::ExternalSink, m(-100)),
        ];
        let mut ledger = Ledger::with_opening(&opening);
        ledger
            .post(LedgerEvent::transfer(
                1,
                EventTag::DinPayout,
                AccountId::Underwriter,
                AccountId::Firm,
                m(40),
            ))
            .unwrap();
        ledger
            .post(LedgerEvent::memo(1, EventTag::LienAttached))
            .unwrap();
        let replayed = Ledger::replay(&opening, ledger.log()).unwrap();
        assert_eq!(replayed, ledger);
    }

    #[test]
    fn record_format_is_fixed() {
        let e = LedgerEvent::transfer(
            30,
            EventTag::LienSettledCash,
            AccountId::Firm,
            AccountId::Underwriter,
            Money::from_minor(623_000),
        );
        assert_eq!(
            e.to_record(),
            "30,LienSettledCash,Firm,-62.3000,Underwriter,62.3000"
        );
        assert_eq!(LedgerEvent::from_record(&e.to_record()).unwrap(), e);
        let memo = LedgerEvent::memo(7, EventTag::LienAccrued);
        assert_eq!(memo.to_record(), "7,LienAccrued");
        assert_eq!(LedgerEvent::from_record("7,LienAccrued").unwrap(), memo);
    }

    #[test]
    fn malformed_records_rejected() {
        assert!(LedgerEvent::from_record("x,DinPayout").is_err());
        assert!(LedgerEvent::from_record("1,Nope").is_err());
        assert!(LedgerEvent::from_record("1,DinPayout,Firm").is_err());
        assert!(LedgerEvent::from_record("1,DinPayout,Moon,1.0").is_err());
    }
}
