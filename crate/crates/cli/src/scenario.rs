//! Scripted lien timelines.
//!
//! One action per line, `#` for comments:
//!
//! ```text
//! payout face=100 [asset=0] [coverage=1] [premium_rate=0.05] [rate=0.623] [horizon=12] [window=30]
//! advance days=30
//! settle cash=62.3
//! settle policy=50 allocation=200
//! bankruptcy assets=40
//! ```
//!
//! `payout` defaults a new contract held by the firm and attaches a lien to
//! the payout. `advance` moves every open case forward; `settle` and
//! `bankruptcy` act on the most recent case.

use std::collections::BTreeMap;

use dinsim_core::contracts::{DinContract, SettlementOffer, REFERENCE_CLAWBACK_RATE};
use dinsim_core::lifecycle::{
    attach_lien, default_events, AccountId, Ledger, LienCase, LifecycleError,
    DEFAULT_NEGOTIATION_WINDOW_DAYS,
};
use dinsim_core::Money;

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Payout {
        face: Money,
        asset: Money,
        coverage: f64,
        premium_rate: f64,
        rate: f64,
        horizon: u32,
        window: u32,
    },
    Advance {
        days: u32,
    },
    Settle(SettlementOffer),
    Bankruptcy {
        assets: Money,
    },
}

fn bad(line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("scenario line {line}: {msg}"))
}

struct Args<'a> {
    line: usize,
    map: BTreeMap<&'a str, &'a str>,
}

impl<'a> Args<'a> {
    fn new(line: usize, words: impl Iterator<Item = &'a str>) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for w in words {
            let (k, v) = w
                .split_once('=')
                .ok_or_else(|| bad(line, format!("expected key=value, got {w:?}")))?;
            if map.insert(k, v).is_some() {
                return Err(bad(line, format!("{k} given twice")));
            }
        }
        Ok(Self { line, map })
    }

    fn take<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>, CliError> {
        self.map
            .remove(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| bad(self.line, format!("{key}: cannot parse {v:?}")))
            })
            .transpose()
    }

    fn need<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, CliError> {
        self.take(key)?
            .ok_or_else(|| bad(self.line, format!("missing {key}")))
    }

    fn done(self) -> Result<(), CliError> {
        match self.map.keys().next() {
            Some(k) => Err(bad(self.line, format!("unknown argument {k:?}"))),
            None => Ok(()),
        }
    }
}

pub fn parse(text: &str) -> Result<Vec<Action>, CliError> {
    let mut actions = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        let mut words = body.split_whitespace();
        let Some(verb) = words.next() else { continue };
        let mut a = Args::new(line, words)?;
        let action = match verb {
            "payout" => Action::Payout {
                face: a.need("face")?,
                asset: a.take("asset")?.unwrap_or(Money::ZERO),
                coverage: a.take("coverage")?.unwrap_or(1.0),
                premium_rate: a.take("premium_rate")?.unwrap_or(0.05),
                rate: a.take("rate")?.unwrap_or(REFERENCE_CLAWBACK_RATE),
                horizon: a.take("horizon")?.unwrap_or(12),
                window: a.take("window")?.unwrap_or(DEFAULT_NEGOTIATION_WINDOW_DAYS),
            },
            "advance" => Action::Advance {
                days: a.need("days")?,
            },
            "settle" => match a.take::<Money>("cash")? {
                Some(cash_amount) => Action::Settle(SettlementOffer::Cash { cash_amount }),
                None => Action::Settle(SettlementOffer::EquityTransfer {
                    policy_amount: a.need("policy")?,
                    investment_allocation: a.need("allocation")?,
                }),
            },
            "bankruptcy" => Action::Bankruptcy {
                assets: a.need("assets")?,
            },
            other => return Err(bad(line, format!("unknown action {other:?}"))),
        };
        a.done()?;
        actions.push(action);
    }
    Ok(actions)
}

#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub ledger: Ledger,
    pub cases: Vec<LienCase>,
}

fn transition(e: LifecycleError) -> CliError {
    match e {
        LifecycleError::Contract(c) => CliError::Config(c.to_string()),
        other => CliError::Transition(other),
    }
}

/// Plays `actions` against a fresh ledger.
pub fn run(actions: &[Action]) -> Result<ScenarioRun, CliError> {
    let mut ledger = Ledger::new();
    let mut cases: Vec<LienCase> = Vec::new();
    let mut day = 0u32;
    let post = |ledger: &mut Ledger, e| ledger.post(e).map_err(transition);
    for action in actions {
        match action {
            Action::Payout {
                face,
                asset,
                coverage,
                premium_rate,
                rate,
                horizon,
                window,
            } => {
                let contract = DinContract::new(*face, *premium_rate, 0.5, *coverage, 1)
                    .map_err(|e| CliError::Config(e.to_string()))?;
                let events =
                    default_events(&contract, *asset, day, AccountId::Firm).map_err(transition)?;
                let case = attach_lien(&events[0], *rate, *horizon)
                    .map_err(transition)?
                    .with_negotiation_window(*window);
                for e in events {
                    post(&mut ledger, e)?;
                }
                post(&mut ledger, case.attached_event())?;
                cases.push(case);
            }
            Action::Advance { days } => {
                day += days;
                for case in cases.iter_mut().filter(|c| !c.state().is_closed()) {
                    for e in case.advance_time(*days).map_err(transition)? {
                        post(&mut ledger, e)?;
                    }
                }
            }
            Action::Settle(offer) => {
                let case = cases
                    .last_mut()
                    .ok_or_else(|| CliError::Config("settle before any payout".into()))?;
                let e = case.settle(offer).map_err(transition)?;
                post(&mut ledger, e)?;
            }
            Action::Bankruptcy { assets } => {
                let case = cases
                    .last_mut()
                    .ok_or_else(|| CliError::Config("bankruptcy before any payout".into()))?;
                case.firm_assets = (*assets).max(Money::ZERO);
                let e = case.bankruptcy().map_err(transition)?;
                post(&mut ledger, e)?;
            }
        }
    }
    Ok(ScenarioRun { ledger, cases })
}

/// Final balances as `#` lines, followed by the zero-sum check.
pub fn balance_lines(ledger: &Ledger) -> String {
    let mut out = String::new();
    for (account, amount) in ledger.balances() {
        out.push_str(&format!("# balance.{} = {}\n", account.name(), amount));
    }
    out.push_str(&format!(
        "# zero_sum = {}\n",
        ledger.total() == ledger.opening_total()
    ));
    out
}
