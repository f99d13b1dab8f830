//! Seeded Monte Carlo over individual funds.
//!
//! Each fund draws its investments' exit multiples and runs them through the
//! contract and lien lifecycle on its own ledger, so the per-investment
//! payout nonlinearity is applied contract by contract rather than to the
//! cohort mean.
//!
//! Draws come from ChaCha8 keyed by `(seed, fund index, investment index)`:
//! the fund index selects the stream and the investment index a fixed word
//! offset within it. A fund's samples do not depend on which other funds
//! were simulated or in what order.

use std::io::Read;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

use crate::contracts::{self, DinContract, SettlementOffer};
use crate::lifecycle::{
    self, attach_lien, AccountId, EventTag, Ledger, LedgerEvent, LifecycleError,
};
use crate::model::{ModelError, ModelParams};
use crate::money::Money;

/// Break-even for a fund's bank multiple.
pub const BREAK_EVEN: f64 = 1.0;
/// Accrual horizon given to liens raised in fund simulations.
pub const LIEN_HORIZON_MONTHS: u32 = 12;
const DAYS_PER_YEAR: u32 = 360;
/// 32-bit words reserved for each investment's draws.
const WORDS_PER_DRAW: u128 = 64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum McError {
    #[error("bad distribution: {0}")]
    BadDistribution(String),
    #[error("bad simulation config: {0}")]
    BadConfig(&'static str),
    #[error("no runs to summarize")]
    EmptyInput,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Lifecycle(#[from] LifecycleError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum OutcomeDistribution {
    /// Each investment exits at `max(g, mean)` with probability
    /// `min(1, mean / g)`, otherwise at zero.
    TwoPoint {
        winner_multiple: f64,
        mean: f64,
    },
    LogNormal {
        mu: f64,
        sigma: f64,
    },
    /// Fund-level multiples drawn by weight. Investments scatter around the
    /// fund multiple with a mean-one lognormal factor of log-sd `dispersion`.
    Empirical {
        funds: Vec<(f64, f64)>,
        dispersion: f64,
    },
}

impl OutcomeDistribution {
    pub fn validate(&self) -> Result<(), McError> {
        let bad = |m: &str| Err(McError::BadDistribution(m.to_string()));
        match self {
            OutcomeDistribution::TwoPoint {
                winner_multiple,
                mean,
            } => {
                if !(*winner_multiple > 0.0 && winner_multiple.is_finite()) {
                    return bad("winner multiple must be positive");
                }
                if !(*mean >= 0.0 && mean.is_finite()) {
                    return bad("mean must be non-negative");
                }
            }
            OutcomeDistribution::LogNormal { mu, sigma } => {
                if !(mu.is_finite() && *sigma >= 0.0 && sigma.is_finite()) {
                    return bad("lognormal needs finite mu and sigma >= 0");
                }
            }
            OutcomeDistribution::Empirical { funds, dispersion } => {
                if funds.is_empty() {
                    return bad("empirical distribution has no rows");
                }
                if funds
                    .iter()
                    .any(|&(m, w)| !(m >= 0.0 && m.is_finite() && w >= 0.0 && w.is_finite()))
                {
                    return bad("multiples and weights must be finite and non-negative");
                }
                if !(funds.iter().map(|f| f.1).sum::<f64>() > 0.0) {
                    return bad("weights sum to zero");
                }
                if !(*dispersion >= 0.0 && dispersion.is_finite()) {
                    return bad("dispersion must be non-negative");
                }
            }
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        match self {
            OutcomeDistribution::TwoPoint { mean, .. } => *mean,
            OutcomeDistribution::LogNormal { mu, sigma } => (mu + 0.5 * sigma * sigma).exp(),
            OutcomeDistribution::Empirical { funds, .. } => {
                let total: f64 = funds.iter().map(|f| f.1).sum();
                funds.iter().map(|f| f.0 * f.1).sum::<f64>() / total
            }
        }
    }

    /// Reads `multiple,weight` rows; a missing weight counts as 1.
    pub fn from_csv<R: Read>(reader: R, dispersion: f64) -> Result<Self, McError> {
        let mut rdr = csv::ReaderBuilder::new()
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| McError::BadDistribution(e.to_string()))?
            .clone();
        let header: Vec<&str> = headers.iter().collect();
        if header.first() != Some(&"multiple") || header.get(1).is_some_and(|h| *h != "weight") {
            return Err(McError::BadDistribution(
                "expected header `multiple,weight`".into(),
            ));
        }
        let mut funds = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| McError::BadDistribution(e.to_string()))?;
            let field = |j: usize| record.get(j).filter(|s| !s.is_empty());
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| {
                    McError::BadDistribution(format!("row {}: bad number {s:?}", i + 2))
                })
            };
            let multiple = parse(field(0).ok_or_else(|| {
                McError::BadDistribution(format!("row {}: missing multiple", i + 2))
            })?)?;
            let weight = field(1).map(parse).transpose()?.unwrap_or(1.0);
            funds.push((multiple, weight));
        }
        let dist = OutcomeDistribution::Empirical { funds, dispersion };
        dist.validate()?;
        Ok(dist)
    }

    fn sample_fund_level(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            OutcomeDistribution::Empirical { funds, .. } => {
                let total: f64 = funds.iter().map(|f| f.1).sum();
                let mut u = rng.gen::<f64>() * total;
                for &(m, w) in funds {
                    if u < w {
                        return m;
                    }
                    u -= w;
                }
                funds.iter().rev().find(|f| f.1 > 0.0).map_or(0.0, |f| f.0)
            }
            _ => 0.0,
        }
    }

    fn sample_investment(&self, rng: &mut ChaCha8Rng, fund_level: f64) -> f64 {
        match self {
            OutcomeDistribution::TwoPoint {
                winner_multiple,
                mean,
            } => {
                let win_prob = (mean / winner_multiple).min(1.0);
                if rng.gen::<f64>() < win_prob {
                    winner_multiple.max(*mean)
                } else {
                    0.0
                }
            }
            OutcomeDistribution::LogNormal { mu, sigma } => LogNormal::new(*mu, *sigma)
                .expect("validated lognormal")
                .sample(rng),
            OutcomeDistribution::Empirical { dispersion, .. } => {
                if *dispersion == 0.0 {
                    return fund_level;
                }
                let factor = LogNormal::new(-0.5 * dispersion * dispersion, *dispersion)
                    .expect("validated dispersion")
                    .sample(rng);
                fund_level * factor
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    pub n_funds: usize,
    pub investments_per_fund: usize,
    pub params: ModelParams,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), McError> {
        if self.n_funds == 0 {
            return Err(McError::BadConfig("n_funds must be at least 1"));
        }
        if self.investments_per_fund == 0 {
            return Err(McError::BadConfig(
                "investments_per_fund must be at least 1",
            ));
        }
        self.params.validate()?;
        Ok(())
    }
}

fn stream_rng(seed: u64, fund: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fund as u64);
    rng
}

/// Exit multiples of one fund's investments.
pub fn sample_fund(
    seed: u64,
    fund: usize,
    investments: usize,
    dist: &OutcomeDistribution,
) -> Vec<f64> {
    let mut rng = stream_rng(seed, fund);
    let fund_level = dist.sample_fund_level(&mut rng);
    (0..investments)
        .map(|j| {
            rng.set_word_pos((j as u128 + 1) * WORDS_PER_DRAW);
            dist.sample_investment(&mut rng, fund_level)
        })
        .collect()
}

pub fn sample_cohort(
    config: &SimConfig,
    dist: &OutcomeDistribution,
) -> Result<Vec<Vec<f64>>, McError> {
    config.validate()?;
    dist.validate()?;
    Ok((0..config.n_funds)
        .map(|f| sample_fund(config.seed, f, config.investments_per_fund, dist))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FundOutcome {
    pub bank_multiple: f64,
    /// Underwriter net in multiples of original capital.
    pub uw_net: f64,
    pub events: Vec<LedgerEvent>,
    pub ledger: Ledger,
}

/// Runs one fund's investments through premiums, closeout, payouts and, with
/// the lien, attachment and settlement. The fund's account at the bank
/// utility pays premiums, receives payouts and owes the liens.
pub fn simulate_fund(
    multiples: &[f64],
    params: &ModelParams,
    with_clawback: bool,
) -> Result<FundOutcome, McError> {
    params.validate()?;
    if multiples.is_empty() {
        return Err(McError::BadConfig("fund has no investments"));
    }
    if multiples.iter().any(|m| !(*m >= 0.0 && m.is_finite())) {
        return Err(McError::BadDistribution(
            "multiples must be non-negative".into(),
        ));
    }
    let capital = params.original_capital;
    let n = multiples.len();
    let face = Money::from_f64(capital.to_f64() * params.moc / n as f64);
    let duration = params.deal_duration_years;
    let term = duration.ceil().max(1.0) as u32;
    let contract = DinContract::new(
        face,
        params.premium_rate,
        params.equity_share,
        params.coverage,
        term,
    )
    .map_err(LifecycleError::from)?;

    let mut ledger = Ledger::new();
    let book = face.scale(n as f64);
    let mut premiums = Money::ZERO;
    for year in 0..term {
        let share = (duration - f64::from(year)).min(1.0);
        let amount = book.scale(params.premium_rate * params.coverage * share);
        premiums += amount;
        ledger.post(LedgerEvent::transfer(
            year * DAYS_PER_YEAR,
            EventTag::PremiumPaid,
            AccountId::Bank,
            AccountId::Underwriter,
            amount,
        ))?;
    }

    let closeout = (duration * f64::from(DAYS_PER_YEAR)).round() as u32;
    let mut payouts = Vec::new();
    for &m in multiples {
        let value = face.scale(m);
        if value < face {
            let events = lifecycle::default_events(&contract, value, closeout, AccountId::Bank)?;
            payouts.push(events[0].clone());
            ledger.post_all(events)?;
        } else {
            let uw_share = contracts::closeout_equity_share(&contract, value);
            ledger.post(LedgerEvent::new(
                closeout,
                EventTag::EquityShare,
                vec![
                    lifecycle::Posting {
                        account: AccountId::PortfolioCompanies,
                        amount: -value,
                    },
                    lifecycle::Posting {
                        account: AccountId::Bank,
                        amount: value - uw_share,
                    },
                    lifecycle::Posting {
                        account: AccountId::Underwriter,
                        amount: uw_share,
                    },
                ],
            ))?;
        }
    }

    let mut recovery = Money::ZERO;
    if with_clawback {
        let mut available = ledger.balance(AccountId::Bank).max(Money::ZERO);
        for payout in &payouts {
            let mut case = attach_lien(payout, params.clawback_rate, LIEN_HORIZON_MONTHS)?;
            ledger.post(case.attached_event())?;
            let owed = case.accrued();
            let event = if !params.limited_liability || available >= owed {
                case.settle(&SettlementOffer::Cash { cash_amount: owed })?
            } else {
                case = case.with_firm_assets(available);
                case.bankruptcy()?
            };
            available = (available - case.recovered).max(Money::ZERO);
            recovery += case.recovered;
            ledger.post(event)?;
        }
    }

    let paid: Money = payouts.iter().map(|p| p.amount_for(AccountId::Bank)).sum();
    let invested =
        params
            .reserve_rule
            .invested_funds(paid.to_f64(), premiums.to_f64(), recovery.to_f64());
    let carry = Money::from_f64(invested * params.funds_cost_rate * duration);
    if !carry.is_zero() {
        ledger.post(LedgerEvent::transfer(
            closeout,
            EventTag::FundsCost,
            AccountId::Underwriter,
            AccountId::ExternalSink,
            carry,
        ))?;
    }

    let c = capital.to_f64();
    Ok(FundOutcome {
        bank_multiple: ledger.balance(AccountId::Bank).to_f64() / c,
        uw_net: ledger.balance(AccountId::Underwriter).to_f64() / c,
        events: ledger.log().to_vec(),
        ledger,
    })
}

/// Per-fund result of a Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundRun {
    pub fund: usize,
    /// Realized mean exit multiple of the fund.
    pub rho: f64,
    pub bank_baseline: f64,
    pub bank_clawback: f64,
    /// Underwriter net with the lien in force.
    pub uw_net: f64,
}

fn run_one(
    config: &SimConfig,
    dist: &OutcomeDistribution,
    fund: usize,
) -> Result<FundRun, McError> {
    let multiples = sample_fund(config.seed, fund, config.investments_per_fund, dist);
    let base = simulate_fund(&multiples, &config.params, false)?;
    let cb = simulate_fund(&multiples, &config.params, true)?;
    Ok(FundRun {
        fund,
        rho: multiples.iter().sum::<f64>() / multiples.len() as f64,
        bank_baseline: base.bank_multiple,
        bank_clawback: cb.bank_multiple,
        uw_net: cb.uw_net,
    })
}

/// Simulates every fund, ordered by fund index.
pub fn run(config: &SimConfig, dist: &OutcomeDistribution) -> Result<Vec<FundRun>, McError> {
    config.validate()?;
    dist.validate()?;
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..config.n_funds)
            .into_par_iter()
            .map(|f| run_one(config, dist, f))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..config.n_funds)
            .map(|f| run_one(config, dist, f))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub q05: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub q95: f64,
    /// Fraction of values strictly above [`BREAK_EVEN`].
    pub past_break_even: f64,
}

/// Quantile of sorted data by linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize(values: &[f64]) -> Result<Summary, McError> {
    if values.is_empty() {
        return Err(McError::EmptyInput);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    Ok(Summary {
        count: n,
        mean: values.iter().sum::<f64>() / n as f64,
        q05: quantile(&sorted, 0.05),
        q25: quantile(&sorted, 0.25),
        q50: quantile(&sorted, 0.50),
        q75: quantile(&sorted, 0.75),
        q95: quantile(&sorted, 0.95),
        past_break_even: sorted.iter().filter(|v| **v > BREAK_EVEN).count() as f64 / n as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::bank_return;
    use approx::assert_abs_diff_eq;

    fn two_point(g: f64, mean: f64) -> OutcomeDistribution {
        OutcomeDistribution::TwoPoint {
            winner_multiple: g,
            mean,
        }
    }

    fn config(seed: u64, n_funds: usize, per_fund: usize) -> SimConfig {
        SimConfig {
            seed,
            n_funds,
            investments_per_fund: per_fund,
            params: ModelParams::default(),
        }
    }

    #[test]
    fn same_seed_same_samples() {
        let d = two_point(1.5, 1.0);
        let a = sample_cohort(&config(7, 5, 10), &d).unwrap();
        let b = sample_cohort(&config(7, 5, 10), &d).unwrap();
        assert_eq!(a, b);
        let c = sample_cohort(&config(8, 5, 10), &d).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn fund_samples_independent_of_cohort_size() {
        let d = OutcomeDistribution::LogNormal {
            mu: 0.0,
            sigma: 1.0,
        };
        let small = sample_cohort(&config(3, 2, 6), &d).unwrap();
        let large = sample_cohort(&config(3, 9, 6), &d).unwrap();
        assert_eq!(small[1], large[1]);
        // extending a fund keeps its earlier investments
        assert_eq!(sample_fund(3, 1, 4, &d)[..], large[1][..4]);
    }

    #[test]
    fn single_draw_shape() {
        let cohort = sample_cohort(&config(1, 1, 1), &two_point(2.0, 1.0)).unwrap();
        assert_eq!(cohort.len(), 1);
        assert_eq!(cohort[0].len(), 1);
        assert!(cohort[0][0] == 0.0 || cohort[0][0] == 2.0);
    }

    #[test]
    fn two_point_failure_weight_converges() {
        let n_funds = 200;
        let per = 100;
        let cohort = sample_cohort(&config(11, n_funds, per), &two_point(2.0, 1.0)).unwrap();
        let n = (n_funds * per) as f64;
        let failures = cohort.iter().flatten().filter(|m| **m == 0.0).count() as f64;
        let sigma = (0.25 / n).sqrt();
        assert!((failures / n - 0.5).abs() < 3.0 * sigma);
    }

    #[test]
    fn config_errors() {
        assert!(sample_cohort(&config(1, 0, 1), &two_point(2.0, 1.0)).is_err());
        assert!(sample_cohort(&config(1, 1, 0), &two_point(2.0, 1.0)).is_err());
        assert!(matches!(
            sample_cohort(&config(1, 1, 1), &two_point(0.0, 1.0)),
            Err(McError::BadDistribution(_))
        ));
        let bad = OutcomeDistribution::LogNormal {
            mu: 0.0,
            sigma: -1.0,
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn total_failure_matches_closed_form() {
        let p = ModelParams {
            clawback_rate: 0.0,
            ..ModelParams::default()
        };
        let out = simulate_fund(&[0.0; 20], &p, false).unwrap();
        assert_eq!(out.bank_multiple, 30.0 * (1.0 - 0.05 * 10.0));
    }

    #[test]
    fn break_even_portfolio_conserves() {
        let p = ModelParams {
            premium_rate: 0.0,
            equity_share: 0.0,
            ..ModelParams::default()
        };
        let out = simulate_fund(&[1.0; 10], &p, true).unwrap();
        assert_eq!(out.bank_multiple, 30.0);
        assert_eq!(out.uw_net, 0.0);
    }

    #[test]
    fn exact_cohort_agrees_with_model() {
        // 100 investments, g = 1.5: rho = 0.75 puts exactly half at zero
        let mut multiples = vec![0.0; 50];
        multiples.extend(vec![1.5; 50]);
        for ll in [true, false] {
            let p = ModelParams {
                limited_liability: ll,
                ..ModelParams::default()
            };
            let base = simulate_fund(&multiples, &p, false).unwrap();
            let cb = simulate_fund(&multiples, &p, true).unwrap();
            assert_abs_diff_eq!(
                base.bank_multiple,
                bank_return(&p.baseline(), 0.75),
                epsilon = 1e-9
            );
            assert_abs_diff_eq!(cb.bank_multiple, bank_return(&p, 0.75), epsilon = 1e-9);
        }
    }

    #[test]
    fn payout_xor_equity_per_investment() {
        let multiples = [0.0, 0.4, 0.9999, 1.0, 2.5, 0.2];
        let out = simulate_fund(&multiples, &ModelParams::default(), false).unwrap();
        let payouts = out
            .events
            .iter()
            .filter(|e| e.tag == EventTag::DinPayout)
            .count();
        let equity = out
            .events
            .iter()
            .filter(|e| e.tag == EventTag::EquityShare)
            .count();
        assert_eq!(payouts, 4);
        assert_eq!(equity, 2);
        assert_eq!(out.ledger.total(), Money::ZERO);
    }

    #[test]
    fn clawback_never_raises_bank_multiple() {
        let d = OutcomeDistribution::LogNormal {
            mu: -0.3,
            sigma: 1.2,
        };
        let cohort = sample_cohort(&config(5, 50, 12), &d).unwrap();
        for ll in [true, false] {
            let p = ModelParams {
                limited_liability: ll,
                ..ModelParams::default()
            };
            for fund in &cohort {
                let base = simulate_fund(fund, &p, false).unwrap();
                let cb = simulate_fund(fund, &p, true).unwrap();
                assert!(cb.bank_multiple <= base.bank_multiple);
            }
        }
    }

    #[test]
    fn summary_examples() {
        let one = summarize(&[3.0]).unwrap();
        assert_eq!((one.q05, one.q50, one.q95, one.mean), (3.0, 3.0, 3.0, 3.0));
        let two = summarize(&[1.0, 4.0]).unwrap();
        assert_eq!(two.q50, 2.5);
        assert_eq!(two.past_break_even, 0.5);
        assert_eq!(summarize(&[]), Err(McError::EmptyInput));
    }

    #[test]
    fn empirical_csv_ingestion() {
        let text = "multiple,weight\n0.5,2\n3.0,\n1.5\n";
        let d = OutcomeDistribution::from_csv(text.as_bytes(), 0.0).unwrap();
        assert_eq!(
            d,
            OutcomeDistribution::Empirical {
                funds: vec![(0.5, 2.0), (3.0, 1.0), (1.5, 1.0)],
                dispersion: 0.0
            }
        );
        assert_abs_diff_eq!(d.mean(), (1.0 + 3.0 + 1.5) / 4.0, epsilon = 1e-12);
        // with no dispersion each fund's investments sit at the fund multiple
        let fund = sample_fund(9, 0, 5, &d);
        assert!(fund.windows(2).all(|w| w[0] == w[1]));
        assert!([0.5, 3.0, 1.5].contains(&fund[0]));

        assert!(OutcomeDistribution::from_csv("mult,w\n1,1\n".as_bytes(), 0.0).is_err());
        assert!(OutcomeDistribution::from_csv("multiple,weight\nx,1\n".as_bytes(), 0.0).is_err());
        assert!(OutcomeDistribution::from_csv("multiple,weight\n".as_bytes(), 0.0).is_err());
        assert!(OutcomeDistribution::from_csv("multiple\n2\n".as_bytes(), 0.0).is_ok());
    }

    #[test]
    fn empirical_dispersion_keeps_fund_mean() {
        let d = OutcomeDistribution::Empirical {
            funds: vec![(2.0, 1.0)],
            dispersion: 0.5,
        };
        let fund = sample_fund(4, 0, 20_000, &d);
        let mean = fund.iter().sum::<f64>() / fund.len() as f64;
        // sd of the factor is sqrt(e^0.25 - 1) ~ 0.53
        assert!((mean - 2.0).abs() < 3.0 * 2.0 * 0.54 / (20_000f64).sqrt());
    }
}
