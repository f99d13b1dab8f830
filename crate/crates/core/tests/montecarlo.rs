use dinsim_core::calibrate::{fit_anchors, AnchorSet, FitBounds, DEFAULT_FREE};
use dinsim_core::model::{bank_return, ModelParams};
use dinsim_core::montecarlo::{run, summarize, OutcomeDistribution, SimConfig};

fn two_point(p: &ModelParams, rho: f64) -> OutcomeDistribution {
    OutcomeDistribution::TwoPoint {
        winner_multiple: p.winner_multiple,
        mean: rho,
    }
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[test]
fn error_shrinks_like_inverse_root_n() {
    let params = ModelParams::default();
    for rho in [0.5, 1.0] {
        let expected = bank_return(&params.baseline(), rho);
        for n_funds in [100, 10_000] {
            let config = SimConfig {
                seed: 42,
                n_funds,
                investments_per_fund: 10,
                params: params.clone(),
            };
            let runs = run(&config, &two_point(&params, rho)).unwrap();
            let values: Vec<f64> = runs.iter().map(|r| r.bank_baseline).collect();
            let (mean, sd) = mean_sd(&values);
            let bound = 4.0 * sd / (n_funds as f64).sqrt();
            assert!(
                (mean - expected).abs() <= bound,
                "rho {rho} n {n_funds}: {mean} vs {expected} (bound {bound})"
            );
        }
    }
}

#[test]
fn ten_thousand_funds_within_one_percent_on_fitted_regime() {
    let params = fit_anchors(
        &ModelParams::default(),
        &AnchorSet::reference(),
        &DEFAULT_FREE,
        &FitBounds::default(),
    )
    .unwrap()
    .params;
    for rho in [0.5, 1.0, 1.5] {
        let config = SimConfig {
            seed: 7,
            n_funds: 10_000,
            investments_per_fund: 50,
            params: params.clone(),
        };
        let runs = run(&config, &two_point(&params, rho)).unwrap();
        let base = summarize(&runs.iter().map(|r| r.bank_baseline).collect::<Vec<_>>()).unwrap();
        let cb = summarize(&runs.iter().map(|r| r.bank_clawback).collect::<Vec<_>>()).unwrap();
        let want_base = bank_return(&params.baseline(), rho);
        let want_cb = bank_return(&params, rho);
        assert!(
            ((base.mean - want_base) / want_base).abs() < 0.01,
            "{rho}: {} vs {want_base}",
            base.mean
        );
        assert!(
            ((cb.mean - want_cb) / want_cb).abs() < 0.01,
            "{rho}: {} vs {want_cb}",
            cb.mean
        );
    }
}

#[test]
fn runs_are_reproducible_and_ordered() {
    let params = ModelParams::default();
    let config = SimConfig {
        seed: 1,
        n_funds: 300,
        investments_per_fund: 8,
        params: params.clone(),
    };
    let dist = OutcomeDistribution::LogNormal {
        mu: -0.2,
        sigma: 0.9,
    };
    let a = run(&config, &dist).unwrap();
    let b = run(&config, &dist).unwrap();
    assert_eq!(a, b);
    assert!(a.iter().enumerate().all(|(i, r)| r.fund == i));
    assert!(a.iter().all(|r| r.bank_clawback <= r.bank_baseline));
}
