use dinsim_core::calibrate::{
    comparative_statics, evaluate_anchors, find_rho_star, fit_anchors, solve_clawback_rate, Anchor,
    AnchorKind, AnchorSet, Direction, FitBounds, Knob, StaticsKnob, DEFAULT_FREE,
};
use dinsim_core::model::{
    bank_return, default_grid, evaluate, perverse_incentive_gap, ModelParams,
};
use dinsim_core::Money;

fn fitted() -> dinsim_core::calibrate::CalibrationReport {
    fit_anchors(
        &ModelParams::default(),
        &AnchorSet::reference(),
        &DEFAULT_FREE,
        &FitBounds::default(),
    )
    .unwrap()
}

#[test]
fn reference_fit_meets_bank_and_gap_anchors() {
    let report = fitted();
    let p = &report.params;
    assert!((bank_return(&p.baseline(), 0.0) - 29.0).abs() <= 0.5);
    assert!((perverse_incentive_gap(p).unwrap() - 0.64).abs() <= 0.05);
    for kind in [
        AnchorKind::BankAtZero,
        AnchorKind::IncentiveGap,
        AnchorKind::ClawbackRate,
    ] {
        assert!(report.residual(kind).unwrap().hit, "{kind:?} missed");
    }
    // every anchor is reported, including the one the template cannot reach
    assert_eq!(report.residuals.len(), 4);
    let rho_star = report.residual(AnchorKind::RhoStar).unwrap();
    assert_eq!(rho_star.value, Some(find_rho_star(p).unwrap()));
    if !rho_star.hit {
        assert!(!report.converged);
        assert!(report.to_text().contains("anchor.2.hit = false"));
    }
}

#[test]
fn reference_fit_is_deterministic() {
    assert_eq!(fitted(), fitted());
    assert_eq!(fitted().to_text(), fitted().to_text());
}

#[test]
fn fitted_regime_reproduces_reference_lien_rate() {
    let p = fitted().params;
    let l = solve_clawback_rate(&p, Money::ZERO).unwrap();
    assert!((l - 0.623).abs() <= 0.02, "L* = {l}");
}

#[test]
fn fitted_regime_cures_incentive_and_keeps_floor() {
    let p = fitted().params;
    assert!(p.limited_liability);
    let curve: Vec<f64> = default_grid().iter().map(|&r| bank_return(&p, r)).collect();
    assert!(curve.windows(2).all(|w| w[1] >= w[0]));
    let f = p.moc;
    let net = evaluate(&p, &p.template(), 0.0).uw_net;
    assert!(net >= -1e-9 * f && net <= 0.15 * f, "net {net}");
}

#[test]
fn default_regime_floor_and_cure() {
    let p = ModelParams::default();
    let net = evaluate(&p, &p.template(), 0.0).uw_net;
    assert!(net >= 0.0 && net <= 0.15 * p.moc);
    let curve: Vec<f64> = default_grid().iter().map(|&r| bank_return(&p, r)).collect();
    assert!(curve.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn statics_signs_on_fitted_regime() {
    let p = fitted().params;
    let s = comparative_statics(&p).unwrap();
    let get = |k| s.iter().find(|x| x.knob == k).unwrap();
    assert_eq!(
        get(StaticsKnob::PremiumRate).direction,
        Direction::Decreases
    );
    assert_eq!(get(StaticsKnob::FundsCost).direction, Direction::Increases);
}

#[test]
fn funds_cost_alone_reaches_reference_rate() {
    let anchors = AnchorSet::new(vec![Anchor::new(
        AnchorKind::ClawbackRate,
        "62.3%",
        0.623,
        0.02,
    )])
    .unwrap();
    let report = fit_anchors(
        &ModelParams::default(),
        &anchors,
        &[Knob::FundsCost],
        &FitBounds::default(),
    )
    .unwrap();
    assert!(report.converged);
    let l = solve_clawback_rate(&report.params, Money::ZERO).unwrap();
    assert!((l - 0.623).abs() <= 0.02);
}

#[test]
fn residuals_cover_every_anchor() {
    let r = evaluate_anchors(&AnchorSet::reference(), &ModelParams::default());
    assert_eq!(r.len(), 4);
    let labels: Vec<&str> = r.iter().map(|x| x.anchor.label.as_str()).collect();
    assert_eq!(labels, ["29X", "64%", "2.27-2.28", "62.3%"]);
}
