use dinsim_core::model::{bank_return, ModelParams};
use dinsim_web::{break_even_rate, lien_schedule, sweep_curves};

#[test]
fn curves_match_core() {
    let out = sweep_curves(30.0, 10.0, 1.5, 0.05, 0.623, 0.0, 8.0, 0.01);
    assert_eq!(out.len(), 801 * 3);
    let p = ModelParams::default();
    for row in out.chunks(3) {
        assert_eq!(row[1], bank_return(&p.baseline(), row[0]));
        assert_eq!(row[2], bank_return(&p, row[0]));
    }
}

#[test]
fn invalid_params_give_empty_curves() {
    assert!(sweep_curves(48.0, 10.0, 1.5, 0.05, 0.623, 0.0, 8.0, 0.01).is_empty());
    assert!(lien_schedule(100.0, 1.5, 12, 24).is_empty());
    assert!(lien_schedule(f64::NAN, 0.5, 12, 24).is_empty());
}

#[test]
fn schedule_endpoints() {
    let s = lien_schedule(100.0, 0.623, 12, 24);
    assert_eq!(s.len(), 25);
    assert_eq!(s[0], 62.3);
    assert!(s[12..].iter().all(|v| *v == 100.0));
}

#[test]
fn break_even_on_defaults() {
    // premiums take p x D = 0.5 of face on the default regime
    let l = break_even_rate(30.0, 10.0, 1.5, 0.05, 0.0);
    assert!((l - 0.5).abs() < 1e-5);
    assert!(break_even_rate(30.0, 10.0, 1.5, 0.05, 0.0) == l);
}
