//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Arguments are plain numbers; results come back as flat `f64` arrays so
//! the page can draw them without a serialization layer.

use wasm_bindgen::prelude::*;

use dinsim_core::calibrate::solve_clawback_rate;
use dinsim_core::contracts::{lien_value, ClawbackLien};
use dinsim_core::model::{self, ModelParams};
use dinsim_core::Money;

fn params(
    moc: f64,
    duration: f64,
    winner: f64,
    premium: f64,
    clawback: f64,
    funds_cost: f64,
) -> ModelParams {
    ModelParams {
        moc,
        deal_duration_years: duration,
        winner_multiple: winner,
        premium_rate: premium,
        clawback_rate: clawback,
        funds_cost_rate: funds_cost,
        ..ModelParams::default()
    }
}

/// Bank curves over `0..=rho_max` as `[rho, baseline, clawback]` triples.
/// Empty when the parameters are invalid.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn sweep_curves(
    moc: f64,
    duration: f64,
    winner: f64,
    premium: f64,
    clawback: f64,
    funds_cost: f64,
    rho_max: f64,
    step: f64,
) -> Vec<f64> {
    let p = params(moc, duration, winner, premium, clawback, funds_cost);
    let grid = model::rho_grid(0.0, rho_max, step);
    match model::sweep(&p, &grid) {
        Ok(rows) => rows
            .iter()
            .flat_map(|r| [r.rho, r.baseline.bank_multiple, r.clawback.bank_multiple])
            .collect(),
        Err(_) => Vec::new(),
    }
}

/// Lien value at months `0..=months`. Empty on invalid input.
#[wasm_bindgen]
pub fn lien_schedule(payment: f64, rate: f64, horizon_months: u32, months: u32) -> Vec<f64> {
    let Ok(payment) = Money::try_from_f64(payment) else {
        return Vec::new();
    };
    match ClawbackLien::new(payment, rate, horizon_months) {
        Ok(lien) => (0..=months)
            .map(|m| lien_value(&lien, m).to_f64())
            .collect(),
        Err(_) => Vec::new(),
    }
}

/// Break-even lien rate for the given knobs, or NaN when none exists.
#[wasm_bindgen]
pub fn break_even_rate(moc: f64, duration: f64, winner: f64, premium: f64, funds_cost: f64) -> f64 {
    let p = params(moc, duration, winner, premium, 0.0, funds_cost);
    solve_clawback_rate(&p, Money::ZERO).unwrap_or(f64::NAN)
}
