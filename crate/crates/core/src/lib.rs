//! Venture-banking cohort model with default insurance notes and clawback
//! liens.
//!
//! - [`contracts`]: DIN and lien arithmetic on single contracts.
//! - [`lifecycle`]: lien state machine posting to a zero-sum ledger.
//! - [`model`]: closed-form bank and underwriter returns across `rho`.
//! - [`calibrate`]: break-even lien rate and knob fitting.
//! - [`montecarlo`]: seeded per-fund simulation through the lifecycle.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibrate;
pub mod contracts;
pub mod lifecycle;
pub mod model;
pub mod money;
pub mod montecarlo;

pub use money::Money;
