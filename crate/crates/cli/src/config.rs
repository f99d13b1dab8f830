//! Flat `section.key = value` run configuration.
//!
//! Lines are `key = value`; `#` starts a comment. Every key must be known.
//! Values from `--set` overrides are applied after the file, in order.

use std::path::PathBuf;

use dinsim_core::calibrate::{Anchor, AnchorKind, AnchorSet, FitBounds, Knob, DEFAULT_FREE};
use dinsim_core::model::{self, ModelParams, ReserveRule};
use dinsim_core::montecarlo::{OutcomeDistribution, SimConfig};
use dinsim_core::Money;

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub rho_min: f64,
    pub rho_max: f64,
    pub rho_step: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            rho_min: 0.0,
            rho_max: model::DEFAULT_GRID_MAX,
            rho_step: model::DEFAULT_GRID_STEP,
        }
    }
}

impl SweepConfig {
    pub fn grid(&self) -> Vec<f64> {
        model::rho_grid(self.rho_min, self.rho_max, self.rho_step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistKind {
    TwoPoint,
    LogNormal,
    Empirical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McSettings {
    pub seed: u64,
    pub n_funds: usize,
    pub investments_per_fund: usize,
    pub distribution: DistKind,
    /// Mean multiple for the two-point distribution.
    pub rho: f64,
    pub mu: f64,
    pub sigma: f64,
    pub empirical_path: Option<PathBuf>,
    pub dispersion: f64,
}

impl Default for McSettings {
    fn default() -> Self {
        Self {
            seed: 1,
            n_funds: 1_000,
            investments_per_fund: 50,
            distribution: DistKind::TwoPoint,
            rho: 1.0,
            mu: 0.0,
            sigma: 1.0,
            empirical_path: None,
            dispersion: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrateSettings {
    pub free: Vec<Knob>,
    pub epsilon: Money,
    pub bounds: FitBounds,
}

impl Default for CalibrateSettings {
    fn default() -> Self {
        Self {
            free: DEFAULT_FREE.to_vec(),
            epsilon: Money::ZERO,
            bounds: FitBounds::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelParams,
    pub sweep: SweepConfig,
    pub anchors: AnchorSet,
    pub calibrate: CalibrateSettings,
    pub mc: McSettings,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelParams::default(),
            sweep: SweepConfig::default(),
            anchors: AnchorSet::reference(),
            calibrate: CalibrateSettings::default(),
            mc: McSettings::default(),
            output: None,
        }
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Parses `key = value` lines into an ordered list.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| config_err(format!("line {}: expected `key = value`", i + 1)))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

/// Parses one `--set` argument.
pub fn parse_override(arg: &str) -> Result<(String, String), CliError> {
    let (k, v) = arg
        .split_once('=')
        .ok_or_else(|| config_err(format!("override {arg:?}: expected section.key=value")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse()
        .map_err(|_| config_err(format!("{key}: cannot parse {v:?}")))
}

fn flag(key: &str, v: &str) -> Result<bool, CliError> {
    match v {
        "true" | "on" | "yes" => Ok(true),
        "false" | "off" | "no" => Ok(false),
        _ => Err(config_err(format!(
            "{key}: expected true or false, got {v:?}"
        ))),
    }
}

fn list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// Anchor fields staged before the anchor set is rebuilt.
#[derive(Debug, Clone)]
struct AnchorDraft {
    kind: AnchorKind,
    label: String,
    target: f64,
    tolerance: f64,
}

impl RunConfig {
    /// Defaults, then `pairs` in order, then validation.
    pub fn from_pairs<I>(pairs: I) -> Result<Self, CliError>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut cfg = RunConfig::default();
        let mut drafts: Vec<AnchorDraft> = cfg
            .anchors
            .anchors
            .iter()
            .map(|a| AnchorDraft {
                kind: a.kind,
                label: a.label.clone(),
                target: a.target,
                tolerance: a.tolerance,
            })
            .collect();
        let mut used: Vec<AnchorKind> = drafts.iter().map(|d| d.kind).collect();
        for (key, value) in pairs {
            cfg.apply(&key, &value, &mut drafts, &mut used)?;
        }
        let anchors = used
            .iter()
            .map(|k| {
                let d = drafts
                    .iter()
                    .find(|d| d.kind == *k)
                    .expect("every kind drafted");
                Anchor::new(d.kind, &d.label, d.target, d.tolerance)
            })
            .collect();
        cfg.anchors = AnchorSet::new(anchors).map_err(|e| config_err(format!("anchors: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_text(text: &str, overrides: &[(String, String)]) -> Result<Self, CliError> {
        let mut pairs = parse_pairs(text)?;
        pairs.extend(overrides.iter().cloned());
        Self::from_pairs(pairs)
    }

    fn apply(
        &mut self,
        key: &str,
        v: &str,
        drafts: &mut [AnchorDraft],
        used: &mut Vec<AnchorKind>,
    ) -> Result<(), CliError> {
        let m = &mut self.model;
        let b = &mut self.calibrate.bounds;
        match key {
            "model.original_capital" => {
                m.original_capital = v
                    .parse::<Money>()
                    .map_err(|e| config_err(format!("{key}: {e}")))?
            }
            "model.moc" => m.moc = num(key, v)?,
            "model.horizon_years" => m.horizon_years = num(key, v)?,
            "model.deal_duration_years" => m.deal_duration_years = num(key, v)?,
            "model.premium_rate" => m.premium_rate = num(key, v)?,
            "model.equity_share" => m.equity_share = num(key, v)?,
            "model.clawback_rate" => m.clawback_rate = num(key, v)?,
            "model.coverage" => m.coverage = num(key, v)?,
            "model.funds_cost_rate" => m.funds_cost_rate = num(key, v)?,
            "model.winner_multiple" => m.winner_multiple = num(key, v)?,
            "model.limited_liability" => m.limited_liability = flag(key, v)?,
            "model.reserve_rule" => {
                m.reserve_rule = ReserveRule::from_name(v)
                    .ok_or_else(|| config_err(format!("{key}: unknown rule {v:?}")))?
            }
            "sweep.rho_min" => self.sweep.rho_min = num(key, v)?,
            "sweep.rho_max" => self.sweep.rho_max = num(key, v)?,
            "sweep.rho_step" => self.sweep.rho_step = num(key, v)?,
            "anchors.use" => {
                *used = list(v)
                    .map(|s| {
                        AnchorKind::from_key(s)
                            .ok_or_else(|| config_err(format!("{key}: unknown anchor {s:?}")))
                    })
                    .collect::<Result<_, _>>()?;
            }
            "calibrate.free" => {
                self.calibrate.free = list(v)
                    .map(|s| {
                        Knob::from_key(s)
                            .ok_or_else(|| config_err(format!("{key}: unknown knob {s:?}")))
                    })
                    .collect::<Result<_, _>>()?;
            }
            "calibrate.epsilon" => {
                self.calibrate.epsilon = v
                    .parse::<Money>()
                    .map_err(|e| config_err(format!("{key}: {e}")))?
            }
            "calibrate.moc_min" => b.moc.0 = num(key, v)?,
            "calibrate.moc_max" => b.moc.1 = num(key, v)?,
            "calibrate.duration_min" => b.deal_duration_years.0 = num(key, v)?,
            "calibrate.duration_max" => b.deal_duration_years.1 = num(key, v)?,
            "calibrate.winner_min" => b.winner_multiple.0 = num(key, v)?,
            "calibrate.winner_max" => b.winner_multiple.1 = num(key, v)?,
            "calibrate.funds_cost_min" => b.funds_cost_rate.0 = num(key, v)?,
            "calibrate.funds_cost_max" => b.funds_cost_rate.1 = num(key, v)?,
            "calibrate.grid_points" => b.grid_points = num(key, v)?,
            "mc.seed" => self.mc.seed = num(key, v)?,
            "mc.n_funds" => self.mc.n_funds = num(key, v)?,
            "mc.investments_per_fund" => self.mc.investments_per_fund = num(key, v)?,
            "mc.distribution" => {
                self.mc.distribution = match v {
                    "two_point" => DistKind::TwoPoint,
                    "lognormal" => DistKind::LogNormal,
                    "empirical" => DistKind::Empirical,
                    _ => return Err(config_err(format!("{key}: unknown distribution {v:?}"))),
                }
            }
            "mc.rho" => self.mc.rho = num(key, v)?,
            "mc.mu" => self.mc.mu = num(key, v)?,
            "mc.sigma" => self.mc.sigma = num(key, v)?,
            "mc.empirical_path" => self.mc.empirical_path = Some(PathBuf::from(v)),
            "mc.dispersion" => self.mc.dispersion = num(key, v)?,
            "output.path" => self.output = Some(PathBuf::from(v)),
            _ => return self.apply_anchor(key, v, drafts),
        }
        Ok(())
    }

    fn apply_anchor(
        &mut self,
        key: &str,
        v: &str,
        drafts: &mut [AnchorDraft],
    ) -> Result<(), CliError> {
        let unknown = || config_err(format!("unknown key {key:?}"));
        let rest = key.strip_prefix("anchors.").ok_or_else(unknown)?;
        let (kind, field) = rest.split_once('.').ok_or_else(unknown)?;
        let kind = AnchorKind::from_key(kind).ok_or_else(unknown)?;
        let draft = drafts
            .iter_mut()
            .find(|d| d.kind == kind)
            .ok_or_else(unknown)?;
        match field {
            "target" => draft.target = num(key, v)?,
            "tolerance" => draft.tolerance = num(key, v)?,
            "label" => draft.label = v.to_string(),
            _ => return Err(unknown()),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.model
            .validate()
            .map_err(|e| config_err(format!("model: {e}")))?;
        let s = &self.sweep;
        if !(s.rho_step > 0.0 && s.rho_step.is_finite()) {
            return Err(config_err("sweep.rho_step must be positive"));
        }
        if !(s.rho_min >= 0.0 && s.rho_min.is_finite() && s.rho_max.is_finite()) {
            return Err(config_err("sweep range must be finite with rho_min >= 0"));
        }
        if self.calibrate.free.is_empty() {
            return Err(config_err("calibrate.free names no knobs"));
        }
        self.sim_config()
            .validate()
            .map_err(|e| config_err(format!("mc: {e}")))?;
        if self.mc.distribution != DistKind::Empirical {
            self.distribution_shape()?
                .validate()
                .map_err(|e| config_err(format!("mc: {e}")))?;
        } else if self.mc.empirical_path.is_none() {
            return Err(config_err(
                "mc.empirical_path is required for the empirical distribution",
            ));
        }
        Ok(())
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            seed: self.mc.seed,
            n_funds: self.mc.n_funds,
            investments_per_fund: self.mc.investments_per_fund,
            params: self.model.clone(),
        }
    }

    fn distribution_shape(&self) -> Result<OutcomeDistribution, CliError> {
        Ok(match self.mc.distribution {
            DistKind::TwoPoint => OutcomeDistribution::TwoPoint {
                winner_multiple: self.model.winner_multiple,
                mean: self.mc.rho,
            },
            DistKind::LogNormal => OutcomeDistribution::LogNormal {
                mu: self.mc.mu,
                sigma: self.mc.sigma,
            },
            DistKind::Empirical => {
                let path = self
                    .mc
                    .empirical_path
                    .as_ref()
                    .ok_or_else(|| config_err("mc.empirical_path is required"))?;
                let file = std::fs::File::open(path).map_err(|e| CliError::Io {
                    path: path.clone(),
                    source: e,
                })?;
                OutcomeDistribution::from_csv(file, self.mc.dispersion)
                    .map_err(|e| config_err(format!("{}: {e}", path.display())))?
            }
        })
    }

    /// Builds the Monte Carlo distribution, reading the empirical file if
    /// one is configured.
    pub fn distribution(&self) -> Result<OutcomeDistribution, CliError> {
        self.distribution_shape()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(items: &[(&str, &str)]) -> Vec<(String, String)> {
        items
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn empty_config_is_default() {
        assert_eq!(RunConfig::from_text("", &[]).unwrap(), RunConfig::default());
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# header\n\nmodel.moc = 43 # trailing\n  sweep.rho_max=1.5\n";
        let cfg = RunConfig::from_text(text, &[]).unwrap();
        assert_eq!(cfg.model.moc, 43.0);
        assert_eq!(cfg.sweep.rho_max, 1.5);
    }

    #[test]
    fn overrides_win() {
        let cfg = RunConfig::from_text("model.moc = 43", &pairs(&[("model.moc", "35")])).unwrap();
        assert_eq!(cfg.model.moc, 35.0);
    }

    #[test]
    fn unknown_keys_rejected() {
        for key in [
            "model.mocc",
            "nosection",
            "anchors.gap.weight",
            "anchors.foo.target",
        ] {
            assert!(matches!(
                RunConfig::from_pairs(pairs(&[(key, "1")])),
                Err(CliError::Config(_))
            ));
        }
    }

    #[test]
    fn invalid_values_rejected() {
        for (k, v) in [
            ("model.moc", "47.1"),
            ("model.moc", "abc"),
            ("model.limited_liability", "maybe"),
            ("model.reserve_rule", "whatever"),
            ("sweep.rho_step", "0"),
            ("mc.n_funds", "0"),
            ("mc.distribution", "uniform"),
            ("mc.distribution", "empirical"),
            ("anchors.gap.tolerance", "0"),
            ("calibrate.free", ""),
        ] {
            assert!(
                RunConfig::from_pairs(pairs(&[(k, v)])).is_err(),
                "{k} = {v}"
            );
        }
    }

    #[test]
    fn anchor_selection_and_edits() {
        let cfg = RunConfig::from_pairs(pairs(&[
            ("anchors.use", "bank_at_zero"),
            ("anchors.bank_at_zero.target", "15"),
            ("anchors.bank_at_zero.label", "15X"),
        ]))
        .unwrap();
        assert_eq!(cfg.anchors.anchors.len(), 1);
        assert_eq!(cfg.anchors.anchors[0].target, 15.0);
        assert_eq!(cfg.anchors.anchors[0].label, "15X");
    }

    #[test]
    fn override_syntax() {
        assert_eq!(
            parse_override("mc.seed=9").unwrap(),
            ("mc.seed".to_string(), "9".to_string())
        );
        assert!(parse_override("mc.seed").is_err());
    }
}
