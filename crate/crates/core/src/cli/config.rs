use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::ergotropy::EnergyMode;
use crate::error::{Error, Result};
use crate::models::JCParams;
use crate::protocols::{ExtractionRule, GreedyConfig, GreedyVariant};

pub const DEFAULT_SEED: u64 = 7;
pub const SEED_ENV: &str = "ERGOX_SEED";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    Fig1,
    Fig2,
    Ergo,
    Lie,
    ProtocolRun,
    Fock,
    Chain,
}

impl ExperimentId {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::Fig1 => "fig1",
            ExperimentId::Fig2 => "fig2",
            ExperimentId::Ergo => "ergo",
            ExperimentId::Lie => "lie",
            ExperimentId::ProtocolRun => "protocol-run",
            ExperimentId::Fock => "fock",
            ExperimentId::Chain => "chain",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub omega_s: f64,
    pub omega_e: f64,
    pub coupling: f64,
    /// Photon cutoff; when unset each experiment picks its own.
    pub cutoff: Option<usize>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        let p = JCParams::default();
        Self {
            omega_s: p.omega_s,
            omega_e: p.omega_e,
            coupling: p.coupling,
            cutoff: None,
        }
    }
}

impl ModelConfig {
    pub fn params(&self, default_cutoff: usize) -> JCParams {
        JCParams::new(self.omega_s, self.omega_e, self.coupling, self.cutoff.unwrap_or(default_cutoff))
    }
}

/// Optional overrides of [`GreedyConfig`]; unset fields keep the defaults
/// (horizon `3 pi / Omega`).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GreedyOverrides {
    pub tau: Option<f64>,
    pub grid_points: Option<usize>,
    pub max_local_ops: Option<usize>,
    pub max_consecutive_random: Option<usize>,
    pub restarts: Option<usize>,
    pub refine_iterations: Option<usize>,
    pub max_refined_peaks: Option<usize>,
    pub improvement_threshold: Option<f64>,
    pub extraction: Option<ExtractionRule>,
}

impl GreedyOverrides {
    pub fn apply(&self, coupling: f64, seed: u64, mode: EnergyMode, variant: GreedyVariant) -> GreedyConfig {
        let d = GreedyConfig::for_coupling(coupling);
        GreedyConfig {
            tau: self.tau.unwrap_or(d.tau),
            grid_points: self.grid_points.unwrap_or(d.grid_points),
            max_local_ops: self.max_local_ops.unwrap_or(d.max_local_ops),
            max_consecutive_random: self.max_consecutive_random.unwrap_or(d.max_consecutive_random),
            restarts: self.restarts.unwrap_or(d.restarts),
            seed,
            refine_iterations: self.refine_iterations.unwrap_or(d.refine_iterations),
            max_refined_peaks: self.max_refined_peaks.unwrap_or(d.max_refined_peaks),
            improvement_threshold: self.improvement_threshold.unwrap_or(d.improvement_threshold),
            mode,
            variant,
            extraction: self.extraction.unwrap_or(d.extraction),
        }
    }

    fn merge(&mut self, o: &GreedyOverrides) {
        macro_rules! take {
            ($($f:ident),*) => { $(if o.$f.is_some() { self.$f = o.$f; })* };
        }
        take!(tau, grid_points, max_local_ops, max_consecutive_random, restarts, refine_iterations, max_refined_peaks, improvement_threshold, extraction);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig1Config {
    /// Photons of the Fock input `|0, n>`.
    pub n: usize,
    /// `|alpha|^2` of the coherent input.
    pub alpha_sq: f64,
    /// Dressed input `|m+>`.
    pub m: usize,
    /// Tail mass allowed when truncating the coherent state.
    pub coherent_tol: f64,
}

impl Default for Fig1Config {
    fn default() -> Self {
        Self {
            n: 12,
            alpha_sq: 12.0,
            m: 11,
            coherent_tol: 1e-10,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fig2Sweep {
    /// `T_S` from 0 to `T_E` at fixed bath temperature.
    #[default]
    Main,
    /// `T_E` from 0 to the bath temperature with the qubit in its ground state.
    Inset,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig2Config {
    pub nbar: f64,
    pub points: usize,
    /// Thermal tail mass above the photon cutoff.
    pub tail_tol: f64,
    pub sweep: Fig2Sweep,
}

impl Default for Fig2Config {
    fn default() -> Self {
        Self {
            nbar: 12.0,
            points: 40,
            tail_tol: crate::models::DEFAULT_TAIL_TOLERANCE,
            sweep: Fig2Sweep::Main,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LiePreset {
    #[default]
    Heisenberg,
    Jc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LieConfig {
    pub preset: LiePreset,
    pub sites: usize,
    pub gamma: f64,
    pub delta: f64,
    pub controlled_sites: usize,
    pub tol: f64,
    /// Raw `{drift, controls}` JSON file; overrides the preset.
    pub problem: Option<PathBuf>,
}

impl Default for LieConfig {
    fn default() -> Self {
        Self {
            preset: LiePreset::Heisenberg,
            sites: 2,
            gamma: 1.0,
            delta: 1.0,
            controlled_sites: 1,
            tol: crate::control::DEFAULT_LIE_TOLERANCE,
            problem: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentId>,
    pub model: ModelConfig,
    pub seed: Option<u64>,
    pub energy_mode: Option<EnergyMode>,
    pub greedy: GreedyOverrides,
    pub fig1: Fig1Config,
    pub fig2: Fig2Config,
    pub lie: LieConfig,
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Flag value, then config value, then `ERGOX_SEED`, then the default.
    pub fn resolve_seed(&self) -> Result<u64> {
        if let Some(s) = self.seed {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{SEED_ENV}: `{v}` is not an unsigned integer"))),
            Err(_) => Ok(DEFAULT_SEED),
        }
    }

    pub fn energy_mode_or(&self, default: EnergyMode) -> EnergyMode {
        self.energy_mode.unwrap_or(default)
    }

    pub fn merge_greedy(&mut self, o: &GreedyOverrides) {
        self.greedy.merge(o);
    }

    /// Field-level checks run before any computation.
    pub fn validate(&self, id: ExperimentId) -> Result<()> {
        if let Some(e) = self.experiment {
            if e != id {
                return Err(field("experiment", format!("config is for `{}`, not `{}`", e.name(), id.name())));
            }
        }
        let m = &self.model;
        positive("model.omega_s", m.omega_s)?;
        positive("model.omega_e", m.omega_e)?;
        if !(m.coupling.is_finite() && m.coupling >= 0.0) {
            return Err(field("model.coupling", format!("must be finite and >= 0, got {}", m.coupling)));
        }
        if m.cutoff == Some(0) {
            return Err(field("model.cutoff", "must be at least 1".into()));
        }
        let g = &self.greedy;
        if let Some(t) = g.tau {
            positive("greedy.tau", t)?;
        }
        for (name, v, min) in [
            ("greedy.grid_points", g.grid_points, 2),
            ("greedy.max_local_ops", g.max_local_ops, 1),
            ("greedy.max_consecutive_random", g.max_consecutive_random, 1),
            ("greedy.restarts", g.restarts, 1),
            ("greedy.max_refined_peaks", g.max_refined_peaks, 1),
        ] {
            if let Some(v) = v {
                if v < min {
                    return Err(field(name, format!("must be at least {min}, got {v}")));
                }
            }
        }
        if let Some(t) = g.improvement_threshold {
            if !(t.is_finite() && t >= 0.0) {
                return Err(field("greedy.improvement_threshold", format!("must be finite and >= 0, got {t}")));
            }
        }
        match id {
            ExperimentId::Fig1 => {
                let f = &self.fig1;
                if f.n == 0 {
                    return Err(field("fig1.n", "must be at least 1".into()));
                }
                positive("fig1.alpha_sq", f.alpha_sq)?;
                tolerance("fig1.coherent_tol", f.coherent_tol)?;
            }
            ExperimentId::Fig2 => {
                let f = &self.fig2;
                positive("fig2.nbar", f.nbar)?;
                if f.points < 2 {
                    return Err(field("fig2.points", format!("must be at least 2, got {}", f.points)));
                }
                tolerance("fig2.tail_tol", f.tail_tol)?;
            }
            ExperimentId::Lie => {
                let l = &self.lie;
                if l.problem.is_none() && l.preset == LiePreset::Heisenberg {
                    if l.sites < 2 {
                        return Err(field("lie.sites", format!("must be at least 2, got {}", l.sites)));
                    }
                    if l.controlled_sites == 0 || l.controlled_sites > l.sites {
                        return Err(field(
                            "lie.controlled_sites",
                            format!("must lie in 1..={}, got {}", l.sites, l.controlled_sites),
                        ));
                    }
                }
                tolerance("lie.tol", l.tol)?;
            }
            _ => {}
        }
        Ok(())
    }
}

fn field(name: &str, msg: String) -> Error {
    Error::Config(format!("{name}: {msg}"))
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(field(name, format!("must be positive and finite, got {v}")))
    }
}

fn tolerance(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(field(name, format!("must lie in (0, 1), got {v}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_json_keeps_defaults() {
        let c = ExperimentConfig::from_json(r#"{"fig2": {"points": 5}, "greedy": {"restarts": 2}}"#).unwrap();
        assert_eq!(c.fig2.points, 5);
        assert_eq!(c.fig2.nbar, 12.0);
        let g = c.greedy.apply(0.1, 3, EnergyMode::Full, GreedyVariant::Thermal);
        assert_eq!(g.restarts, 2);
        assert_eq!(g.grid_points, 512);
        assert!((g.tau - 3.0 * std::f64::consts::PI / 0.1).abs() < 1e-9);
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"fig2": {"point": 5}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"sed": 1}"#).is_err());
    }

    #[test]
    fn validation_names_the_field() {
        let mut c = ExperimentConfig::default();
        c.fig2.points = 1;
        let msg = c.validate(ExperimentId::Fig2).unwrap_err().to_string();
        assert!(msg.contains("fig2.points"), "{msg}");
        assert!(c.validate(ExperimentId::Fig1).is_ok());
        c.model.omega_s = -1.0;
        assert!(c.validate(ExperimentId::Fig1).unwrap_err().to_string().contains("model.omega_s"));
    }

    #[test]
    fn experiment_tag_must_match() {
        let c = ExperimentConfig::from_json(r#"{"experiment": "protocol-run"}"#).unwrap();
        assert!(c.validate(ExperimentId::ProtocolRun).is_ok());
        assert!(c.validate(ExperimentId::Fig1).is_err());
    }

    #[test]
    fn merge_prefers_flags() {
        let mut c = ExperimentConfig::from_json(r#"{"greedy": {"restarts": 2, "grid_points": 64}}"#).unwrap();
        c.merge_greedy(&GreedyOverrides {
            restarts: Some(9),
            ..Default::default()
        });
        assert_eq!(c.greedy.restarts, Some(9));
        assert_eq!(c.greedy.grid_points, Some(64));
    }
}
