use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::frame::{EigenFrame, ReducedKernel};
use super::{apply_protocol_in_frame, record, LocalKind, Protocol, ProtocolTrace, Termination};
use crate::ergotropy::{ergotropy, local_ergotropy, EnergyMode, EnergyModel, LocalErgotropyOptions};
use crate::error::{Error, Result};
use crate::optim::golden_section_max;
use crate::qmath::{CMatrix, Dims, EigDecomposition, QOperator, QState, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GreedyVariant {
    /// Random energy-preserving kicks whenever free evolution stalls.
    #[default]
    Thermal,
    /// Stop at the first stall.
    Pure,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GreedyConfig {
    /// Search horizon for each free-evolution interval.
    pub tau: f64,
    pub grid_points: usize,
    pub max_local_ops: usize,
    pub max_consecutive_random: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Golden-section iterations around each grid local maximum.
    pub refine_iterations: usize,
    /// At most this many grid local maxima (largest first) are refined.
    pub max_refined_peaks: usize,
    /// A search that gains less than this over `dt = 0` counts as `dt = 0`.
    pub improvement_threshold: f64,
    pub mode: EnergyMode,
    pub variant: GreedyVariant,
    pub extraction: ExtractionRule,
}

/// How the extraction unitary after each free interval is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ExtractionRule {
    /// Largest drop of the energy the work is measured in. In noninteracting
    /// mode this is the closed-form system ergotropy unitary; in full mode
    /// the local ergotropy of the compound is optimized (the closed-form
    /// unitary is kept when it does better).
    #[default]
    ModeEnergy,
    /// Always the closed-form unitary for the system ergotropy w.r.t. `H_S`.
    SystemErgotropy,
}

impl Default for GreedyConfig {
    fn default() -> Self {
        Self {
            tau: 3.0 * PI / 0.1,
            grid_points: 512,
            max_local_ops: 100,
            max_consecutive_random: 7,
            restarts: 5,
            seed: 0,
            refine_iterations: 40,
            max_refined_peaks: 24,
            improvement_threshold: 1e-9,
            mode: EnergyMode::Full,
            variant: GreedyVariant::Thermal,
            extraction: ExtractionRule::ModeEnergy,
        }
    }
}

impl GreedyConfig {
    /// Defaults with the horizon `3 pi / Omega`.
    pub fn for_coupling(coupling: f64) -> Self {
        Self {
            tau: 3.0 * PI / coupling,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::InvalidParameter(format!("tau = {} must be positive and finite", self.tau)));
        }
        if self.grid_points < 2 {
            return Err(Error::InvalidParameter("grid_points must be at least 2".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidParameter("restarts must be at least 1".into()));
        }
        if self.max_local_ops == 0 {
            return Err(Error::InvalidParameter("max_local_ops must be at least 1".into()));
        }
        if self.max_refined_peaks == 0 {
            return Err(Error::InvalidParameter("max_refined_peaks must be at least 1".into()));
        }
        if self.max_consecutive_random == 0 {
            return Err(Error::InvalidParameter("max_consecutive_random must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct GreedyOutcome {
    pub protocol: Protocol,
    pub trace: ProtocolTrace,
    /// Work of the returned protocol for every restart, in restart order.
    pub restart_work: Vec<f64>,
    pub best_restart: usize,
    /// Local operations applied during the winning search, including any
    /// trailing operations dropped from the returned protocol.
    pub searched_local_ops: usize,
}

/// Subsystem ergotropy of a qubit state given as entries (00, 01, 10, 11).
struct QubitErgotropy {
    h: [C64; 4],
    levels: [f64; 2],
}

impl QubitErgotropy {
    fn new(h_s: &QOperator) -> Result<Self> {
        let e = h_s.eig()?;
        let m = h_s.matrix();
        Ok(Self {
            h: [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]],
            levels: [e.eigenvalues[0], e.eigenvalues[1]],
        })
    }

    fn value(&self, r: &[C64; 4]) -> f64 {
        let energy = (self.h[0] * r[0] + self.h[1] * r[2] + self.h[2] * r[1] + self.h[3] * r[3]).re;
        let mean = 0.5 * (r[0].re + r[3].re);
        let half = (0.25 * (r[0].re - r[3].re).powi(2) + r[1].norm_sqr()).sqrt();
        let passive = (mean + half) * self.levels[0] + (mean - half) * self.levels[1];
        (energy - passive).max(0.0)
    }
}

struct Search<'a> {
    frame: &'a EigenFrame,
    model: &'a EnergyModel,
    form: &'a QubitErgotropy,
    cfg: &'a GreedyConfig,
}

impl Search<'_> {
    fn eval(&self, kernel: &ReducedKernel, t: f64) -> f64 {
        self.form.value(&kernel.at(&self.frame.phases(t)))
    }

    /// Grid scan on `[0, tau]`, golden-section refinement around grid local
    /// maxima, smallest time among (near) ties. Returns `(dt, value, value_at_0)`.
    fn best_time(&self, kernel: &ReducedKernel) -> (f64, f64, f64) {
        let n = self.cfg.grid_points;
        let h = self.cfg.tau / n as f64;
        let lambdas = self.frame.eigenvalues();
        let step: Vec<C64> = lambdas.iter().map(|&l| C64::from_polar(1.0, -l * h)).collect();
        let mut phases = vec![C64::new(1.0, 0.0); lambdas.len()];
        let mut values = Vec::with_capacity(n + 1);
        for k in 0..=n {
            if k > 0 {
                if k % 64 == 0 {
                    phases = self.frame.phases(k as f64 * h);
                } else {
                    for (p, s) in phases.iter_mut().zip(&step) {
                        *p *= s;
                    }
                }
            }
            values.push(self.form.value(&kernel.at(&phases)));
        }
        let v0 = values[0];

        let mut peaks: Vec<usize> = (1..=n)
            .filter(|&k| values[k] >= values[k - 1] && (k == n || values[k] >= values[k + 1]))
            .collect();
        peaks.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
        peaks.truncate(self.cfg.max_refined_peaks);

        let mut candidates: Vec<(f64, f64)> = vec![(0.0, v0)];
        for k in peaks {
            let lo = (k - 1) as f64 * h;
            let hi = ((k + 1).min(n)) as f64 * h;
            let (t, v) = golden_section_max(&mut |t| self.eval(kernel, t), lo, hi, self.cfg.refine_iterations);
            let grid = (k as f64 * h, values[k]);
            candidates.push(if v >= grid.1 { (t, v) } else { grid });
        }
        let best = candidates.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
        let (t, v) = candidates
            .iter()
            .filter(|c| c.1 >= best - 1e-12)
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .copied()
            .expect("candidate list is nonempty");
        (t, v, v0)
    }
}

fn random_phase_unitary(basis: &EigDecomposition, rng: &mut ChaCha8Rng) -> CMatrix {
    let d = basis.dim();
    let phases: Vec<C64> = (0..d).map(|_| C64::from_polar(1.0, rng.gen_range(0.0..TAU))).collect();
    let v = &basis.eigenvectors;
    CMatrix::from_fn(d, d, |i, j| (0..d).map(|k| v[(i, k)] * phases[k] * v[(j, k)].conj()).sum())
}

struct RunResult {
    protocol: Protocol,
    best_work: f64,
    searched_local_ops: usize,
}

fn run_once(search: &Search, rho_in: &QState, restart: usize) -> Result<RunResult> {
    let (frame, cfg) = (search.frame, search.cfg);
    let basis = search.model.system_local.eig()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(restart as u64);

    let mut rt = frame.to_frame(rho_in.matrix());
    let e0 = record(frame, &rt, cfg.mode, 0.0).energy;
    let mut protocol = Protocol::new();
    let mut local_ops = 0;
    let mut consecutive_random = 0;
    let mut best = (0usize, 0.0f64);
    let termination = loop {
        if local_ops >= cfg.max_local_ops {
            break Termination::MaxLocalOps;
        }
        let kernel = frame.reduced_kernel(&rt);
        let (dt, value, v0) = search.best_time(&kernel);
        if value - v0 < cfg.improvement_threshold {
            let (u, gain) = search.extraction(&rt, &kernel, 0.0)?;
            if gain > cfg.improvement_threshold {
                rt = frame.apply_local(&rt, &u);
                protocol.push_local(u, LocalKind::Extraction)?;
                consecutive_random = 0;
            } else {
                if cfg.variant == GreedyVariant::Pure {
                    break Termination::NoImprovement;
                }
                let v = random_phase_unitary(&basis, &mut rng);
                rt = frame.apply_local(&rt, &v);
                protocol.push_local(v, LocalKind::RandomEnergyPreserving)?;
                consecutive_random += 1;
            }
        } else {
            frame.evolve_free(&mut rt, dt);
            protocol.push_free(dt)?;
            let (u, _) = search.extraction(&rt, &kernel, dt)?;
            rt = frame.apply_local(&rt, &u);
            protocol.push_local(u, LocalKind::Extraction)?;
            consecutive_random = 0;
        }
        local_ops += 1;
        let w = record(frame, &rt, cfg.mode, e0).work;
        if w > best.1 + 1e-12 {
            best = (protocol.local_ops(), w);
        }
        if consecutive_random >= cfg.max_consecutive_random {
            break Termination::ConsecutiveRandom;
        }
    };
    let mut protocol = protocol.truncated_to_local_ops(best.0);
    protocol.metadata.seed = Some(cfg.seed);
    protocol.metadata.restart = Some(restart);
    protocol.metadata.termination = Some(termination);
    Ok(RunResult {
        protocol,
        best_work: best.1,
        searched_local_ops: local_ops,
    })
}

impl Search<'_> {
    /// Extraction unitary for the frame state `rt` (already evolved by `dt`,
    /// with `kernel` built before the evolution) and its energy gain in the
    /// configured mode.
    fn extraction(&self, rt: &CMatrix, kernel: &ReducedKernel, dt: f64) -> Result<(CMatrix, f64)> {
        let r = kernel.at(&self.frame.phases(dt));
        let rho_s = QState::from_trusted(CMatrix::from_vec(2, 2, r.to_vec()), Dims::mono(2));
        let closed = ergotropy(&rho_s, &self.model.system_local)?;
        let gain_of = |u: &CMatrix| {
            let before = record(self.frame, rt, self.cfg.mode, 0.0).energy;
            let after = record(self.frame, &self.frame.apply_local(rt, u), self.cfg.mode, 0.0).energy;
            before - after
        };
        let use_local = self.cfg.extraction == ExtractionRule::ModeEnergy && self.cfg.mode == EnergyMode::Full;
        if !use_local {
            let gain = match self.cfg.mode {
                EnergyMode::Noninteracting => closed.value,
                EnergyMode::Full => gain_of(&closed.optimal_unitary),
            };
            return Ok((closed.optimal_unitary, gain));
        }
        let rho = self.frame.state_from_frame(rt);
        let opts = LocalErgotropyOptions {
            seed: self.cfg.seed,
            ..Default::default()
        };
        let le = local_ergotropy(&rho, &self.model.full, opts)?;
        let closed_gain = gain_of(&closed.optimal_unitary);
        Ok(if closed_gain >= le.value {
            (closed.optimal_unitary, closed_gain)
        } else {
            (le.unitary, le.value)
        })
    }
}

/// Greedy bang-bang search in a precomputed frame.
pub fn greedy_protocol_in_frame(
    frame: &EigenFrame,
    model: &EnergyModel,
    rho_in: &QState,
    cfg: &GreedyConfig,
) -> Result<GreedyOutcome> {
    cfg.validate()?;
    crate::qmath::same_dims(rho_in.dims(), frame.dims())?;
    if frame.dims().system != 2 {
        return Err(Error::UnsupportedDimension(frame.dims().system));
    }
    let form = QubitErgotropy::new(&model.system_local)?;
    let search = Search {
        frame,
        model,
        form: &form,
        cfg,
    };

    let restarts = match cfg.variant {
        GreedyVariant::Thermal => cfg.restarts,
        GreedyVariant::Pure => 1,
    };
    let mut runs = Vec::with_capacity(restarts);
    for r in 0..restarts {
        runs.push(run_once(&search, rho_in, r)?);
    }
    let restart_work: Vec<f64> = runs.iter().map(|r| r.best_work).collect();
    let mut best_restart = 0;
    for (i, w) in restart_work.iter().enumerate() {
        if *w > restart_work[best_restart] {
            best_restart = i;
        }
    }
    let best = runs.swap_remove(best_restart);
    let trace = apply_protocol_in_frame(frame, rho_in, &best.protocol, cfg.mode)?;
    Ok(GreedyOutcome {
        protocol: best.protocol,
        trace,
        restart_work,
        best_restart,
        searched_local_ops: best.searched_local_ops,
    })
}

/// Greedy bang-bang protocol: pick the free-evolution time that maximizes
/// the system's own ergotropy, extract it with a local unitary, repeat.
/// When free evolution cannot help, apply a random energy-preserving local
/// unitary (thermal variant) or stop (pure variant). Among `restarts`
/// independent random streams the protocol with the most work is returned.
/// Each run is cut back to its best prefix, so `W >= 0`.
pub fn greedy_protocol(rho_in: &QState, model: &EnergyModel, cfg: &GreedyConfig) -> Result<GreedyOutcome> {
    if model.dims().system != 2 {
        return Err(Error::UnsupportedDimension(model.dims().system));
    }
    let frame = EigenFrame::new(model)?;
    greedy_protocol_in_frame(&frame, model, rho_in, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{jc_product_state, JCParams};
    use crate::protocols::Step;
    use crate::qmath::{random, Dims};

    fn fast(coupling: f64) -> GreedyConfig {
        GreedyConfig {
            grid_points: 128,
            ..GreedyConfig::for_coupling(coupling)
        }
    }

    #[test]
    fn qubit_form_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = random::random_hermitian(Dims::mono(2), &mut rng);
        let form = QubitErgotropy::new(&h).unwrap();
        for _ in 0..20 {
            let rho = random::random_state(Dims::mono(2), &mut rng);
            let m = rho.matrix();
            let r = [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]];
            let want = ergotropy(&rho, &h).unwrap().value;
            assert!((form.value(&r) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn ground_state_stops_on_random_rule() {
        let p = JCParams::new(1.0, 1.0, 0.1, 3);
        let model = EnergyModel::jc(&p).unwrap();
        let rho = QState::pure(&jc_product_state(&p, 0, 0).unwrap(), p.dims()).unwrap();
        let out = greedy_protocol(&rho, &model, &fast(0.1)).unwrap();
        assert!(out.trace.report.work.abs() < 1e-12);
        assert!(out.protocol.is_empty());
        assert_eq!(out.searched_local_ops, 7);
        assert!(out.restart_work.iter().all(|w| *w == 0.0));
    }

    #[test]
    fn pure_variant_empties_fock_state() {
        let p = JCParams::new(1.0, 1.0, 0.1, 5);
        let model = EnergyModel::jc(&p).unwrap();
        let rho = QState::pure(&jc_product_state(&p, 0, 4).unwrap(), p.dims()).unwrap();
        let cfg = GreedyConfig {
            variant: GreedyVariant::Pure,
            ..GreedyConfig::for_coupling(0.1)
        };
        let out = greedy_protocol(&rho, &model, &cfg).unwrap();
        assert!((out.trace.report.work - 4.0).abs() < 1e-6);
        assert_eq!(out.protocol.local_ops(), 4);
        assert_eq!(out.protocol.random_ops(), 0);
        match out.protocol.steps()[0] {
            Step::Free(dt) => assert!((dt - std::f64::consts::PI / (2.0 * p.half_splitting(3))).abs() < 1e-6),
            _ => panic!("first step is a free interval"),
        }
    }

    #[test]
    fn seeded_runs_repeat() {
        let p = JCParams::new(1.0, 1.0, 0.1, 30);
        let model = EnergyModel::jc(&p).unwrap();
        let pair = crate::models::ThermalPair {
            system: crate::models::ThermalSpec::zero_temperature(),
            environment: crate::models::ThermalSpec::from_temperature(5.0).unwrap(),
        };
        let rho = crate::models::jc_thermal_input(&p, pair).unwrap();
        let cfg = GreedyConfig {
            seed: 3,
            restarts: 2,
            mode: EnergyMode::Noninteracting,
            ..fast(0.1)
        };
        let a = greedy_protocol(&rho, &model, &cfg).unwrap();
        let b = greedy_protocol(&rho, &model, &cfg).unwrap();
        assert_eq!(a.protocol.to_json().unwrap(), b.protocol.to_json().unwrap());
        assert!(a.trace.report.work > 0.0, "{:?} {}", a.restart_work, a.protocol.local_ops());
        assert_eq!(a.trace.report.work, a.restart_work[a.best_restart]);
        assert!(a.protocol.local_ops() <= cfg.max_local_ops);
    }

    #[test]
    fn validation_rejects_degenerate_settings() {
        for cfg in [
            GreedyConfig { tau: 0.0, ..GreedyConfig::default() },
            GreedyConfig { grid_points: 1, ..GreedyConfig::default() },
            GreedyConfig { restarts: 0, ..GreedyConfig::default() },
            GreedyConfig { max_refined_peaks: 0, ..GreedyConfig::default() },
            GreedyConfig { max_consecutive_random: 0, ..GreedyConfig::default() },
        ] {
            assert!(cfg.validate().is_err());
        }
    }
}
