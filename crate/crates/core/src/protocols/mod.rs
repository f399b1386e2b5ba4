//! Bang-bang protocols: alternating free evolution under the full
//! Hamiltonian with instantaneous unitaries on the system.

mod fock;
mod frame;
mod greedy;

use serde::{Deserialize, Serialize};

use crate::ergotropy::{EnergyMode, EnergyModel, WorkReport, HEAT_EPSILON};
use crate::error::{Error, Result};
use crate::models::JCParams;
use crate::qmath::{CMatrix, QState, C64};

pub use fock::fock_extraction_protocol;
pub use frame::{EigenFrame, ReducedKernel};
pub use greedy::{greedy_protocol, greedy_protocol_in_frame, ExtractionRule, GreedyConfig, GreedyOutcome, GreedyVariant};

/// Unitarity tolerance for local steps.
pub const UNITARY_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalKind {
    Extraction,
    RandomEnergyPreserving,
    BitFlip,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Step {
    Free(f64),
    Local { unitary: CMatrix, kind: LocalKind },
}

impl Step {
    pub fn is_local(&self) -> bool {
        matches!(self, Step::Local { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Closed-form sequence, no search involved.
    Analytic,
    MaxLocalOps,
    ConsecutiveRandom,
    /// Pure-state variant: free evolution could not raise the system ergotropy.
    NoImprovement,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProtocolMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<JCParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restart: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub termination: Option<Termination>,
    #[serde(default)]
    pub total_free_time: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Protocol {
    steps: Vec<Step>,
    pub metadata: ProtocolMetadata,
}

impl Protocol {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_steps(steps: Vec<Step>) -> Result<Self> {
        let mut p = Self::new();
        for s in steps {
            p.push(s)?;
        }
        Ok(p)
    }

    pub fn push(&mut self, step: Step) -> Result<()> {
        match step {
            Step::Free(dt) => self.push_free(dt),
            Step::Local { unitary, kind } => self.push_local(unitary, kind),
        }
    }

    pub fn push_free(&mut self, dt: f64) -> Result<()> {
        if !(dt.is_finite() && dt >= 0.0) {
            return Err(Error::InvalidParameter(format!("free evolution time {dt} must be finite and >= 0")));
        }
        self.steps.push(Step::Free(dt));
        self.metadata.total_free_time += dt;
        Ok(())
    }

    pub fn push_local(&mut self, unitary: CMatrix, kind: LocalKind) -> Result<()> {
        if !unitary.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "local unitary is {}x{}",
                unitary.rows(),
                unitary.cols()
            )));
        }
        let defect = unitary.unitarity_defect();
        if defect.is_nan() || defect > UNITARY_TOLERANCE {
            return Err(Error::InvalidParameter(format!("local step is not unitary (defect {defect:e})")));
        }
        self.steps.push(Step::Local { unitary, kind });
        Ok(())
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn total_free_time(&self) -> f64 {
        self.steps
            .iter()
            .map(|s| if let Step::Free(dt) = s { *dt } else { 0.0 })
            .sum()
    }

    pub fn local_ops(&self) -> usize {
        self.steps.iter().filter(|s| s.is_local()).count()
    }

    pub fn random_ops(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| matches!(s, Step::Local { kind: LocalKind::RandomEnergyPreserving, .. }))
            .count()
    }

    /// Steps up to and including the `k`-th local operation.
    pub fn truncated_to_local_ops(&self, k: usize) -> Protocol {
        let mut seen = 0;
        let mut end = 0;
        for (i, s) in self.steps.iter().enumerate() {
            if seen == k {
                break;
            }
            end = i + 1;
            if s.is_local() {
                seen += 1;
            }
        }
        let steps = self.steps[..end].to_vec();
        let mut metadata = self.metadata.clone();
        metadata.total_free_time = steps
            .iter()
            .map(|s| if let Step::Free(dt) = s { *dt } else { 0.0 })
            .sum();
        Protocol { steps, metadata }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ProtocolRepr::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let repr: ProtocolRepr = serde_json::from_str(s)?;
        repr.try_into()
    }
}

/// `FreeEvolution(t)` followed by the steps of `p`.
pub fn prefix_shift(p: &Protocol, t: f64) -> Result<Protocol> {
    let mut out = Protocol::new();
    out.push_free(t)?;
    for s in p.steps() {
        out.push(s.clone())?;
    }
    let total = out.metadata.total_free_time;
    out.metadata = ProtocolMetadata {
        total_free_time: total,
        ..p.metadata.clone()
    };
    Ok(out)
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum StepRepr {
    Free { free: f64 },
    Local { local: Vec<[f64; 2]>, kind: LocalKind },
}

#[derive(Serialize, Deserialize)]
struct ProtocolRepr {
    steps: Vec<StepRepr>,
    #[serde(default)]
    metadata: ProtocolMetadata,
}

impl From<&Protocol> for ProtocolRepr {
    fn from(p: &Protocol) -> Self {
        let steps = p
            .steps
            .iter()
            .map(|s| match s {
                Step::Free(dt) => StepRepr::Free { free: *dt },
                Step::Local { unitary, kind } => StepRepr::Local {
                    local: unitary.data().iter().map(|z| [z.re, z.im]).collect(),
                    kind: *kind,
                },
            })
            .collect();
        ProtocolRepr {
            steps,
            metadata: p.metadata.clone(),
        }
    }
}

impl TryFrom<ProtocolRepr> for Protocol {
    type Error = Error;

    fn try_from(repr: ProtocolRepr) -> Result<Self> {
        let mut p = Protocol::new();
        for s in repr.steps {
            match s {
                StepRepr::Free { free } => p.push_free(free)?,
                StepRepr::Local { local, kind } => {
                    let side = (local.len() as f64).sqrt().round() as usize;
                    if side * side != local.len() || side == 0 {
                        return Err(Error::InvalidParameter(format!(
                            "local step has {} entries, not a square matrix",
                            local.len()
                        )));
                    }
                    let data = local.iter().map(|[re, im]| C64::new(*re, *im)).collect();
                    p.push_local(CMatrix::from_vec(side, side, data), kind)?;
                }
            }
        }
        let total = p.metadata.total_free_time;
        p.metadata = ProtocolMetadata {
            total_free_time: total,
            ..repr.metadata
        };
        Ok(p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    /// Energy in the selected mode.
    pub energy: f64,
    pub system_energy: f64,
    pub environment_energy: f64,
    /// Work extracted so far, `energy(initial) - energy`.
    pub work: f64,
}

#[derive(Clone, Debug)]
pub struct ProtocolTrace {
    pub initial: EnergyRecord,
    /// One record after every step.
    pub records: Vec<EnergyRecord>,
    pub report: WorkReport,
    pub final_state: QState,
}

impl ProtocolTrace {
    /// Cumulative work after each local operation, paired with the number of
    /// local operations applied so far. Starts with `(0, 0.0)`.
    pub fn work_by_local_ops(&self, protocol: &Protocol) -> Vec<(usize, f64)> {
        let mut out = vec![(0, 0.0)];
        let mut k = 0;
        for (s, r) in protocol.steps().iter().zip(&self.records) {
            if s.is_local() {
                k += 1;
                out.push((k, r.work));
            }
        }
        out
    }
}

pub(crate) fn record(frame: &EigenFrame, rho_tilde: &CMatrix, mode: EnergyMode, initial: f64) -> EnergyRecord {
    let system_energy = frame.system_energy(rho_tilde);
    let environment_energy = frame.environment_energy(rho_tilde);
    let energy = match mode {
        EnergyMode::Full => frame.full_energy(rho_tilde),
        EnergyMode::Noninteracting => system_energy + environment_energy,
    };
    EnergyRecord {
        energy,
        system_energy,
        environment_energy,
        work: initial - energy,
    }
}

fn check_local_dims(frame: &EigenFrame, p: &Protocol) -> Result<()> {
    for s in p.steps() {
        if let Step::Local { unitary, .. } = s {
            if unitary.rows() != frame.dims().system {
                return Err(Error::DimensionMismatch(format!(
                    "local unitary of size {} on a system of dimension {}",
                    unitary.rows(),
                    frame.dims().system
                )));
            }
        }
    }
    Ok(())
}

pub fn apply_protocol_in_frame(frame: &EigenFrame, rho_in: &QState, p: &Protocol, mode: EnergyMode) -> Result<ProtocolTrace> {
    crate::qmath::same_dims(rho_in.dims(), frame.dims())?;
    check_local_dims(frame, p)?;
    let mut rt = frame.to_frame(rho_in.matrix());
    let initial = record(frame, &rt, mode, 0.0);
    let e0 = initial.energy;
    let initial = EnergyRecord { work: 0.0, ..initial };
    let mut records = Vec::with_capacity(p.len());
    for s in p.steps() {
        match s {
            Step::Free(dt) => frame.evolve_free(&mut rt, *dt),
            Step::Local { unitary, .. } => rt = frame.apply_local(&rt, unitary),
        }
        records.push(record(frame, &rt, mode, e0));
    }
    let last = records.last().copied().unwrap_or(initial);
    let heat = initial.environment_energy - last.environment_energy;
    let report = WorkReport {
        work: last.work,
        heat,
        ratio: (heat.abs() > HEAT_EPSILON).then(|| last.work / heat),
        mode,
    };
    Ok(ProtocolTrace {
        initial,
        records,
        report,
        final_state: frame.state_from_frame(&rt),
    })
}

/// Runs `p` on `rho_in` and records energies after every step.
pub fn apply_protocol(rho_in: &QState, model: &EnergyModel, p: &Protocol, mode: EnergyMode) -> Result<ProtocolTrace> {
    let frame = EigenFrame::new(model)?;
    apply_protocol_in_frame(&frame, rho_in, p, mode)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::ergotropy::work_heat;
    use crate::qmath::{embed_system, pauli_x, pauli_y, random, Propagator};

    fn model() -> (JCParams, EnergyModel) {
        let p = JCParams::new(1.0, 1.0, 0.3, 3);
        (p, EnergyModel::jc(&p).unwrap())
    }

    fn hadamard() -> CMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        CMatrix::from_vec(2, 2, vec![C64::new(s, 0.0), C64::new(s, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0)])
    }

    #[test]
    fn empty_protocol_is_identity() {
        let (p, m) = model();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random::random_state(p.dims(), &mut rng);
        let tr = apply_protocol(&rho, &m, &Protocol::new(), EnergyMode::Full).unwrap();
        assert_eq!(tr.report.work, 0.0);
        assert!((tr.final_state.matrix() - rho.matrix()).max_abs() < 1e-12);
    }

    #[test]
    fn free_evolution_conserves_full_energy() {
        let (p, m) = model();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random::random_state(p.dims(), &mut rng);
        let proto = Protocol::from_steps(vec![Step::Free(4.2)]).unwrap();
        let tr = apply_protocol(&rho, &m, &proto, EnergyMode::Full).unwrap();
        assert!(tr.report.work.abs() < 1e-10);
    }

    #[test]
    fn trace_matches_direct_evaluation() {
        let (p, m) = model();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random::random_state(p.dims(), &mut rng);
        let proto = Protocol::from_steps(vec![
            Step::Free(1.3),
            Step::Local { unitary: hadamard(), kind: LocalKind::Extraction },
            Step::Free(0.4),
            Step::Local { unitary: pauli_y(), kind: LocalKind::Extraction },
        ])
        .unwrap();
        let prop = Propagator::new(&m.full).unwrap();
        let mut direct = rho.clone();
        for s in proto.steps() {
            direct = match s {
                Step::Free(dt) => direct.evolve(prop.at(*dt).matrix()),
                Step::Local { unitary, .. } => direct.evolve(&embed_system(unitary, 4)),
            };
        }
        for mode in [EnergyMode::Full, EnergyMode::Noninteracting] {
            let tr = apply_protocol(&rho, &m, &proto, mode).unwrap();
            assert!((tr.final_state.matrix() - direct.matrix()).max_abs() < 1e-11);
            let oracle = work_heat(&rho, &direct, &m, mode).unwrap();
            assert!((tr.report.work - oracle.work).abs() < 1e-10);
            assert!((tr.report.heat - oracle.heat).abs() < 1e-10);
        }
    }

    #[test]
    fn invalid_steps_are_rejected() {
        let mut proto = Protocol::new();
        assert!(proto.push_free(-1.0).is_err());
        assert!(proto.push_free(f64::NAN).is_err());
        assert!(proto.push_local(CMatrix::from_real_diag(&[1.0, 2.0]), LocalKind::Extraction).is_err());
        let (p, m) = model();
        let big = Protocol::from_steps(vec![Step::Local {
            unitary: CMatrix::identity(3),
            kind: LocalKind::Extraction,
        }])
        .unwrap();
        let rho = QState::pure(&crate::models::jc_product_state(&p, 0, 1).unwrap(), p.dims()).unwrap();
        assert!(matches!(apply_protocol(&rho, &m, &big, EnergyMode::Full), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn json_round_trip_is_faithful() {
        let mut proto = Protocol::new();
        proto.push_free(0.1 + 0.2).unwrap();
        proto.push_local(hadamard(), LocalKind::Extraction).unwrap();
        proto.push_free(std::f64::consts::PI / 3.0).unwrap();
        proto.push_local(pauli_x(), LocalKind::BitFlip).unwrap();
        proto.metadata.seed = Some(7);
        let text = proto.to_json().unwrap();
        let back = Protocol::from_json(&text).unwrap();
        assert_eq!(back.len(), proto.len());
        for (a, b) in back.steps().iter().zip(proto.steps()) {
            match (a, b) {
                (Step::Free(x), Step::Free(y)) => assert_eq!(x.to_bits(), y.to_bits()),
                (Step::Local { unitary: u, kind: k }, Step::Local { unitary: v, kind: l }) => {
                    assert_eq!(k, l);
                    assert!((u - v).max_abs() <= 1e-15);
                }
                _ => panic!("step kinds differ"),
            }
        }
        assert_eq!(back.metadata.seed, Some(7));
    }

    #[test]
    fn json_rejects_malformed_local() {
        let text = r#"{"steps":[{"local":[[1,0],[0,0],[0,0]],"kind":"extraction"}]}"#;
        assert!(Protocol::from_json(text).is_err());
    }

    #[test]
    fn prefix_shift_of_empty_is_free_evolution() {
        let (p, m) = model();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = random::random_state(p.dims(), &mut rng);
        let shifted = prefix_shift(&Protocol::new(), 2.5).unwrap();
        assert_eq!(shifted.len(), 1);
        let tr = apply_protocol(&rho, &m, &shifted, EnergyMode::Full).unwrap();
        assert!(tr.report.work.abs() < 1e-10);
    }

    #[test]
    fn truncation_by_local_ops() {
        let proto = Protocol::from_steps(vec![
            Step::Free(1.0),
            Step::Local { unitary: pauli_x(), kind: LocalKind::BitFlip },
            Step::Free(2.0),
            Step::Local { unitary: pauli_x(), kind: LocalKind::BitFlip },
        ])
        .unwrap();
        assert_eq!(proto.truncated_to_local_ops(0).len(), 0);
        assert_eq!(proto.truncated_to_local_ops(1).len(), 2);
        assert_eq!(proto.truncated_to_local_ops(1).total_free_time(), 1.0);
        assert_eq!(proto.truncated_to_local_ops(5).len(), 4);
    }
}
