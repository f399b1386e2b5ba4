//! Ergotropy, passive states, local ergotropy and work/heat bookkeeping.

mod local;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{jc_parts, oscillator_hamiltonian, qubit_hamiltonian, JCParams};
use crate::qmath::{embed_env, embed_system, CMatrix, Dims, QOperator, QState, C64};

pub use local::{local_ergotropy, LocalErgotropy, LocalErgotropyOptions};

#[derive(Clone, Debug)]
pub struct ErgotropyResult {
    pub value: f64,
    pub passive_state: QState,
    /// Maps the population eigenbasis (descending) onto the energy eigenbasis (ascending).
    pub optimal_unitary: CMatrix,
    /// Eigenvalues `r_k` of the state, descending.
    pub rho_eigs: Vec<f64>,
    /// Eigenvalues `epsilon_k` of the Hamiltonian, ascending.
    pub h_eigs: Vec<f64>,
}

/// Closed-form ergotropy `tr(H rho) - sum_k r_k epsilon_k`.
pub fn ergotropy(rho: &QState, h: &QOperator) -> Result<ErgotropyResult> {
    if rho.dim() != h.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} vs Hamiltonian dimension {}",
            rho.dim(),
            h.dim()
        )));
    }
    let n = rho.dim();
    let state_eig = crate::qmath::eig_hermitian_matrix(rho.matrix())?;
    let h_eig = h.eig()?;

    let rho_eigs: Vec<f64> = state_eig.eigenvalues.iter().rev().copied().collect();
    let h_eigs = h_eig.eigenvalues.clone();

    // column k of the population basis in descending order
    let pop_col = |k: usize| n - 1 - k;
    let mut optimal_unitary = CMatrix::zeros(n, n);
    for k in 0..n {
        let src = pop_col(k);
        for i in 0..n {
            let e_ik = h_eig.eigenvectors[(i, k)];
            if e_ik == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                optimal_unitary[(i, j)] += e_ik * state_eig.eigenvectors[(j, src)].conj();
            }
        }
    }
    let passive = CMatrix::weighted_projectors(&h_eig.eigenvectors, &rho_eigs);
    let passive_energy: f64 = rho_eigs.iter().zip(&h_eigs).map(|(r, e)| r * e).sum();
    let value = (h.expectation(rho) - passive_energy).max(0.0);

    Ok(ErgotropyResult {
        value,
        passive_state: QState::from_trusted(passive, rho.dims()),
        optimal_unitary,
        rho_eigs,
        h_eigs,
    })
}

/// Ergotropy of the whole compound under unrestricted unitaries.
pub fn global_ergotropy(rho: &QState, h: &QOperator) -> Result<f64> {
    Ok(ergotropy(rho, h)?.value)
}

/// Which Hamiltonian the energy functionals are evaluated against. The
/// dynamics always uses the full interacting Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EnergyMode {
    #[default]
    Full,
    Noninteracting,
}

impl std::str::FromStr for EnergyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(EnergyMode::Full),
            "noninteracting" | "non-interacting" => Ok(EnergyMode::Noninteracting),
            other => Err(Error::Config(format!("unknown energy mode '{other}'"))),
        }
    }
}

impl std::fmt::Display for EnergyMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EnergyMode::Full => "full",
            EnergyMode::Noninteracting => "noninteracting",
        })
    }
}

/// Full Hamiltonian together with its local parts, all on the compound space.
#[derive(Clone, Debug)]
pub struct EnergyModel {
    pub full: QOperator,
    /// `H_S (x) I`.
    pub system: QOperator,
    /// `I (x) H_E`.
    pub environment: QOperator,
    /// `H_S` on the system alone.
    pub system_local: QOperator,
}

impl EnergyModel {
    pub fn new(full: QOperator, system_local: CMatrix, environment_local: CMatrix) -> Result<Self> {
        let dims = full.dims();
        if system_local.rows() != dims.system || environment_local.rows() != dims.env {
            return Err(Error::DimensionMismatch(format!(
                "local Hamiltonians {}x{} and {}x{} do not fit dims ({}, {})",
                system_local.rows(),
                system_local.cols(),
                environment_local.rows(),
                environment_local.cols(),
                dims.system,
                dims.env
            )));
        }
        Ok(Self {
            system: QOperator::hermitian(embed_system(&system_local, dims.env), dims)?,
            environment: QOperator::hermitian(embed_env(&environment_local, dims.system), dims)?,
            system_local: QOperator::hermitian(system_local, Dims::mono(dims.system))?,
            full,
        })
    }

    /// Model without local terms, e.g. a spin chain whose energy is purely interaction.
    pub fn interaction_only(full: QOperator) -> Result<Self> {
        let dims = full.dims();
        Self::new(full, CMatrix::zeros(dims.system, dims.system), CMatrix::zeros(dims.env, dims.env))
    }

    pub fn jc(p: &JCParams) -> Result<Self> {
        let parts = jc_parts(p)?;
        let full = parts.system.add(&parts.environment)?.add(&parts.interaction)?;
        Ok(Self {
            full,
            system: parts.system,
            environment: parts.environment,
            system_local: QOperator::hermitian(qubit_hamiltonian(p.omega_s), Dims::mono(2))?,
        })
    }

    pub fn dims(&self) -> Dims {
        self.full.dims()
    }

    pub fn noninteracting(&self) -> QOperator {
        self.system
            .add(&self.environment)
            .expect("local parts share the compound dims")
    }

    pub fn hamiltonian(&self, mode: EnergyMode) -> QOperator {
        match mode {
            EnergyMode::Full => self.full.clone(),
            EnergyMode::Noninteracting => self.noninteracting(),
        }
    }

    /// `H_E` alone (useful for building thermal inputs).
    pub fn jc_environment_local(p: &JCParams) -> CMatrix {
        oscillator_hamiltonian(p.omega_e, p.cutoff)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkReport {
    /// `tr[H (rho_in - rho_out)]` for the selected mode.
    pub work: f64,
    /// `tr[H_E (rho_in - rho_out)]`, the decrease of bath energy.
    pub heat: f64,
    /// `work / heat` when the heat is nonzero.
    pub ratio: Option<f64>,
    pub mode: EnergyMode,
}

/// Absolute heat below which `W/Q` is reported as undefined.
pub const HEAT_EPSILON: f64 = 1e-12;

pub fn work_heat(rho_in: &QState, rho_out: &QState, model: &EnergyModel, mode: EnergyMode) -> Result<WorkReport> {
    crate::qmath::same_dims(rho_in.dims(), rho_out.dims())?;
    crate::qmath::same_dims(rho_in.dims(), model.dims())?;
    let diff = rho_in.matrix() - rho_out.matrix();
    let work = match mode {
        EnergyMode::Full => model.full.matrix().trace_product(&diff).re,
        EnergyMode::Noninteracting => {
            model.system.matrix().trace_product(&diff).re + model.environment.matrix().trace_product(&diff).re
        }
    };
    let heat = model.environment.matrix().trace_product(&diff).re;
    Ok(WorkReport {
        work,
        heat,
        ratio: (heat.abs() > HEAT_EPSILON).then(|| work / heat),
        mode,
    })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::models::{jc_hamiltonian, jc_product_state, jc_thermal_input, ThermalPair, ThermalSpec};
    use crate::qmath::{pauli_x, random, Dims, ZERO};

    fn diag_state(p: &[f64]) -> QState {
        QState::new(CMatrix::from_real_diag(p), Dims::mono(p.len())).unwrap()
    }

    fn diag_op(e: &[f64]) -> QOperator {
        QOperator::hermitian(CMatrix::from_real_diag(e), Dims::mono(e.len())).unwrap()
    }

    /// Brute force over all permutations of populations onto energy levels
    /// for commuting (diagonal) inputs.
    fn permutation_oracle(p: &[f64], e: &[f64]) -> f64 {
        fn perms(n: usize) -> Vec<Vec<usize>> {
            if n == 1 {
                return vec![vec![0]];
            }
            let mut out = Vec::new();
            for p in perms(n - 1) {
                for pos in 0..n {
                    let mut q = p.clone();
                    q.insert(pos, n - 1);
                    out.push(q);
                }
            }
            out
        }
        let base: f64 = p.iter().zip(e).map(|(a, b)| a * b).sum();
        perms(p.len())
            .iter()
            .map(|perm| base - perm.iter().enumerate().map(|(i, &j)| p[i] * e[j]).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn ground_projector_has_zero_ergotropy() {
        let h = diag_op(&[0.0, 1.0, 3.0]);
        let r = ergotropy(&diag_state(&[1.0, 0.0, 0.0]), &h).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn inverted_qubit() {
        let r = ergotropy(&diag_state(&[0.2, 0.8]), &diag_op(&[0.0, 1.0])).unwrap();
        assert!((r.value - permutation_oracle(&[0.2, 0.8], &[0.0, 1.0])).abs() < 1e-15);
        assert!((r.value - 0.6).abs() < 1e-15);
        assert!((r.passive_state.matrix()[(0, 0)].re - 0.8).abs() < 1e-15);
        assert!((r.passive_state.matrix()[(1, 1)].re - 0.2).abs() < 1e-15);
        let rotated = diag_state(&[0.2, 0.8]).evolve(&r.optimal_unitary);
        assert!((rotated.matrix() - r.passive_state.matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn matches_permutation_oracle_on_diagonal_inputs() {
        let p = [0.1, 0.4, 0.2, 0.3];
        let e = [0.5, -1.0, 2.0, 0.0];
        let r = ergotropy(&diag_state(&p), &diag_op(&e)).unwrap();
        assert!((r.value - permutation_oracle(&p, &e)).abs() < 1e-14);
    }

    #[test]
    fn value_identity_and_passive_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let dims = Dims::new(2, 3);
        let rho = random::random_state(dims, &mut rng);
        let h = random::random_hermitian(dims, &mut rng);
        let r = ergotropy(&rho, &h).unwrap();
        let passive_energy: f64 = r.rho_eigs.iter().zip(&r.h_eigs).map(|(a, b)| a * b).sum();
        assert!((r.value - (h.expectation(&rho) - passive_energy)).abs() < 1e-10);
        assert!(ergotropy(&r.passive_state, &h).unwrap().value <= 1e-9);
        assert!(r.optimal_unitary.unitarity_defect() < 1e-10);
        let out = rho.evolve(&r.optimal_unitary);
        assert!((h.expectation(&rho) - h.expectation(&out) - r.value).abs() < 1e-10);
    }

    #[test]
    fn fock_input_global_ergotropy() {
        for n_plus_1 in [1usize, 5, 12] {
            let p = JCParams::new(1.0, 1.0, 0.1, n_plus_1 + 1);
            let h = jc_hamiltonian(&p).unwrap();
            let rho = QState::pure(&jc_product_state(&p, 0, n_plus_1).unwrap(), p.dims()).unwrap();
            let ge = global_ergotropy(&rho, &h).unwrap();
            assert!((ge - n_plus_1 as f64).abs() < 1e-9, "n+1 = {n_plus_1}: {ge}");
        }
    }

    #[test]
    fn pure_state_ergotropy_is_energy_above_ground() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let dims = Dims::new(2, 4);
        let h = random::random_hermitian(dims, &mut rng);
        let psi = random::random_pure(8, &mut rng);
        let rho = QState::pure(&psi, dims).unwrap();
        let e0 = h.eig().unwrap().min();
        assert!((global_ergotropy(&rho, &h).unwrap() - (h.expectation(&rho) - e0)).abs() < 1e-10);
    }

    #[test]
    fn equal_temperature_product_is_passive_without_interaction() {
        let p = JCParams::new(1.0, 1.0, 0.1, 30);
        let model = EnergyModel::jc(&p).unwrap();
        let spec = ThermalSpec::from_temperature(2.0).unwrap();
        let rho = jc_thermal_input(&p, ThermalPair { system: spec, environment: spec }).unwrap();
        let ge = global_ergotropy(&rho, &model.hamiltonian(EnergyMode::Noninteracting)).unwrap();
        assert!(ge.abs() < 1e-12);
    }

    #[test]
    fn work_heat_of_identity_map_is_zero() {
        let p = JCParams::new(1.0, 1.0, 0.1, 4);
        let model = EnergyModel::jc(&p).unwrap();
        let rho = QState::pure(&jc_product_state(&p, 1, 2).unwrap(), p.dims()).unwrap();
        let w = work_heat(&rho, &rho, &model, EnergyMode::Full).unwrap();
        assert_eq!((w.work, w.heat, w.ratio), (0.0, 0.0, None));
    }

    #[test]
    fn bit_flip_without_coupling_extracts_qubit_energy() {
        let p = JCParams::new(1.5, 1.0, 0.0, 4);
        let model = EnergyModel::jc(&p).unwrap();
        let rho = QState::pure(&jc_product_state(&p, 1, 3).unwrap(), p.dims()).unwrap();
        let flip = crate::qmath::embed_system(&pauli_x(), p.cutoff + 1);
        let out = rho.evolve(&flip);
        for mode in [EnergyMode::Full, EnergyMode::Noninteracting] {
            let w = work_heat(&rho, &out, &model, mode).unwrap();
            assert!((w.work - 1.5).abs() < 1e-15);
            assert_eq!(w.heat, 0.0);
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let rho = diag_state(&[0.5, 0.5]);
        let h = diag_op(&[0.0, 1.0, 2.0]);
        assert!(matches!(ergotropy(&rho, &h), Err(Error::DimensionMismatch(_))));
        let _ = ZERO;
    }
}
