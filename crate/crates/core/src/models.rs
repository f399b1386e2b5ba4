//! Model builders: truncated Jaynes-Cummings compound, Heisenberg spin
//! chains, and the standard input states.
//!
//! Qubit basis: index 0 is the ground state `|0>` and index 1 the excited
//! state `|1>`, so `H_S = omega_s |1><1|`. The cavity is truncated to Fock
//! states `|0> .. |N>`; compound index is `s * (N + 1) + n`.

use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::{
    embed_env, embed_system, pauli_x, pauli_y, pauli_z, tensor_states, CMatrix, Dims, QOperator,
    QState, C64, ONE, ZERO,
};

/// Default tolerance for truncation leakage and thermal tail mass.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JCParams {
    pub omega_s: f64,
    pub omega_e: f64,
    pub coupling: f64,
    /// Maximum photon number `N`.
    pub cutoff: usize,
}

impl Default for JCParams {
    fn default() -> Self {
        Self {
            omega_s: 1.0,
            omega_e: 1.0,
            coupling: 0.1,
            cutoff: 13,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DressedLevel {
    pub n: usize,
    pub branch: Branch,
    pub phi: f64,
    pub half_splitting: f64,
    pub energy: f64,
}

impl JCParams {
    pub fn new(omega_s: f64, omega_e: f64, coupling: f64, cutoff: usize) -> Self {
        Self {
            omega_s,
            omega_e,
            coupling,
            cutoff,
        }
    }

    pub fn with_cutoff(mut self, cutoff: usize) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn detuning(&self) -> f64 {
        self.omega_s - self.omega_e
    }

    pub fn dim(&self) -> usize {
        2 * (self.cutoff + 1)
    }

    pub fn dims(&self) -> Dims {
        Dims::new(2, self.cutoff + 1)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_s > 0.0 && self.omega_s.is_finite()) {
            return Err(Error::InvalidParameter(format!("omega_s must be > 0, got {}", self.omega_s)));
        }
        if !(self.omega_e > 0.0 && self.omega_e.is_finite()) {
            return Err(Error::InvalidParameter(format!("omega_e must be > 0, got {}", self.omega_e)));
        }
        if !(self.coupling >= 0.0 && self.coupling.is_finite()) {
            return Err(Error::InvalidParameter(format!("coupling must be >= 0, got {}", self.coupling)));
        }
        if self.cutoff < 1 {
            return Err(Error::InvalidParameter("cutoff N must be >= 1".into()));
        }
        let lhs = self.detuning().hypot(self.coupling);
        let rhs = self.omega_s + self.omega_e;
        if lhs >= rhs {
            return Err(Error::GroundStateViolation { lhs, rhs });
        }
        Ok(())
    }

    /// Mixing angle `phi_n`. Uses `atan2` so that negative detuning keeps
    /// `|n+>` as the upper level; at resonance it is `pi/4` for every `n`.
    pub fn mixing_angle(&self, n: usize) -> f64 {
        let dw = self.detuning();
        if dw == 0.0 {
            return FRAC_PI_4;
        }
        0.5 * ((n as f64 + 1.0).sqrt() * self.coupling).atan2(dw)
    }

    /// `Delta omega_n = sqrt(dw^2 + (n+1) Omega^2) / 2`.
    pub fn half_splitting(&self, n: usize) -> f64 {
        let dw = self.detuning();
        0.5 * (dw * dw + (n as f64 + 1.0) * self.coupling * self.coupling).sqrt()
    }

    pub fn dressed_energy(&self, n: usize, branch: Branch) -> f64 {
        0.5 * self.omega_s + self.omega_e * (n as f64 + 0.5) + branch.sign() * self.half_splitting(n)
    }

    pub fn dressed_level(&self, n: usize, branch: Branch) -> DressedLevel {
        DressedLevel {
            n,
            branch,
            phi: self.mixing_angle(n),
            half_splitting: self.half_splitting(n),
            energy: self.dressed_energy(n, branch),
        }
    }

    /// Energy of `|1, N>`, the last level of the truncation:
    /// `cos^2(phi_N) E_{N+} + sin^2(phi_N) E_{N-}`.
    pub fn truncated_top_energy(&self) -> f64 {
        let n = self.cutoff;
        let phi = self.mixing_angle(n);
        phi.cos().powi(2) * self.dressed_energy(n, Branch::Plus)
            + phi.sin().powi(2) * self.dressed_energy(n, Branch::Minus)
    }

    /// All levels of the truncated Hamiltonian in closed form (unsorted):
    /// `E_0 = 0`, `E_{n,+-}` for `n < N`, and the top level.
    pub fn closed_form_spectrum(&self) -> Vec<f64> {
        let mut out = vec![0.0];
        for n in 0..self.cutoff {
            out.push(self.dressed_energy(n, Branch::Minus));
            out.push(self.dressed_energy(n, Branch::Plus));
        }
        out.push(self.truncated_top_energy());
        out
    }

    pub fn index(&self, qubit: usize, photons: usize) -> usize {
        qubit * (self.cutoff + 1) + photons
    }
}

/// Local qubit Hamiltonian `omega_s (sigma_z + 1) / 2 = diag(0, omega_s)`.
pub fn qubit_hamiltonian(omega_s: f64) -> CMatrix {
    CMatrix::from_real_diag(&[0.0, omega_s])
}

/// Truncated oscillator `omega a^dagger a` on `N + 1` levels.
pub fn oscillator_hamiltonian(omega: f64, cutoff: usize) -> CMatrix {
    let diag: Vec<f64> = (0..=cutoff).map(|n| omega * n as f64).collect();
    CMatrix::from_real_diag(&diag)
}

/// Truncated annihilation operator on `N + 1` levels.
pub fn annihilation(cutoff: usize) -> CMatrix {
    let mut a = CMatrix::zeros(cutoff + 1, cutoff + 1);
    for n in 1..=cutoff {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// `sigma^+ = |1><0|` in the qubit basis used throughout this module.
pub fn qubit_raising() -> CMatrix {
    let mut s = CMatrix::zeros(2, 2);
    s[(1, 0)] = ONE;
    s
}

/// Local and interaction parts of the truncated JC Hamiltonian, all embedded
/// on the compound space.
#[derive(Clone, Debug)]
pub struct JcParts {
    pub system: QOperator,
    pub environment: QOperator,
    pub interaction: QOperator,
}

pub fn jc_parts(p: &JCParams) -> Result<JcParts> {
    p.validate()?;
    let dims = p.dims();
    let d_e = p.cutoff + 1;
    let h_s = embed_system(&qubit_hamiltonian(p.omega_s), d_e);
    let h_e = embed_env(&oscillator_hamiltonian(p.omega_e, p.cutoff), 2);
    let sp_a = qubit_raising().kron(&annihilation(p.cutoff));
    let v = (&sp_a + &sp_a.adjoint()).scale_real(0.5 * p.coupling);
    Ok(JcParts {
        system: QOperator::hermitian(h_s, dims)?,
        environment: QOperator::hermitian(h_e, dims)?,
        interaction: QOperator::hermitian(v, dims)?,
    })
}

/// `Pi_N H_JC Pi_N` on dims `(2, N + 1)`.
pub fn jc_hamiltonian(p: &JCParams) -> Result<QOperator> {
    let parts = jc_parts(p)?;
    parts.system.add(&parts.environment)?.add(&parts.interaction)
}

/// Dressed eigenvector `|n+->` as a compound state vector.
pub fn jc_dressed_state(p: &JCParams, n: usize, branch: Branch) -> Result<Vec<C64>> {
    p.validate()?;
    if n >= p.cutoff {
        return Err(Error::OutOfTruncation { n, cutoff: p.cutoff });
    }
    let phi = p.mixing_angle(n);
    let (c1, c0) = match branch {
        Branch::Plus => (phi.cos(), phi.sin()),
        Branch::Minus => (phi.sin(), -phi.cos()),
    };
    let mut v = vec![ZERO; p.dim()];
    v[p.index(1, n)] = C64::new(c1, 0.0);
    v[p.index(0, n + 1)] = C64::new(c0, 0.0);
    Ok(v)
}

/// Product basis vector `|qubit, photons>`.
pub fn jc_product_state(p: &JCParams, qubit: usize, photons: usize) -> Result<Vec<C64>> {
    if qubit > 1 {
        return Err(Error::InvalidParameter(format!("qubit level must be 0 or 1, got {qubit}")));
    }
    if photons > p.cutoff {
        return Err(Error::OutOfTruncation { n: photons, cutoff: p.cutoff });
    }
    let mut v = vec![ZERO; p.dim()];
    v[p.index(qubit, photons)] = ONE;
    Ok(v)
}

/// Fock state `|n>` on `N + 1` levels.
pub fn fock_state(n: usize, cutoff: usize) -> Result<Vec<C64>> {
    if n > cutoff {
        return Err(Error::OutOfTruncation { n, cutoff });
    }
    let mut v = vec![ZERO; cutoff + 1];
    v[n] = ONE;
    Ok(v)
}

#[derive(Clone, Debug)]
pub struct CoherentState {
    /// Renormalized amplitudes on `|0> .. |N>`.
    pub amplitudes: Vec<C64>,
    /// Probability mass beyond the truncation, `sum_{n > N} |c_n|^2`.
    pub leakage: f64,
}

/// `ln(|c_n|^2)` for the Poisson weights of a coherent state with `|alpha|^2 = mean`.
fn ln_poisson(n: usize, mean: f64) -> f64 {
    if mean == 0.0 {
        return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    -mean + n as f64 * mean.ln() - ln_factorial(n)
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Poisson tail `sum_{n > N} e^{-m} m^n / n!`, summed directly in log space.
pub fn poisson_tail(mean: f64, cutoff: usize) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    let ln_mean = mean.ln();
    let mut n = cutoff + 1;
    let mut ln_term = ln_poisson(n, mean);
    let mut acc = 0.0;
    loop {
        let term = ln_term.exp();
        acc += term;
        if n as f64 > mean && term <= acc * 1e-17 {
            break;
        }
        n += 1;
        ln_term += ln_mean - (n as f64).ln();
    }
    acc
}

/// Coherent state amplitudes `e^{-|a|^2/2} a^n / sqrt(n!)`, renormalized
/// after truncation. In strict mode leakage above `tolerance` is an error.
pub fn coherent_state(alpha: C64, cutoff: usize, strict: Option<f64>) -> Result<CoherentState> {
    let mean = alpha.norm_sqr();
    let phase = if mean == 0.0 { ONE } else { alpha / alpha.norm() };
    let mut amplitudes = Vec::with_capacity(cutoff + 1);
    for n in 0..=cutoff {
        let mag = (0.5 * ln_poisson(n, mean)).exp();
        amplitudes.push(phase.powu(n as u32) * mag);
    }
    let leakage = poisson_tail(mean, cutoff);
    if let Some(tolerance) = strict {
        if leakage > tolerance {
            return Err(Error::TruncationLeakage { leakage, tolerance });
        }
    }
    let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut amplitudes {
        *z /= norm;
    }
    Ok(CoherentState { amplitudes, leakage })
}

/// Smallest `N` whose coherent-state leakage is below `tolerance`.
pub fn coherent_cutoff(alpha_sq: f64, tolerance: f64) -> usize {
    let mut n = 1;
    while poisson_tail(alpha_sq, n) >= tolerance {
        n += 1;
    }
    n
}

/// `|qubit> (x) |alpha>` on the JC compound space.
pub fn jc_coherent_input(p: &JCParams, qubit: usize, alpha: C64) -> Result<(Vec<C64>, f64)> {
    let coh = coherent_state(alpha, p.cutoff, None)?;
    let mut q = [ZERO; 2];
    if qubit > 1 {
        return Err(Error::InvalidParameter(format!("qubit level must be 0 or 1, got {qubit}")));
    }
    q[qubit] = ONE;
    let v = q
        .iter()
        .flat_map(|&a| coh.amplitudes.iter().map(move |&b| a * b))
        .collect();
    Ok((v, coh.leakage))
}

/// Inverse temperature with `k_B = 1`; `beta = +inf` is the ground-state limit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalSpec {
    pub beta: f64,
}

impl ThermalSpec {
    pub fn from_beta(beta: f64) -> Result<Self> {
        if beta.is_nan() || beta < 0.0 {
            return Err(Error::InvalidParameter(format!("beta must be >= 0, got {beta}")));
        }
        Ok(Self { beta })
    }

    /// `T = 0` maps to `beta = +inf`.
    pub fn from_temperature(t: f64) -> Result<Self> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::InvalidParameter(format!("temperature must be >= 0, got {t}")));
        }
        Ok(Self { beta: 1.0 / t })
    }

    pub fn zero_temperature() -> Self {
        Self { beta: f64::INFINITY }
    }

    pub fn temperature(&self) -> f64 {
        1.0 / self.beta
    }

    pub fn is_ground(&self) -> bool {
        self.beta == f64::INFINITY
    }
}

/// Thermal specs for the two halves of a product input `gamma_S (x) gamma_E`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermalPair {
    pub system: ThermalSpec,
    pub environment: ThermalSpec,
}

/// Gibbs state `e^{-beta H} / Z` of a local Hamiltonian. At `beta = inf` it
/// is the uniform mixture over the ground space.
pub fn thermal_state(h_local: &QOperator, spec: ThermalSpec) -> Result<QState> {
    let eig = h_local.eig()?;
    let e0 = eig.min();
    let weights: Vec<f64> = if spec.is_ground() {
        let scale = 1e-12 * (1.0 + e0.abs().max(eig.max().abs()));
        let ground: Vec<bool> = eig.eigenvalues.iter().map(|&l| l - e0 <= scale).collect();
        let count = ground.iter().filter(|&&g| g).count() as f64;
        ground.iter().map(|&g| if g { 1.0 / count } else { 0.0 }).collect()
    } else {
        let raw: Vec<f64> = eig
            .eigenvalues
            .iter()
            .map(|&l| (-spec.beta * (l - e0)).exp())
            .collect();
        let z: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / z).collect()
    };
    let m = CMatrix::weighted_projectors(&eig.eigenvectors, &weights);
    Ok(QState::from_trusted(m, h_local.dims()))
}

/// `T = omega / ln(1 + 1 / nbar)`, the temperature with mean occupation `nbar`.
pub fn temperature_for_nbar(omega: f64, nbar: f64) -> f64 {
    if nbar <= 0.0 {
        return 0.0;
    }
    omega / (1.0 + 1.0 / nbar).ln()
}

/// Mean occupation of an untruncated oscillator at temperature `t`.
pub fn nbar_for_temperature(omega: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    1.0 / ((omega / t).exp() - 1.0)
}

/// Smallest `N >= 1` with Gibbs tail mass `q^{N+1} < tolerance`, `q = e^{-omega/T}`.
pub fn thermal_cutoff(omega: f64, t: f64, tolerance: f64) -> usize {
    if t == 0.0 {
        return 1;
    }
    let ln_q = -omega / t;
    let n_plus_1 = (tolerance.ln() / ln_q).floor() as usize + 1;
    n_plus_1.saturating_sub(1).max(1)
}

/// `gamma_{beta_S} (x) gamma_{beta_E}` with respect to the local JC Hamiltonians.
pub fn jc_thermal_input(p: &JCParams, pair: ThermalPair) -> Result<QState> {
    p.validate()?;
    let hs = QOperator::hermitian(qubit_hamiltonian(p.omega_s), Dims::mono(2))?;
    let he = QOperator::hermitian(oscillator_hamiltonian(p.omega_e, p.cutoff), Dims::mono(p.cutoff + 1))?;
    let gs = thermal_state(&hs, pair.system)?;
    let ge = thermal_state(&he, pair.environment)?;
    Ok(tensor_states(&gs, &ge))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinChainParams {
    pub sites: usize,
    pub gamma: f64,
    pub anisotropy: f64,
}

impl SpinChainParams {
    pub fn new(sites: usize, gamma: f64, anisotropy: f64) -> Self {
        Self {
            sites,
            gamma,
            anisotropy,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 2 {
            return Err(Error::InvalidParameter(format!("spin chain needs >= 2 sites, got {}", self.sites)));
        }
        if self.sites > 12 {
            return Err(Error::InvalidParameter(format!("spin chain with {} sites is too large", self.sites)));
        }
        if !self.gamma.is_finite() || !self.anisotropy.is_finite() {
            return Err(Error::InvalidParameter("gamma and anisotropy must be finite".into()));
        }
        Ok(())
    }

    pub fn dims(&self) -> Dims {
        Dims::new(2, 1 << (self.sites - 1))
    }
}

/// `op` acting on `site` (0-based, site 0 leftmost) of a chain of `sites` qubits.
pub fn site_operator(op: &CMatrix, site: usize, sites: usize) -> CMatrix {
    let left = CMatrix::identity(1 << site);
    let right = CMatrix::identity(1 << (sites - site - 1));
    left.kron(op).kron(&right)
}

/// `sum_n gamma (XX + YY + Delta ZZ)` on nearest neighbours; site 1 is S.
pub fn spin_chain_hamiltonian(p: &SpinChainParams) -> Result<QOperator> {
    p.validate()?;
    let m = p.sites;
    let d = 1 << m;
    let (x, y, z) = (pauli_x(), pauli_y(), pauli_z());
    let mut h = CMatrix::zeros(d, d);
    for n in 0..m - 1 {
        let xx = site_operator(&x, n, m).matmul(&site_operator(&x, n + 1, m));
        let yy = site_operator(&y, n, m).matmul(&site_operator(&y, n + 1, m));
        let zz = site_operator(&z, n, m).matmul(&site_operator(&z, n + 1, m));
        let term = &(&xx + &yy) + &zz.scale_real(p.anisotropy);
        h = &h + &term.scale_real(p.gamma);
    }
    QOperator::hermitian(h, p.dims())
}

/// `sum_n sigma_z^(n)`.
pub fn total_magnetization(sites: usize) -> CMatrix {
    let d = 1 << sites;
    let mut out = CMatrix::zeros(d, d);
    for n in 0..sites {
        out = &out + &site_operator(&pauli_z(), n, sites);
    }
    out
}
