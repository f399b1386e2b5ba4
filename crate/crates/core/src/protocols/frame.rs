use std::collections::BTreeMap;

use crate::ergotropy::EnergyModel;
use crate::error::Result;
use crate::qmath::{embed_system, CMatrix, Dims, EigDecomposition, QState, C64, ZERO};

/// Working representation in the eigenbasis of the full Hamiltonian, where
/// free evolution is an entrywise phase. Block-sparse eigenvectors (as for
/// Jaynes-Cummings) keep basis changes and local unitaries cheap.
#[derive(Clone, Debug)]
pub struct EigenFrame {
    dims: Dims,
    eig: EigDecomposition,
    v_adj: CMatrix,
    h_system: CMatrix,
    h_environment: CMatrix,
    kernel: Vec<(usize, usize, [C64; 4])>,
}

/// Reduced-state kernel entries: `rho_S(t)_{ij} = sum c_ab^{ij} e^{-i (l_a - l_b) t}`.
#[derive(Clone, Debug)]
pub struct ReducedKernel {
    pairs: Vec<(usize, usize, [C64; 4])>,
}

impl EigenFrame {
    pub fn new(model: &EnergyModel) -> Result<Self> {
        let eig = model.full.eig()?;
        let v_adj = eig.eigenvectors.adjoint();
        let mut frame = Self {
            dims: model.dims(),
            eig,
            v_adj,
            h_system: CMatrix::zeros(0, 0),
            h_environment: CMatrix::zeros(0, 0),
            kernel: Vec::new(),
        };
        if frame.dims.system <= 2 {
            frame.kernel = frame.kernel_structure();
        }
        frame.h_system = frame.to_frame_operator(model.system.matrix());
        frame.h_environment = frame.to_frame_operator(model.environment.matrix());
        Ok(frame)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eig.eigenvalues
    }

    pub fn eig(&self) -> &EigDecomposition {
        &self.eig
    }

    fn v(&self) -> &CMatrix {
        &self.eig.eigenvectors
    }

    /// `V^dagger A V` for a general operator.
    pub fn to_frame_operator(&self, a: &CMatrix) -> CMatrix {
        self.v_adj.matmul(&a.matmul(self.v()))
    }

    /// `V^dagger rho V` for a Hermitian `rho`, using `rho V = (V^dagger rho)^dagger`.
    pub fn to_frame(&self, rho: &CMatrix) -> CMatrix {
        self.v_adj.matmul(&self.v_adj.matmul(rho).adjoint())
    }

    pub fn from_frame(&self, rho_tilde: &CMatrix) -> CMatrix {
        rho_tilde.conjugate_by(self.v())
    }

    pub fn state_from_frame(&self, rho_tilde: &CMatrix) -> QState {
        QState::from_trusted(self.from_frame(rho_tilde), self.dims)
    }

    /// `V^dagger (U (x) I) V`.
    pub fn local_in_frame(&self, u: &CMatrix) -> CMatrix {
        let lifted = embed_system(u, self.dims.env);
        self.v_adj.matmul(&lifted.matmul(self.v()))
    }

    pub fn phases(&self, t: f64) -> Vec<C64> {
        self.eig
            .eigenvalues
            .iter()
            .map(|&l| C64::from_polar(1.0, -l * t))
            .collect()
    }

    pub fn evolve_free(&self, rho_tilde: &mut CMatrix, t: f64) {
        if t == 0.0 {
            return;
        }
        let p = self.phases(t);
        let n = p.len();
        let data = rho_tilde.data_mut();
        for a in 0..n {
            for b in 0..n {
                data[a * n + b] *= p[a] * p[b].conj();
            }
        }
    }

    pub fn apply_local(&self, rho_tilde: &CMatrix, u: &CMatrix) -> CMatrix {
        rho_tilde.conjugate_by(&self.local_in_frame(u))
    }

    /// Energy `sum_a l_a rho_aa` of the full Hamiltonian.
    pub fn full_energy(&self, rho_tilde: &CMatrix) -> f64 {
        self.eig
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(a, l)| l * rho_tilde[(a, a)].re)
            .sum()
    }

    pub fn system_energy(&self, rho_tilde: &CMatrix) -> f64 {
        self.h_system.trace_product(rho_tilde).re
    }

    pub fn environment_energy(&self, rho_tilde: &CMatrix) -> f64 {
        self.h_environment.trace_product(rho_tilde).re
    }

    /// `K^{ij}_{ab} = sum_e V_{(i e), a} conj(V_{(j e), b})` over the nonzero pairs.
    fn kernel_structure(&self) -> Vec<(usize, usize, [C64; 4])> {
        let (ds, de) = (self.dims.system, self.dims.env);
        let v = self.v();
        let nonzero_rows: Vec<Vec<(usize, C64)>> = (0..v.rows())
            .map(|r| {
                v.row(r)
                    .iter()
                    .enumerate()
                    .filter(|(_, z)| **z != ZERO)
                    .map(|(a, z)| (a, *z))
                    .collect()
            })
            .collect();
        let mut acc: BTreeMap<(usize, usize), [C64; 4]> = BTreeMap::new();
        for e in 0..de {
            for i in 0..ds {
                for j in 0..ds {
                    for &(a, va) in &nonzero_rows[i * de + e] {
                        for &(b, vb) in &nonzero_rows[j * de + e] {
                            acc.entry((a, b)).or_insert([ZERO; 4])[i * 2 + j] += va * vb.conj();
                        }
                    }
                }
            }
        }
        acc.into_iter().map(|((a, b), k)| (a, b, k)).collect()
    }

    /// Coefficients of the reduced system state for a frame state, so that
    /// `tr_E` after free evolution costs one pass over the sparse pairs.
    /// Requires a qubit system.
    pub fn reduced_kernel(&self, rho_tilde: &CMatrix) -> ReducedKernel {
        assert_eq!(self.dims.system, 2, "reduced kernel supports qubit systems");
        let pairs = self
            .kernel
            .iter()
            .filter_map(|&(a, b, k)| {
                let r = rho_tilde[(a, b)];
                if r == ZERO {
                    return None;
                }
                Some((a, b, [k[0] * r, k[1] * r, k[2] * r, k[3] * r]))
            })
            .collect();
        ReducedKernel { pairs }
    }

    /// `tr_E` of the frame state, returned in the product basis.
    pub fn reduced_system(&self, rho_tilde: &CMatrix) -> CMatrix {
        let full = self.from_frame(rho_tilde);
        crate::qmath::partial_trace_matrix(&full, self.dims, crate::qmath::Subsystem::System)
            .expect("frame dims are consistent")
    }
}

impl ReducedKernel {
    /// Reduced qubit state after free evolution by `t` (entries 00, 01, 10, 11).
    pub fn at(&self, phases: &[C64]) -> [C64; 4] {
        let mut out = [ZERO; 4];
        for &(a, b, c) in &self.pairs {
            let w = phases[a] * phases[b].conj();
            for (o, ci) in out.iter_mut().zip(c) {
                *o += ci * w;
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}
