use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::eig::{check_hermitian, eig_hermitian_matrix, EigDecomposition, HERMITIAN_TOLERANCE};
use super::matrix::{vec_norm, CMatrix, C64};

pub const TRACE_TOLERANCE: f64 = 1e-10;
pub const POSITIVITY_TOLERANCE: f64 = 1e-10;

/// Bipartite dimension tag. The system S is always the left tensor factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub system: usize,
    pub env: usize,
}

impl Dims {
    pub fn new(system: usize, env: usize) -> Self {
        Self { system, env }
    }

    pub fn mono(d: usize) -> Self {
        Self { system: d, env: 1 }
    }

    pub fn total(&self) -> usize {
        self.system * self.env
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subsystem {
    System,
    Environment,
}

/// Square operator on `H_S (x) H_E`.
#[derive(Clone, Debug)]
pub struct QOperator {
    matrix: CMatrix,
    dims: Dims,
    hermitian: bool,
}

impl QOperator {
    pub fn new(matrix: CMatrix, dims: Dims) -> Result<Self> {
        check_shape(&matrix, dims)?;
        Ok(Self {
            matrix,
            dims,
            hermitian: false,
        })
    }

    /// Builds an operator flagged Hermitian, rejecting matrices that are not.
    pub fn hermitian(mut matrix: CMatrix, dims: Dims) -> Result<Self> {
        check_shape(&matrix, dims)?;
        check_hermitian(&matrix)?;
        matrix.symmetrize();
        Ok(Self {
            matrix,
            dims,
            hermitian: true,
        })
    }

    pub fn identity(dims: Dims) -> Self {
        Self {
            matrix: CMatrix::identity(dims.total()),
            dims,
            hermitian: true,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.total()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn with_dims(mut self, dims: Dims) -> Result<Self> {
        check_shape(&self.matrix, dims)?;
        self.dims = dims;
        Ok(self)
    }

    pub fn eig(&self) -> Result<EigDecomposition> {
        eig_hermitian(self)
    }

    /// `Re tr(A rho)`.
    pub fn expectation(&self, rho: &QState) -> f64 {
        self.matrix.trace_product(rho.matrix()).re
    }

    pub fn add(&self, rhs: &QOperator) -> Result<QOperator> {
        same_dims(self.dims, rhs.dims)?;
        Ok(QOperator {
            matrix: &self.matrix + &rhs.matrix,
            dims: self.dims,
            hermitian: self.hermitian && rhs.hermitian,
        })
    }

    pub fn sub(&self, rhs: &QOperator) -> Result<QOperator> {
        same_dims(self.dims, rhs.dims)?;
        Ok(QOperator {
            matrix: &self.matrix - &rhs.matrix,
            dims: self.dims,
            hermitian: self.hermitian && rhs.hermitian,
        })
    }

    /// `V A V^dagger` for a unitary `V`; Hermiticity is preserved.
    pub fn conjugate_by(&self, v: &CMatrix) -> QOperator {
        let mut matrix = self.matrix.conjugate_by(v);
        if self.hermitian {
            matrix.symmetrize();
        }
        QOperator {
            matrix,
            dims: self.dims,
            hermitian: self.hermitian,
        }
    }
}

/// Density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug)]
pub struct QState {
    matrix: CMatrix,
    dims: Dims,
}

impl QState {
    /// Validates Hermiticity, trace and positivity.
    pub fn new(mut matrix: CMatrix, dims: Dims) -> Result<Self> {
        check_shape(&matrix, dims)?;
        check_hermitian(&matrix)
            .map_err(|_| Error::InvalidState("density matrix is not Hermitian".into()))?;
        matrix.symmetrize();
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > TRACE_TOLERANCE {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let eig = eig_hermitian_matrix(&matrix)?;
        if eig.min() < -POSITIVITY_TOLERANCE {
            return Err(Error::InvalidState(format!(
                "smallest eigenvalue {} is negative",
                eig.min()
            )));
        }
        Ok(Self { matrix, dims })
    }

    /// Wraps a matrix known to be a valid state (e.g. the image of one under
    /// a unitary channel or a partial trace).
    pub(crate) fn from_trusted(mut matrix: CMatrix, dims: Dims) -> Self {
        debug_assert_eq!(matrix.rows(), dims.total());
        matrix.symmetrize();
        Self { matrix, dims }
    }

    /// `|psi><psi|` after normalizing `psi`.
    pub fn pure(psi: &[C64], dims: Dims) -> Result<Self> {
        if psi.len() != dims.total() {
            return Err(Error::DimensionMismatch(format!(
                "state vector has length {}, dims require {}",
                psi.len(),
                dims.total()
            )));
        }
        let norm = vec_norm(psi);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("state vector has zero norm".into()));
        }
        let v: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Ok(Self::from_trusted(CMatrix::outer(&v), dims))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.total()
    }

    pub fn evolve(&self, u: &CMatrix) -> QState {
        QState::from_trusted(self.matrix.conjugate_by(u), self.dims)
    }

    /// Convex combination `lambda * self + (1 - lambda) * other`.
    pub fn mix(&self, other: &QState, lambda: f64) -> Result<QState> {
        same_dims(self.dims, other.dims)?;
        let m = &self.matrix.scale_real(lambda) + &other.matrix.scale_real(1.0 - lambda);
        Ok(QState::from_trusted(m, self.dims))
    }

    pub fn as_operator(&self) -> QOperator {
        QOperator {
            matrix: self.matrix.clone(),
            dims: self.dims,
            hermitian: true,
        }
    }

    /// `<psi| rho |psi>`.
    pub fn fidelity_with_pure(&self, psi: &[C64]) -> f64 {
        let rho_psi = self.matrix.mul_vec(psi);
        psi.iter().zip(&rho_psi).map(|(a, b)| a.conj() * b).sum::<C64>().re / vec_norm(psi).powi(2)
    }
}

fn check_shape(m: &CMatrix, dims: Dims) -> Result<()> {
    if !m.is_square() || m.rows() != dims.total() || dims.system == 0 || dims.env == 0 {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{} but dims ({}, {}) require side {}",
            m.rows(),
            m.cols(),
            dims.system,
            dims.env,
            dims.total()
        )));
    }
    Ok(())
}

pub(crate) fn same_dims(a: Dims, b: Dims) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch(format!(
            "({}, {}) vs ({}, {})",
            a.system, a.env, b.system, b.env
        )));
    }
    Ok(())
}

pub fn eig_hermitian(a: &QOperator) -> Result<EigDecomposition> {
    if a.hermitian && a.matrix.hermitian_deviation() > HERMITIAN_TOLERANCE * a.matrix.max_abs() {
        return Err(Error::NotHermitian {
            deviation: a.matrix.hermitian_deviation(),
        });
    }
    eig_hermitian_matrix(&a.matrix)
}

/// `exp(-i t H)` through the spectral decomposition of `H`.
pub fn unitary_exp(h: &QOperator, t: f64) -> Result<QOperator> {
    let eig = eig_hermitian(h)?;
    Ok(Propagator::from_eig(eig, h.dims()).at(t))
}

/// Cached spectral decomposition of a Hamiltonian for repeated `exp(-i t H)`.
#[derive(Clone, Debug)]
pub struct Propagator {
    eig: EigDecomposition,
    dims: Dims,
}

impl Propagator {
    pub fn new(h: &QOperator) -> Result<Self> {
        Ok(Self::from_eig(eig_hermitian(h)?, h.dims()))
    }

    pub fn from_eig(eig: EigDecomposition, dims: Dims) -> Self {
        Self { eig, dims }
    }

    pub fn eig(&self) -> &EigDecomposition {
        &self.eig
    }

    pub fn at(&self, t: f64) -> QOperator {
        let matrix = self.eig.spectral_map(|l| C64::from_polar(1.0, -l * t));
        QOperator {
            matrix,
            dims: self.dims,
            hermitian: false,
        }
    }
}

/// Kronecker product `a (x) b`; the result carries dims `(dim a, dim b)`.
pub fn tensor(a: &QOperator, b: &QOperator) -> QOperator {
    QOperator {
        matrix: a.matrix.kron(&b.matrix),
        dims: Dims::new(a.dim(), b.dim()),
        hermitian: a.hermitian && b.hermitian,
    }
}

pub fn tensor_states(a: &QState, b: &QState) -> QState {
    QState::from_trusted(a.matrix.kron(&b.matrix), Dims::new(a.dim(), b.dim()))
}

/// `A (x) I_E` on a space with environment dimension `env`.
pub fn embed_system(a: &CMatrix, env: usize) -> CMatrix {
    a.kron(&CMatrix::identity(env))
}

/// `I_S (x) B` on a space with system dimension `system`.
pub fn embed_env(b: &CMatrix, system: usize) -> CMatrix {
    CMatrix::identity(system).kron(b)
}

/// Reduced state on the kept subsystem.
pub fn partial_trace(rho: &QState, keep: Subsystem) -> Result<QState> {
    Ok(QState::from_trusted(
        partial_trace_matrix(rho.matrix(), rho.dims(), keep)?,
        Dims::mono(match keep {
            Subsystem::System => rho.dims().system,
            Subsystem::Environment => rho.dims().env,
        }),
    ))
}

pub fn partial_trace_matrix(m: &CMatrix, dims: Dims, keep: Subsystem) -> Result<CMatrix> {
    if !m.is_square() || m.rows() != dims.total() {
        return Err(Error::DimensionMismatch(format!(
            "matrix side {} does not match dims ({}, {})",
            m.rows(),
            dims.system,
            dims.env
        )));
    }
    let (ds, de) = (dims.system, dims.env);
    Ok(match keep {
        Subsystem::System => CMatrix::from_fn(ds, ds, |i, j| {
            (0..de).map(|e| m[(i * de + e, j * de + e)]).sum()
        }),
        Subsystem::Environment => CMatrix::from_fn(de, de, |a, b| {
            (0..ds).map(|s| m[(s * de + a, s * de + b)]).sum()
        }),
    })
}

/// `D(rho, sigma) = 1/2 sum |lambda_i(rho - sigma)|`.
pub fn trace_distance(rho: &QState, sigma: &QState) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "trace distance between dimensions {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let diff = rho.matrix() - sigma.matrix();
    let eig = eig_hermitian_matrix(&diff)?;
    Ok((0.5 * eig.eigenvalues.iter().map(|l| l.abs()).sum::<f64>()).min(1.0))
}

/// Textbook Pauli matrices in the `(|0>, |1>)` computational basis,
/// `sigma_z = diag(1, -1)`.
pub fn pauli_x() -> CMatrix {
    CMatrix::from_vec(2, 2, vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_vec(2, 2, vec![C64::new(0.0, 0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0)])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_real_diag(&[1.0, -1.0])
}
