//! Seeded random matrices for property checks and randomized protocols.

use rand::Rng;
use rand_distr::StandardNormal;

use super::matrix::{inner, vec_norm, CMatrix, C64};
use super::operator::{Dims, QOperator, QState};

pub fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| gaussian_complex(rng))
}

/// GUE-like Hermitian matrix `(G + G^dagger) / 2`.
pub fn random_hermitian<R: Rng + ?Sized>(dims: Dims, rng: &mut R) -> QOperator {
    let g = gaussian_matrix(dims.total(), rng);
    let h = (&g + &g.adjoint()).scale_real(0.5);
    QOperator::hermitian(h, dims).expect("symmetrized matrix is Hermitian")
}

/// Haar-distributed unitary via Gram-Schmidt on a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = gaussian_matrix(n, rng);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = g.column(j);
        for _ in 0..2 {
            for c in &cols {
                let proj = inner(c, &v);
                for (x, y) in v.iter_mut().zip(c) {
                    *x -= proj * y;
                }
            }
        }
        let norm = vec_norm(&v);
        for x in &mut v {
            *x /= norm;
        }
        cols.push(v);
    }
    CMatrix::from_fn(n, n, |i, j| cols[j][i])
}

pub fn random_pure<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<C64> {
    let v: Vec<C64> = (0..n).map(|_| gaussian_complex(rng)).collect();
    let norm = vec_norm(&v);
    v.into_iter().map(|z| z / norm).collect()
}

/// Full-rank mixed state `G G^dagger / tr(G G^dagger)` (Hilbert-Schmidt measure).
pub fn random_state<R: Rng + ?Sized>(dims: Dims, rng: &mut R) -> QState {
    let g = gaussian_matrix(dims.total(), rng);
    let w = g.matmul_adjoint(&g);
    let tr = w.trace().re;
    QState::from_trusted(w.scale_real(1.0 / tr), dims)
}
