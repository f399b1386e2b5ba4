//! Cyclic Jacobi eigensolver for dense complex Hermitian matrices.

use crate::error::{Error, Result};

use super::matrix::{CMatrix, C64, ZERO};

pub const MAX_SWEEPS: usize = 100;
pub const OFF_DIAGONAL_TOLERANCE: f64 = 1e-13;
/// Relative tolerance of the Hermiticity check, `max|A - A^dagger| <= tol * max|A|`.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// Eigenvalues in ascending order with eigenvectors as matching columns.
#[derive(Clone, Debug)]
pub struct EigDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl EigDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.column(k)
    }

    /// `V f(Lambda) V^dagger` for a real spectral function.
    pub fn spectral_map(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for k in 0..n {
            let fk = f(self.eigenvalues[k]);
            for i in 0..n {
                scaled[(i, k)] *= fk;
            }
        }
        scaled.matmul_adjoint(v)
    }

    /// `||A V - V diag(lambda)||_F`.
    pub fn residual(&self, a: &CMatrix) -> f64 {
        let av = a.matmul(&self.eigenvectors);
        let mut acc = 0.0;
        for i in 0..self.dim() {
            for k in 0..self.dim() {
                let d = av[(i, k)] - self.eigenvectors[(i, k)] * self.eigenvalues[k];
                acc += d.norm_sqr();
            }
        }
        acc.sqrt()
    }
}

/// Checks `max|A - A^dagger| <= HERMITIAN_TOLERANCE * max|A|`.
pub fn check_hermitian(a: &CMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let dev = a.hermitian_deviation();
    if dev > HERMITIAN_TOLERANCE * a.max_abs() {
        return Err(Error::NotHermitian { deviation: dev });
    }
    Ok(())
}

/// Diagonalizes a Hermitian matrix.
///
/// Rotations are only applied to nonzero off-diagonal entries, so exact
/// block structure (e.g. conserved excitation number) is preserved in the
/// eigenvectors.
pub fn eig_hermitian_matrix(a: &CMatrix) -> Result<EigDecomposition> {
    check_hermitian(a)?;
    let n = a.rows();
    let mut m = a.clone();
    m.symmetrize();
    let mut v = CMatrix::identity(n);

    let norm = m.frobenius_norm();
    let threshold = OFF_DIAGONAL_TOLERANCE * norm;
    let skip = 1e-15 * norm / (n.max(1) as f64);

    let mut converged = norm == 0.0;
    let mut sweeps = 0;
    while !converged {
        if off_diagonal_norm(&m) <= threshold {
            converged = true;
            break;
        }
        if sweeps == MAX_SWEEPS {
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                if r <= skip {
                    m[(p, q)] = ZERO;
                    m[(q, p)] = ZERO;
                    continue;
                }
                rotate(&mut m, &mut v, p, q);
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&i| m[(i, i)].re).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(EigDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(m: &CMatrix) -> f64 {
    let n = m.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += m[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Annihilates `m[p][q]` with `m <- G^dagger m G`, `v <- v G`.
fn rotate(m: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let n = m.rows();
    let apq = m[(p, q)];
    let r = apq.norm();
    let phase = apq / r;
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;

    let theta = (aqq - app) / (2.0 * r);
    let t = if theta == 0.0 {
        1.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // G = diag(1, conj(phase)) * [[c, s], [-s, c]]
    let g_pp = C64::new(c, 0.0);
    let g_pq = C64::new(s, 0.0);
    let g_qp = -phase.conj() * s;
    let g_qq = phase.conj() * c;

    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        if mkp == ZERO && mkq == ZERO {
            continue;
        }
        let new_kp = mkp * g_pp + mkq * g_qp;
        let new_kq = mkp * g_pq + mkq * g_qq;
        m[(k, p)] = new_kp;
        m[(k, q)] = new_kq;
        m[(p, k)] = new_kp.conj();
        m[(q, k)] = new_kq.conj();
    }
    m[(p, p)] = C64::new(app - t * r, 0.0);
    m[(q, q)] = C64::new(aqq + t * r, 0.0);
    m[(p, q)] = ZERO;
    m[(q, p)] = ZERO;

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        if vkp == ZERO && vkq == ZERO {
            continue;
        }
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
}

/// Eigenvalues only, ascending. Closed form for 2x2, Jacobi otherwise.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Result<Vec<f64>> {
    if a.rows() == 2 && a.cols() == 2 {
        let a00 = a[(0, 0)].re;
        let a11 = a[(1, 1)].re;
        let off = a[(0, 1)].norm();
        let mean = 0.5 * (a00 + a11);
        let half = (0.25 * (a00 - a11) * (a00 - a11) + off * off).sqrt();
        return Ok(vec![mean - half, mean + half]);
    }
    Ok(eig_hermitian_matrix(a)?.eigenvalues)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_closed_form_agrees_with_jacobi() {
        let a = CMatrix::from_vec(
            2,
            2,
            vec![
                C64::new(0.3, 0.0),
                C64::new(0.1, -0.2),
                C64::new(0.1, 0.2),
                C64::new(0.7, 0.0),
            ],
        );
        let fast = hermitian_eigenvalues(&a).unwrap();
        let slow = eig_hermitian_matrix(&a).unwrap().eigenvalues;
        for (x, y) in fast.iter().zip(&slow) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_matrix_is_trivially_diagonal() {
        let e = eig_hermitian_matrix(&CMatrix::zeros(3, 3)).unwrap();
        assert_eq!(e.eigenvalues, vec![0.0, 0.0, 0.0]);
        assert_eq!(e.eigenvectors, CMatrix::identity(3));
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = CMatrix::from_vec(
            2,
            2,
            vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        );
        assert!(matches!(eig_hermitian_matrix(&a), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn block_structure_survives_rotations() {
        // two decoupled 2x2 blocks on {0, 3} and {1, 2}
        let mut a = CMatrix::zeros(4, 4);
        a[(0, 0)] = C64::new(1.0, 0.0);
        a[(3, 3)] = C64::new(2.0, 0.0);
        a[(0, 3)] = C64::new(0.0, 0.5);
        a[(3, 0)] = C64::new(0.0, -0.5);
        a[(1, 1)] = C64::new(-1.0, 0.0);
        a[(2, 2)] = C64::new(0.5, 0.0);
        a[(1, 2)] = C64::new(0.3, 0.0);
        a[(2, 1)] = C64::new(0.3, 0.0);
        let e = eig_hermitian_matrix(&a).unwrap();
        for k in 0..4 {
            let col = e.eigenvector(k);
            let in_first = col[0] != ZERO || col[3] != ZERO;
            let in_second = col[1] != ZERO || col[2] != ZERO;
            assert!(in_first ^ in_second, "eigenvector {k} mixes blocks: {col:?}");
        }
        assert!(e.residual(&a) < 1e-12);
    }
}
