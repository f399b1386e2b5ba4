use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::optim::{coordinate_refine, nelder_mead, radical_inverse, NelderMeadOptions};
use crate::qmath::{CMatrix, QOperator, QState, C64, ZERO};

#[derive(Clone, Copy, Debug)]
pub struct LocalErgotropyOptions {
    pub starts: usize,
    pub f_tolerance: f64,
    pub seed: u64,
}

impl Default for LocalErgotropyOptions {
    fn default() -> Self {
        Self {
            starts: 16,
            f_tolerance: 1e-10,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LocalErgotropy {
    /// Best extracted energy found; a lower bound on the true local ergotropy.
    pub value: f64,
    /// Qubit unitary attaining `value` (identity when nothing was found).
    pub unitary: CMatrix,
    /// Objective spread across the final simplex of the winning start.
    pub residual: f64,
    pub evaluations: usize,
}

/// `Rz(a) Ry(b) Rz(c)`.
pub fn euler_unitary(a: f64, b: f64, c: f64) -> CMatrix {
    let (sb, cb) = (0.5 * b).sin_cos();
    let p = C64::from_polar(1.0, -0.5 * (a + c));
    let q = C64::from_polar(1.0, -0.5 * (a - c));
    CMatrix::from_vec(2, 2, vec![p * cb, -q * sb, q.conj() * sb, p.conj() * cb])
}

/// Energy of `(U (x) I) rho (U (x) I)^dagger` as a quadratic form in the
/// entries of `U`, with `t[i][j][k][l] = sum_{e,f} H_{(j f),(i e)} rho_{(k e),(l f)}`.
struct LocalEnergy {
    t: [[[[C64; 2]; 2]; 2]; 2],
}

impl LocalEnergy {
    fn new(rho: &CMatrix, h: &CMatrix, env: usize) -> Self {
        let mut t = [[[[ZERO; 2]; 2]; 2]; 2];
        for (i, ti) in t.iter_mut().enumerate() {
            for (j, tij) in ti.iter_mut().enumerate() {
                for (k, tijk) in tij.iter_mut().enumerate() {
                    for (l, slot) in tijk.iter_mut().enumerate() {
                        let mut acc = ZERO;
                        for e in 0..env {
                            for f in 0..env {
                                acc += h[(j * env + f, i * env + e)] * rho[(k * env + e, l * env + f)];
                            }
                        }
                        *slot = acc;
                    }
                }
            }
        }
        Self { t }
    }

    fn energy(&self, u: &CMatrix) -> f64 {
        let mut acc = ZERO;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        acc += u[(i, k)] * u[(j, l)].conj() * self.t[i][j][k][l];
                    }
                }
            }
        }
        acc.re
    }
}

/// Local ergotropy for a qubit system: the largest energy drop of `h` under
/// unitaries of the form `U_S (x) I`. Multi-start Nelder-Mead over Euler
/// angles seeded by a randomly shifted Halton sequence.
pub fn local_ergotropy(rho: &QState, h: &QOperator, opts: LocalErgotropyOptions) -> Result<LocalErgotropy> {
    crate::qmath::same_dims(rho.dims(), h.dims())?;
    let dims = rho.dims();
    if dims.system != 2 {
        return Err(Error::UnsupportedDimension(dims.system));
    }
    let form = LocalEnergy::new(rho.matrix(), h.matrix(), dims.env);
    let identity = CMatrix::identity(2);
    let e0 = form.energy(&identity);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let shift: [f64; 3] = [rng.gen(), rng.gen(), rng.gen()];
    let scale = [TAU, PI, TAU];
    let bases = [2u64, 3, 5];

    let mut objective = |x: &[f64]| form.energy(&euler_unitary(x[0], x[1], x[2]));
    let nm = NelderMeadOptions {
        f_tolerance: opts.f_tolerance,
        ..Default::default()
    };

    let mut best_f = e0;
    let mut best_u = identity;
    let mut residual = 0.0;
    let mut evaluations = 1;
    for s in 0..opts.starts {
        let x0: Vec<f64> = (0..3)
            .map(|d| ((radical_inverse(s as u64 + 1, bases[d]) + shift[d]).fract()) * scale[d])
            .collect();
        let mut m = nelder_mead(&mut objective, &x0, nm);
        evaluations += m.evaluations;
        evaluations += coordinate_refine(&mut objective, &mut m.x, &mut m.f, 1e-2, 1e-12);
        if m.f < best_f {
            best_f = m.f;
            best_u = euler_unitary(m.x[0], m.x[1], m.x[2]);
            residual = m.spread;
        }
    }

    Ok(LocalErgotropy {
        value: (e0 - best_f).max(0.0),
        unitary: best_u,
        residual,
        evaluations,
    })
}
