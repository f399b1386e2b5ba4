//! Dynamical Lie algebras of drift-plus-control problems and the
//! connectedness-chain certificate for the truncated Jaynes-Cummings model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{jc_dressed_state, jc_hamiltonian, jc_product_state, spin_chain_hamiltonian, site_operator, Branch, JCParams, SpinChainParams};
use crate::qmath::{embed_system, inner, pauli_x, pauli_y, pauli_z, CMatrix, QOperator, C64};

/// Largest compound dimension accepted by [`lie_algebra_dimension`].
pub const MAX_LIE_DIMENSION: usize = 64;
pub const DEFAULT_LIE_TOLERANCE: f64 = 1e-9;
/// Candidates with Hilbert-Schmidt norm below this are treated as zero.
const ZERO_NORM: f64 = 1e-12;

/// Drift `H` and Hermitian controls `B_j`, generating `-i H` and `-i B_j`.
#[derive(Clone, Debug)]
pub struct ControlProblem {
    pub drift: QOperator,
    pub controls: Vec<QOperator>,
}

impl ControlProblem {
    pub fn new(drift: QOperator, controls: Vec<QOperator>) -> Result<Self> {
        if !drift.is_hermitian() {
            return Err(Error::InvalidParameter("drift must be Hermitian".into()));
        }
        for (k, c) in controls.iter().enumerate() {
            crate::qmath::same_dims(drift.dims(), c.dims())?;
            if !c.is_hermitian() {
                return Err(Error::InvalidParameter(format!("control {k} must be Hermitian")));
            }
        }
        Ok(Self { drift, controls })
    }

    pub fn dim(&self) -> usize {
        self.drift.dim()
    }

    /// Heisenberg chain with arbitrary fields on the first `controlled_sites` spins.
    pub fn heisenberg(p: &SpinChainParams, controlled_sites: usize) -> Result<Self> {
        let h = spin_chain_hamiltonian(p)?;
        if controlled_sites == 0 || controlled_sites > p.sites {
            return Err(Error::InvalidParameter(format!(
                "controlled_sites = {controlled_sites} must be in 1..={}",
                p.sites
            )));
        }
        let mut controls = Vec::new();
        for site in 0..controlled_sites {
            for op in [pauli_x(), pauli_y(), pauli_z()] {
                controls.push(QOperator::hermitian(site_operator(&op, site, p.sites), h.dims())?);
            }
        }
        Self::new(h, controls)
    }

    /// Truncated JC Hamiltonian with a single `sigma_x` control on the qubit.
    pub fn jc(p: &JCParams) -> Result<Self> {
        let h = jc_hamiltonian(p)?;
        let sx = QOperator::hermitian(embed_system(&pauli_x(), p.cutoff + 1), h.dims())?;
        Self::new(h, vec![sx])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LieAlgebraReport {
    pub dimension: usize,
    /// `d^2 - 1`, the dimension of `su(d)`.
    pub max_possible: usize,
    pub full_controllability: bool,
    /// Commutator passes performed.
    pub generations: usize,
    pub residual_tolerance: f64,
}

/// Orthonormal basis of a real span of traceless Hermitian matrices under
/// the Hilbert-Schmidt inner product.
struct Span {
    vectors: Vec<Vec<f64>>,
    matrices: Vec<CMatrix>,
    tol: f64,
}

impl Span {
    fn insert(&mut self, m: &CMatrix) -> bool {
        let mut v: Vec<f64> = m.data().iter().flat_map(|z| [z.re, z.im]).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= ZERO_NORM {
            return false;
        }
        for x in &mut v {
            *x /= norm;
        }
        for _ in 0..2 {
            for b in &self.vectors {
                let c: f64 = b.iter().zip(&v).map(|(x, y)| x * y).sum();
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        let residual = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if residual <= self.tol {
            return false;
        }
        for x in &mut v {
            *x /= residual;
        }
        let d = m.rows();
        self.matrices
            .push(CMatrix::from_fn(d, d, |i, j| C64::new(v[2 * (i * d + j)], v[2 * (i * d + j) + 1])));
        self.vectors.push(v);
        true
    }

    fn len(&self) -> usize {
        self.vectors.len()
    }
}

fn traceless(a: &CMatrix) -> CMatrix {
    let d = a.rows();
    let shift = a.trace() / d as f64;
    let mut out = a.clone();
    for i in 0..d {
        out[(i, i)] -= shift;
    }
    out
}

/// Dimension of the Lie algebra generated by `-i drift` and `-i controls`
/// (traceless parts), represented by Hermitian matrices `C = -i [A, B]`.
/// Each pass commutes the elements added in the previous pass with the
/// whole current basis; the closure is reached when a pass adds nothing.
pub fn lie_algebra_dimension(cp: &ControlProblem, tol: f64) -> Result<LieAlgebraReport> {
    let d = cp.dim();
    if d > MAX_LIE_DIMENSION {
        return Err(Error::DimensionGuard {
            dim: d,
            limit: MAX_LIE_DIMENSION,
        });
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be in (0, 1)")));
    }
    let max_possible = d * d - 1;
    let mut span = Span {
        vectors: Vec::new(),
        matrices: Vec::new(),
        tol,
    };
    let mut fresh: Vec<usize> = Vec::new();
    for g in std::iter::once(&cp.drift).chain(&cp.controls) {
        if span.insert(&traceless(g.matrix())) {
            fresh.push(span.len() - 1);
        }
    }
    let minus_i = C64::new(0.0, -1.0);
    let mut generations = 0;
    while !fresh.is_empty() && span.len() < max_possible {
        generations += 1;
        if generations > d * d {
            return Err(Error::LieNoConvergence(generations));
        }
        let snapshot = span.len();
        let mut next = Vec::new();
        'pass: for &i in &fresh {
            for j in 0..snapshot {
                if i == j {
                    continue;
                }
                let c = span.matrices[i].commutator(&span.matrices[j]).scale(minus_i);
                if span.insert(&c) {
                    next.push(span.len() - 1);
                    if span.len() == max_possible {
                        break 'pass;
                    }
                }
            }
        }
        fresh = next;
    }
    let dimension = span.len();
    Ok(LieAlgebraReport {
        dimension,
        max_possible,
        full_controllability: dimension == max_possible,
        generations,
        residual_tolerance: tol,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainElement {
    pub label: String,
    /// From the numerically diagonalized Hamiltonian.
    pub numeric: f64,
    pub closed_form: f64,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BohrCoincidence {
    pub first: (String, String),
    pub second: (String, String),
    pub frequency: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub params: JCParams,
    pub elements: Vec<ChainElement>,
    pub max_deviation: f64,
    pub all_nonzero: bool,
    /// Smallest gap between distinct transition frequencies of the dressed levels `E_{n,+-}`.
    pub min_bohr_gap: f64,
    /// Transition frequencies among the dressed levels are pairwise distinct.
    pub bohr_nondegenerate: bool,
    /// Same test with the ground level and the truncated top level included.
    pub bohr_nondegenerate_all_levels: bool,
    pub all_level_coincidences: Vec<BohrCoincidence>,
    /// Every chain transition frequency differs from all other transitions coupled by `sigma_x`.
    pub chain_nonresonant: bool,
    pub verdict: bool,
}

const NONZERO: f64 = 1e-12;
const BOHR_TOLERANCE: f64 = 1e-9;

struct Level {
    label: String,
    energy: f64,
    closed_form: Vec<C64>,
}

fn levels(p: &JCParams) -> Result<Vec<Level>> {
    let mut out = vec![Level {
        label: "00".into(),
        energy: 0.0,
        closed_form: jc_product_state(p, 0, 0)?,
    }];
    for n in 0..p.cutoff {
        for (b, tag) in [(Branch::Minus, '-'), (Branch::Plus, '+')] {
            out.push(Level {
                label: format!("{n}{tag}"),
                energy: p.dressed_energy(n, b),
                closed_form: jc_dressed_state(p, n, b)?,
            });
        }
    }
    out.push(Level {
        label: format!("1,{}", p.cutoff),
        energy: p.truncated_top_energy(),
        closed_form: jc_product_state(p, 1, p.cutoff)?,
    });
    Ok(out)
}

/// Differences `|E_a - E_b|` for `a < b`, sorted.
fn transitions<'a>(levels: &[&'a Level]) -> Vec<(f64, &'a str, &'a str)> {
    let mut out = Vec::new();
    for (i, a) in levels.iter().enumerate() {
        for b in &levels[i + 1..] {
            out.push(((a.energy - b.energy).abs(), a.label.as_str(), b.label.as_str()));
        }
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    out
}

/// Matrix elements of `sigma_x (x) I` along the chain
/// `|00> - |0+> - |1+-> - ... - |N-1,+> - |1,N>`, evaluated on numerical
/// eigenvectors and compared with their closed forms, plus Bohr-frequency
/// nondegeneracy checks.
pub fn connectedness_chain_report(p: &JCParams) -> Result<ChainReport> {
    let h = jc_hamiltonian(p)?;
    let eig = h.eig()?;
    let levels = levels(p)?;
    let d = p.dim();

    // numerical eigenvector nearest in energy, phase-aligned to the closed form
    let numeric: Vec<Vec<C64>> = levels
        .iter()
        .map(|lv| {
            let k = (0..d)
                .min_by(|&a, &b| {
                    (eig.eigenvalues[a] - lv.energy)
                        .abs()
                        .total_cmp(&(eig.eigenvalues[b] - lv.energy).abs())
                })
                .expect("nonempty spectrum");
            let v = eig.eigenvector(k);
            let overlap = inner(&v, &lv.closed_form);
            let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { C64::new(1.0, 0.0) };
            v.into_iter().map(|z| z * phase).collect()
        })
        .collect();
    let sx = embed_system(&pauli_x(), p.cutoff + 1);
    let idx = |label: &str| levels.iter().position(|l| l.label == label).expect("known level");
    let element = |a: usize, b: usize| inner(&numeric[a], &sx.mul_vec(&numeric[b])).re;

    let phi = |n: usize| p.mixing_angle(n);
    let mut chain: Vec<(usize, usize, f64, String)> = vec![(idx("00"), idx("0+"), phi(0).cos(), "<00|sx|0+>".into())];
    for n in 0..p.cutoff.saturating_sub(1) {
        let up = idx(&format!("{}+", n + 1));
        chain.push((
            up,
            idx(&format!("{n}+")),
            phi(n).sin() * phi(n + 1).cos(),
            format!("<{}+|sx|{n}+>", n + 1),
        ));
        chain.push((
            up,
            idx(&format!("{n}-")),
            -phi(n).cos() * phi(n + 1).cos(),
            format!("<{}+|sx|{n}->", n + 1),
        ));
    }
    let top = levels.len() - 1;
    chain.push((
        top,
        idx(&format!("{}+", p.cutoff - 1)),
        phi(p.cutoff - 1).sin(),
        format!("<1,{}|sx|{}+>", p.cutoff, p.cutoff - 1),
    ));

    let elements: Vec<ChainElement> = chain
        .iter()
        .map(|(a, b, closed, label)| {
            let numeric = element(*a, *b);
            ChainElement {
                label: label.clone(),
                numeric,
                closed_form: *closed,
                deviation: (numeric - closed).abs(),
            }
        })
        .collect();
    let max_deviation = elements.iter().map(|e| e.deviation).fold(0.0, f64::max);
    let all_nonzero = elements.iter().all(|e| e.numeric.abs() > NONZERO);

    let dressed: Vec<&Level> = levels[1..top].iter().collect();
    let dressed_tr = transitions(&dressed);
    let gaps = |tr: &[(f64, &str, &str)]| -> f64 {
        let first = tr.first().map_or(f64::INFINITY, |t| t.0);
        tr.windows(2).map(|w| w[1].0 - w[0].0).fold(first, f64::min)
    };
    let min_bohr_gap = gaps(&dressed_tr);
    let bohr_nondegenerate = min_bohr_gap > BOHR_TOLERANCE;

    let all: Vec<&Level> = levels.iter().collect();
    let all_tr = transitions(&all);
    let all_level_coincidences: Vec<BohrCoincidence> = all_tr
        .windows(2)
        .filter(|w| w[1].0 - w[0].0 <= BOHR_TOLERANCE)
        .map(|w| BohrCoincidence {
            first: (w[0].1.to_string(), w[0].2.to_string()),
            second: (w[1].1.to_string(), w[1].2.to_string()),
            frequency: w[0].0,
        })
        .collect();
    let bohr_nondegenerate_all_levels = gaps(&all_tr) > BOHR_TOLERANCE;

    // transitions with a nonzero sigma_x element, in the numeric eigenbasis
    let mut coupled = Vec::new();
    for a in 0..levels.len() {
        for b in a + 1..levels.len() {
            if element(a, b).abs() > NONZERO {
                coupled.push((a, b, (levels[a].energy - levels[b].energy).abs()));
            }
        }
    }
    let chain_nonresonant = chain.iter().all(|&(a, b, _, _)| {
        let f = (levels[a].energy - levels[b].energy).abs();
        f > BOHR_TOLERANCE
            && coupled
                .iter()
                .filter(|&&(x, y, _)| !((x == a && y == b) || (x == b && y == a)))
                .all(|&(_, _, g)| (f - g).abs() > BOHR_TOLERANCE)
    });

    Ok(ChainReport {
        params: *p,
        elements,
        max_deviation,
        all_nonzero,
        min_bohr_gap,
        bohr_nondegenerate,
        bohr_nondegenerate_all_levels,
        all_level_coincidences,
        chain_nonresonant,
        verdict: all_nonzero && bohr_nondegenerate && chain_nonresonant,
    })
}
