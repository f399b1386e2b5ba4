//! JSON input specs for states and operators, and `%.12g` number output.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{
    jc_coherent_input, jc_dressed_state, jc_hamiltonian, jc_product_state, jc_thermal_input,
    spin_chain_hamiltonian, temperature_for_nbar, Branch, JCParams, SpinChainParams, ThermalPair,
    ThermalSpec,
};
use crate::qmath::{CMatrix, Dims, QOperator, QState, C64};

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Formats like C's `%.12g`.
pub fn fmt_g(x: f64) -> String {
    fmt_g_digits(x, SIGNIFICANT_DIGITS)
}

pub fn fmt_g_digits(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let p = digits.max(1);
    let sci = format!("{:.*e}", p - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= p as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", strip_zeros(mantissa), sign, exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Matrix as rows of `[re, im]` pairs.
pub type MatrixRows = Vec<Vec<C64>>;

pub fn matrix_from_rows(rows: &MatrixRows) -> Result<CMatrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Config("matrix must be square and nonempty".into()));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub fn matrix_to_rows(m: &CMatrix) -> MatrixRows {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

fn dims_or_mono(dims: Option<[usize; 2]>, n: usize) -> Result<Dims> {
    let d = match dims {
        Some([s, e]) => Dims::new(s, e),
        None => Dims::mono(n),
    };
    if d.total() != n {
        return Err(Error::Config(format!("dims {}x{} do not match matrix size {n}", d.system, d.env)));
    }
    Ok(d)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemperatureSpec {
    Ground,
    Temperature(f64),
    Beta(f64),
    /// Mean occupation of the oscillator (environment only).
    Nbar(f64),
}

impl TemperatureSpec {
    pub fn resolve(self, omega: f64) -> Result<ThermalSpec> {
        match self {
            TemperatureSpec::Ground => Ok(ThermalSpec::zero_temperature()),
            TemperatureSpec::Temperature(t) => ThermalSpec::from_temperature(t),
            TemperatureSpec::Beta(b) => ThermalSpec::from_beta(b),
            TemperatureSpec::Nbar(n) => {
                if !(n.is_finite() && n >= 0.0) {
                    return Err(Error::Config(format!("nbar must be >= 0, got {n}")));
                }
                ThermalSpec::from_temperature(temperature_for_nbar(omega, n))
            }
        }
    }
}

/// State input. JC presets use the model parameters of the run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    JcProduct { qubit: usize, photons: usize },
    JcDressed { n: usize, branch: Branch },
    JcCoherent { qubit: usize, alpha: C64 },
    JcThermal { system: TemperatureSpec, environment: TemperatureSpec },
    Pure { dims: Option<[usize; 2]>, amplitudes: Vec<C64> },
    Density { dims: Option<[usize; 2]>, matrix: MatrixRows },
}

impl StateSpec {
    pub fn build(&self, p: &JCParams) -> Result<QState> {
        match self {
            StateSpec::JcProduct { qubit, photons } => QState::pure(&jc_product_state(p, *qubit, *photons)?, p.dims()),
            StateSpec::JcDressed { n, branch } => QState::pure(&jc_dressed_state(p, *n, *branch)?, p.dims()),
            StateSpec::JcCoherent { qubit, alpha } => {
                let (psi, _) = jc_coherent_input(p, *qubit, *alpha)?;
                QState::pure(&psi, p.dims())
            }
            StateSpec::JcThermal { system, environment } => {
                let pair = ThermalPair {
                    system: system.resolve(p.omega_s)?,
                    environment: environment.resolve(p.omega_e)?,
                };
                jc_thermal_input(p, pair)
            }
            StateSpec::Pure { dims, amplitudes } => {
                let d = dims_or_mono(*dims, amplitudes.len())?;
                QState::pure(amplitudes, d)
            }
            StateSpec::Density { dims, matrix } => {
                let m = matrix_from_rows(matrix)?;
                let d = dims_or_mono(*dims, m.rows())?;
                QState::new(m, d)
            }
        }
    }
}

/// Hamiltonian input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSpec {
    /// Full JC Hamiltonian of the run's model.
    Jc,
    /// `H_S + H_E` of the run's model.
    JcNoninteracting,
    Heisenberg(SpinChainParams),
    Matrix { dims: Option<[usize; 2]>, matrix: MatrixRows },
}

impl OperatorSpec {
    pub fn build(&self, p: &JCParams) -> Result<QOperator> {
        match self {
            OperatorSpec::Jc => jc_hamiltonian(p),
            OperatorSpec::JcNoninteracting => Ok(crate::ergotropy::EnergyModel::jc(p)?.noninteracting()),
            OperatorSpec::Heisenberg(sp) => spin_chain_hamiltonian(sp),
            OperatorSpec::Matrix { dims, matrix } => {
                let m = matrix_from_rows(matrix)?;
                let d = dims_or_mono(*dims, m.rows())?;
                QOperator::hermitian(m, d)
            }
        }
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Writes to `path`, or to stdout when `None`.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_format_matches_printf() {
        let cases = [
            (1.0, "1"),
            (12.0, "12"),
            (0.1, "0.1"),
            (1.0 / 3.0, "0.333333333333"),
            (12.49333, "12.49333"),
            (1e-5, "1e-05"),
            (-2.5e-7, "-2.5e-07"),
            (123456789012.0, "123456789012"),
            (1234567890123.0, "1.23456789012e+12"),
            (0.0001, "0.0001"),
            (f64::NAN, "nan"),
            (0.0, "0"),
        ];
        for (x, want) in cases {
            assert_eq!(fmt_g(x), want, "{x}");
        }
    }

    #[test]
    fn state_spec_is_externally_tagged() {
        let s: StateSpec = serde_json::from_str(r#"{"jc_product": {"qubit": 0, "photons": 3}}"#).unwrap();
        assert_eq!(s, StateSpec::JcProduct { qubit: 0, photons: 3 });
        let t: StateSpec =
            serde_json::from_str(r#"{"jc_thermal": {"system": "ground", "environment": {"nbar": 12}}}"#).unwrap();
        let rho = t.build(&JCParams::default().with_cutoff(20)).unwrap();
        assert_eq!(rho.dim(), 42);
        assert!(serde_json::from_str::<StateSpec>(r#"{"jc_product": {"qubit": 0}}"#).is_err());
    }

    #[test]
    fn density_matrix_round_trip() {
        let s: StateSpec =
            serde_json::from_str(r#"{"density": {"matrix": [[[0.25, 0], [0, 0]], [[0, 0], [0.75, 0]]]}}"#).unwrap();
        let rho = s.build(&JCParams::default()).unwrap();
        assert_eq!(rho.dims(), Dims::mono(2));
        let rows = matrix_to_rows(rho.matrix());
        assert_eq!(rows[1][1], C64::new(0.75, 0.0));
    }

    #[test]
    fn operator_dims_checked() {
        let o: OperatorSpec =
            serde_json::from_str(r#"{"matrix": {"dims": [2, 2], "matrix": [[[0, 0], [0, 0]], [[0, 0], [1, 0]]]}}"#)
                .unwrap();
        assert!(o.build(&JCParams::default()).is_err());
    }
}
