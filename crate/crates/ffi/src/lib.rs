//! C ABI for `ergox`.
//!
//! Every fallible call returns an [`ErgoxStatus`]; on failure the message is
//! kept per thread and read with [`ergox_last_error_message`]. Objects are
//! opaque handles created by `*_new`/constructor calls and released with the
//! matching `*_free`. Output pointers are written only on success.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ergox::control::{lie_algebra_dimension, ControlProblem};
use ergox::ergotropy::{ergotropy, local_ergotropy, EnergyMode, EnergyModel, LocalErgotropyOptions};
use ergox::models::{
    jc_dressed_state, jc_product_state, jc_thermal_input, Branch, JCParams, SpinChainParams, ThermalPair,
    ThermalSpec,
};
use ergox::protocols::{apply_protocol, fock_extraction_protocol, greedy_protocol, GreedyConfig, GreedyVariant, Protocol};
use ergox::qmath::{CMatrix, Dims, QOperator, QState, C64};
use ergox::Error;

/// Work and heat measured against `H_SE`.
pub const ERGOX_MODE_FULL: u32 = 0;
/// Work and heat measured against `H_S + H_E`.
pub const ERGOX_MODE_NONINTERACTING: u32 = 1;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErgoxStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NumericalFailure = 3,
    InvariantViolation = 4,
    Panic = 5,
}

/// Jaynes-Cummings parameters with the derived energy model.
pub struct ErgoxModel {
    params: JCParams,
    model: EnergyModel,
}

pub struct ErgoxState(QState);

pub struct ErgoxOperator(QOperator);

pub struct ErgoxProtocol(Protocol);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NUL removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(ErgoxStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::NoConvergence { .. } | Error::LieNoConvergence(_) => ErgoxStatus::NumericalFailure,
            Error::Invariant(_) => ErgoxStatus::InvariantViolation,
            _ => ErgoxStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(ErgoxStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(ErgoxStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ErgoxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ErgoxStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            ErgoxStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = value;
    Ok(())
}

fn mode(m: u32) -> Result<EnergyMode, Failure> {
    match m {
        ERGOX_MODE_FULL => Ok(EnergyMode::Full),
        ERGOX_MODE_NONINTERACTING => Ok(EnergyMode::Noninteracting),
        _ => Err(invalid(format!("unknown energy mode {m}"))),
    }
}

unsafe fn read_matrix(dim_s: usize, dim_e: usize, re: *const f64, im: *const f64) -> Result<(CMatrix, Dims), Failure> {
    if re.is_null() {
        return Err(null("re"));
    }
    let dims = Dims::new(dim_s, dim_e);
    let n = dims.total();
    if n == 0 {
        return Err(invalid("dimensions must be positive"));
    }
    let re = std::slice::from_raw_parts(re, n * n);
    let im = if im.is_null() { None } else { Some(std::slice::from_raw_parts(im, n * n)) };
    let data = (0..n * n).map(|k| C64::new(re[k], im.map_or(0.0, |v| v[k]))).collect();
    Ok((CMatrix::from_vec(n, n, data), dims))
}

fn release<T>(p: *mut T) {
    if !p.is_null() {
        // SAFETY: handles are only ever created by Box::into_raw in `put`.
        drop(unsafe { Box::from_raw(p) });
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ergox_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ergox_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Resonant or detuned JC model with photon cutoff `cutoff`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn ergox_jc_model_new(
    omega_s: f64,
    omega_e: f64,
    coupling: f64,
    cutoff: usize,
    out: *mut *mut ErgoxModel,
) -> ErgoxStatus {
    guard(|| {
        let params = JCParams::new(omega_s, omega_e, coupling, cutoff);
        let model = EnergyModel::jc(&params)?;
        put(out, ErgoxModel { params, model })
    })
}

/// Hilbert-space dimension `2 (N + 1)`, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ergox_jc_model_dim(model: *const ErgoxModel) -> usize {
    model.as_ref().map_or(0, |m| m.params.dim())
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ergox_jc_model_free(model: *mut ErgoxModel) {
    release(model)
}

/// Product state `|qubit, photons>`.
///
/// # Safety
/// `model` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn ergox_state_jc_product(
    model: *const ErgoxModel,
    qubit: usize,
    photons: usize,
    out: *mut *mut ErgoxState,
) -> ErgoxStatus {
    guard(|| {
        let m = get(model, "model")?;
        let psi = jc_product_state(&m.params, qubit, photons)?;
        put(out, ErgoxState(QState::pure(&psi, m.params.dims())?))
    })
}

/// Dressed eigenstate `|n+>` (`plus`) or `|n->`.
///
/// # Safety
/// `model` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn ergox_state_jc_dressed(
    model: *const ErgoxModel,
    n: usize,
    plus: bool,
    out: *mut *mut ErgoxState,
) -> ErgoxStatus {
    guard(|| {
        let m = get(model, "model")?;
        let branch = if plus { Branch::Plus } else { Branch::Minus };
        let psi = jc_dressed_state(&m.params, n, branch)?;
        put(out, ErgoxState(QState::pure(&psi, m.params.dims())?))
    })
}

/// Product of qubit and cavity Gibbs states; a temperature of 0 gives the
/// ground state.
///
/// # Safety
/// `model` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn ergox_state_jc_thermal(
    model: *const ErgoxModel,
    t_system: f64,
    t_environment: f64,
    out: *mut *mut ErgoxState,
) -> ErgoxStatus {
    guard(|| {
        let m = get(model, "model")?;
        let pair = ThermalPair {
            system: ThermalSpec::from_temperature(t_system)?,
            environment: ThermalSpec::from_temperature(t_environment)?,
        };
        put(out, ErgoxState(jc_thermal_input(&m.params, pair)?))
    })
}

/// Density matrix from row-major real and imaginary parts of length
/// `(dim_s dim_e)^2`; `im` may be null for a real matrix.
///
/// # Safety
/// `re` (and `im` when non-null) must point to that many doubles.
#[no_mangle]
pub unsafe extern "C" fn ergox_state_from_density(
    dim_s: usize,
    dim_e: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut ErgoxState,
) -> ErgoxStatus {
    guard(|| {
        let (m, dims) = read_matrix(dim_s, dim_e, re, im)?;
        put(out, ErgoxState(QState::new(m, dims)?))
    })
}

/// # Safety
/// `state` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ergox_state_dim(state: *const ErgoxState) -> usize {
    state.as_ref().map_or(0, |s| s.0.dim())
}

/// # Safety
/// `state` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ergox_state_free(state: *mut ErgoxState) {
    release(state)
}

/// Hermitian operator from row-major parts, as for states.
///
/// # Safety
/// `re` (and `im` when non-null) must point to `(dim_s dim_e)^2` doubles.
#[no_mangle]
pub unsafe extern "C" fn ergox_operator_from_matrix(
    dim_s: usize,
    dim_e: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut ErgoxOperator,
) -> ErgoxStatus {
    guard(|| {
        let (m, dims) = read_matrix(dim_s, dim_e, re, im)?;
        put(out, ErgoxOperator(QOperator::hermitian(m, dims)?))
    })
}

/// `H_SE` (`ERGOX_MODE_FULL`) or `H_S + H_E` of the model.
///
/// # Safety
/// `model` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn ergox_jc_hamiltonian(
    model: *const ErgoxModel,
    energy_mode: u32,
    out: *mut *mut ErgoxOperator,
) -> ErgoxStatus {
    guard(|| {
        let m = get(model, "model")?;
        put(out, ErgoxOperator(m.model.hamiltonian(mode(energy_mode)?)))
    })
}

/// # Safety
/// `op` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ergox_operator_free(op: *mut ErgoxOperator) {
    release(op)
}

/// Global ergotropy of `state` with respect to `hamiltonian`.
///
/// # Safety
/// Handles must be live and `out_value` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn ergox_ergotropy(
    state: *const ErgoxState,
    hamiltonian: *const ErgoxOperator,
    out_value: *mut f64,
) -> ErgoxStatus {
    guard(|| {
        let r = ergotropy(&get(state, "state")?.0, &get(hamiltonian, "hamiltonian")?.0)?;
        write(out_value, r.value)
    })
}

/// Local ergotropy over qubit unitaries (system dimension 2).
///
/// # Safety
/// Handles must be live and `out_value` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn ergox_local_ergotropy(
    state: *const ErgoxState,
    hamiltonian: *const ErgoxOperator,
    seed: u64,
    out_value: *mut f64,
) -> ErgoxStatus {
    guard(|| {
        let opts = LocalErgotropyOptions {
            seed,
            ..Default::default()
        };
        let r = local_ergotropy(&get(state, "state")?.0, &get(hamiltonian, "hamiltonian")?.0, opts)?;
        write(out_value, r.value)
    })
}

/// Analytic sequence emptying `|0, photons>` on a resonant model.
///
/// # Safety
/// `model` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn ergox_fock_protocol(
    model: *const ErgoxModel,
    photons: usize,
    out: *mut *mut ErgoxProtocol,
) -> ErgoxStatus {
    guard(|| {
        let m = get(model, "model")?;
        put(out, ErgoxProtocol(fock_extraction_protocol(&m.params, photons)?))
    })
}

/// Greedy bang-bang search with default settings (horizon `3 pi / Omega`).
/// `pure_variant` stops at the first stall instead of applying random kicks.
///
/// # Safety
/// Handles must be live and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn ergox_greedy_protocol(
    model: *const ErgoxModel,
    state: *const ErgoxState,
    seed: u64,
    energy_mode: u32,
    pure_variant: bool,
    out: *mut *mut ErgoxProtocol,
) -> ErgoxStatus {
    guard(|| {
        let m = get(model, "model")?;
        let s = get(state, "state")?;
        let cfg = GreedyConfig {
            seed,
            mode: mode(energy_mode)?,
            variant: if pure_variant { GreedyVariant::Pure } else { GreedyVariant::Thermal },
            ..GreedyConfig::for_coupling(m.params.coupling)
        };
        put(out, ErgoxProtocol(greedy_protocol(&s.0, &m.model, &cfg)?.protocol))
    })
}

/// Parses the JSON form written by [`ergox_protocol_to_json`].
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn ergox_protocol_from_json(json: *const c_char, out: *mut *mut ErgoxProtocol) -> ErgoxStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|e| invalid(format!("json is not UTF-8: {e}")))?;
        put(out, ErgoxProtocol(Protocol::from_json(text)?))
    })
}

/// Serializes a protocol; free the string with [`ergox_string_free`].
///
/// # Safety
/// `protocol` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn ergox_protocol_to_json(protocol: *const ErgoxProtocol, out: *mut *mut c_char) -> ErgoxStatus {
    guard(|| {
        let text = get(protocol, "protocol")?.0.to_json()?;
        let c = CString::new(text).map_err(|e| invalid(e.to_string()))?;
        write(out, c.into_raw())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn ergox_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Number of steps (free intervals plus local unitaries).
///
/// # Safety
/// `protocol` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ergox_protocol_len(protocol: *const ErgoxProtocol) -> usize {
    protocol.as_ref().map_or(0, |p| p.0.len())
}

/// # Safety
/// `protocol` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ergox_protocol_local_ops(protocol: *const ErgoxProtocol) -> usize {
    protocol.as_ref().map_or(0, |p| p.0.local_ops())
}

/// Sum of free-evolution intervals; NaN for a null handle.
///
/// # Safety
/// `protocol` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ergox_protocol_total_free_time(protocol: *const ErgoxProtocol) -> f64 {
    protocol.as_ref().map_or(f64::NAN, |p| p.0.total_free_time())
}

/// # Safety
/// `protocol` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ergox_protocol_free(protocol: *mut ErgoxProtocol) {
    release(protocol)
}

/// Applies `protocol` to `state` and reports extracted work and the
/// decrease of bath energy. Either output pointer may be null.
///
/// # Safety
/// Handles must be live; non-null outputs must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn ergox_apply_protocol(
    model: *const ErgoxModel,
    state: *const ErgoxState,
    protocol: *const ErgoxProtocol,
    energy_mode: u32,
    out_work: *mut f64,
    out_heat: *mut f64,
) -> ErgoxStatus {
    guard(|| {
        let m = get(model, "model")?;
        let trace = apply_protocol(&get(state, "state")?.0, &m.model, &get(protocol, "protocol")?.0, mode(energy_mode)?)?;
        if !out_work.is_null() {
            *out_work = trace.report.work;
        }
        if !out_heat.is_null() {
            *out_heat = trace.report.heat;
        }
        Ok(())
    })
}

/// Lie-algebra dimension for a Heisenberg chain with full control of the
/// first `controlled_sites` spins, and the maximum `4^sites - 1`.
///
/// # Safety
/// Output pointers must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn ergox_lie_heisenberg(
    sites: usize,
    gamma: f64,
    delta: f64,
    controlled_sites: usize,
    tol: f64,
    out_dimension: *mut usize,
    out_max: *mut usize,
) -> ErgoxStatus {
    guard(|| {
        if out_dimension.is_null() || out_max.is_null() {
            return Err(null("output pointer"));
        }
        let cp = ControlProblem::heisenberg(&SpinChainParams::new(sites, gamma, delta), controlled_sites)?;
        let r = lie_algebra_dimension(&cp, tol)?;
        *out_dimension = r.dimension;
        *out_max = r.max_possible;
        Ok(())
    })
}
