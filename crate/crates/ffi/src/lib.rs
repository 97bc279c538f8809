//! C ABI over `iad-core`.
//!
//! Chains and partitions are opaque heap handles created by `iad_*_new`
//! functions and released with the matching `iad_*_free`. Every fallible call
//! returns an [`IadStatus`]; on failure [`iad_last_error_message`] describes
//! the error for the calling thread. Dense matrices are passed row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use iad_core::chain::{steady_state, ProbabilityVector, StochasticMatrix, DEFAULT_KPOW, DEFAULT_TOL};
use iad_core::coarse::Partition;
use iad_core::diagnostics::full_report_with;
use iad_core::iad::{iad_solve as run_iad, IadConfig};
use iad_core::linalg::DenseMatrix;
use iad_core::models::{partition_family, GridSpacing, ModelConfig, PartitionKind};
use iad_core::Error;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IadStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NotStochastic = 4,
    Reducible = 5,
    Singular = 6,
    NotConverged = 7,
    Numerical = 8,
    Io = 9,
    Panic = 10,
}

/// A validated column-stochastic transition matrix.
pub struct IadChain {
    inner: StochasticMatrix,
    // Closed-form steady state for built-in models that have one.
    exact: Option<ProbabilityVector>,
}

impl IadChain {
    fn reference_steady_state(&self) -> iad_core::Result<ProbabilityVector> {
        match &self.exact {
            Some(mu) => Ok(mu.clone()),
            None => steady_state(&self.inner, DEFAULT_TOL, DEFAULT_KPOW),
        }
    }
}

/// An assignment of fine states to coarse states.
pub struct IadPartition {
    inner: Partition,
}

/// Rate diagnostics for one chain, partition and angle-bound index `k`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IadRateReport {
    pub rho_j: f64,
    pub rho_exact_formula: f64,
    pub norm_bound: f64,
    pub k: usize,
    pub sin2_theta: f64,
    pub angle_bound: f64,
    pub sqrt_lambda2: f64,
    pub rho_hat_p: f64,
    pub reversible: bool,
}

/// Tolerances for [`iad_solve`]. Zero fields take the library defaults.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct IadSolveOptions {
    pub tau: f64,
    pub max_outer: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> IadStatus {
    match err {
        Error::Dimension(_) => IadStatus::DimensionMismatch,
        Error::NotStochastic { .. } | Error::NegativeEntry { .. } | Error::NotProbability(_) => {
            IadStatus::NotStochastic
        }
        Error::Reducible | Error::ReducibleCoarseMatrix => IadStatus::Reducible,
        Error::SingularMatrix { .. } | Error::AmbiguousNullspace => IadStatus::Singular,
        Error::NotConverged { .. } | Error::SteadyStateNotConverged { .. } => IadStatus::NotConverged,
        Error::Io(_) => IadStatus::Io,
        Error::InvalidParameter(_)
        | Error::InvalidPartition(_)
        | Error::ZeroMassStratum { .. }
        | Error::NotRefinement { .. }
        | Error::Parse { .. }
        | Error::InsufficientData { .. } => IadStatus::InvalidArgument,
        _ => IadStatus::Numerical,
    }
}

/// Runs `f`, recording any error or panic for [`iad_last_error_message`].
fn guard<F: FnOnce() -> Result<(), (IadStatus, String)>>(f: F) -> IadStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IadStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            IadStatus::Panic
        }
    }
}

fn core_err(e: Error) -> (IadStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (IadStatus, String) {
    (IadStatus::NullPointer, format!("{what} is null"))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (IadStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (IadStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn out_slice<'a>(p: *mut f64, len: usize, need: usize) -> Result<&'a mut [f64], (IadStatus, String)> {
    if p.is_null() {
        return Err(null("output buffer"));
    }
    if len != need {
        return Err((
            IadStatus::DimensionMismatch,
            format!("output buffer holds {len} values, need {need}"),
        ));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn chain_ref<'a>(p: *const IadChain) -> Result<&'a IadChain, (IadStatus, String)> {
    p.as_ref().ok_or_else(|| null("chain"))
}

unsafe fn partition_ref<'a>(p: *const IadPartition) -> Result<&'a IadPartition, (IadStatus, String)> {
    p.as_ref().ok_or_else(|| null("partition"))
}

fn box_out<T>(out: *mut *mut T, value: T) -> Result<(), (IadStatus, String)> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    // SAFETY: checked non-null; the caller provides a writable slot.
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

/// Message for the most recent failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn iad_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn iad_status_str(status: IadStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        IadStatus::Ok => b"ok\0",
        IadStatus::NullPointer => b"null pointer\0",
        IadStatus::InvalidArgument => b"invalid argument\0",
        IadStatus::DimensionMismatch => b"dimension mismatch\0",
        IadStatus::NotStochastic => b"not stochastic\0",
        IadStatus::Reducible => b"reducible\0",
        IadStatus::Singular => b"singular\0",
        IadStatus::NotConverged => b"not converged\0",
        IadStatus::Numerical => b"numerical failure\0",
        IadStatus::Io => b"i/o error\0",
        IadStatus::Panic => b"internal panic\0",
    };
    s.as_ptr().cast()
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn iad_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a chain from an `n x n` row-major array. With `row_stochastic` the
/// rows sum to one and the matrix is transposed; otherwise the columns do.
///
/// # Safety
/// `data` must point to `n * n` doubles and `out` to a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn iad_chain_new(
    data: *const f64,
    n: usize,
    row_stochastic: bool,
    out: *mut *mut IadChain,
) -> IadStatus {
    guard(|| {
        if data.is_null() {
            return Err(null("data"));
        }
        let len = n.checked_mul(n).ok_or_else(|| (IadStatus::InvalidArgument, "n too large".to_string()))?;
        let values = slice::from_raw_parts(data, len).to_vec();
        let m = DenseMatrix::from_row_major(n, n, values).map_err(core_err)?;
        let inner = if row_stochastic {
            StochasticMatrix::from_row_stochastic(&m)
        } else {
            StochasticMatrix::new(m)
        }
        .map_err(core_err)?;
        box_out(out, IadChain { inner, exact: None })
    })
}

/// Builds a published example chain by name (`1d` or `2d`).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn iad_chain_from_model(name: *const c_char, out: *mut *mut IadChain) -> IadStatus {
    guard(|| {
        let name = c_str(name, "name")?;
        let model = ModelConfig::named(name).and_then(|c| c.build()).map_err(core_err)?;
        box_out(out, IadChain { inner: model.chain, exact: model.exact_steady_state })
    })
}

/// Releases a chain. Null is ignored.
///
/// # Safety
/// `chain` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn iad_chain_free(chain: *mut IadChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// Number of states, or 0 for a null handle.
///
/// # Safety
/// `chain` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn iad_chain_dim(chain: *const IadChain) -> usize {
    chain.as_ref().map_or(0, |c| c.inner.dim())
}

/// Builds a partition from coarse labels `0..n-1`, one per fine state.
///
/// # Safety
/// `assignment` must point to `len` values and `out` to a writable slot.
#[no_mangle]
pub unsafe extern "C" fn iad_partition_new(
    assignment: *const usize,
    len: usize,
    out: *mut *mut IadPartition,
) -> IadStatus {
    guard(|| {
        if assignment.is_null() {
            return Err(null("assignment"));
        }
        let labels = slice::from_raw_parts(assignment, len).to_vec();
        let inner = Partition::new(labels).map_err(core_err)?;
        box_out(out, IadPartition { inner })
    })
}

/// Builds a named partition family (`split1d:57`, `uniform1d:4,0`,
/// `stripes2d:3`, `grid2d:6`, `singletons`, `single`) on `len` states.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` a writable slot.
#[no_mangle]
pub unsafe extern "C" fn iad_partition_from_spec(
    spec: *const c_char,
    len: usize,
    out: *mut *mut IadPartition,
) -> IadStatus {
    guard(|| {
        let spec = c_str(spec, "spec")?;
        let kind: PartitionKind = spec.parse().map_err(core_err)?;
        let inner = partition_family(kind, len, GridSpacing::default()).map_err(core_err)?;
        box_out(out, IadPartition { inner })
    })
}

/// Releases a partition. Null is ignored.
///
/// # Safety
/// `part` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn iad_partition_free(part: *mut IadPartition) {
    if !part.is_null() {
        drop(Box::from_raw(part));
    }
}

/// Number of coarse states, or 0 for a null handle.
///
/// # Safety
/// `part` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn iad_partition_coarse_count(part: *const IadPartition) -> usize {
    part.as_ref().map_or(0, |p| p.inner.coarse_count())
}

/// Steady state of an irreducible chain written to `out[0..len]`, where
/// `len` must equal the chain dimension.
///
/// # Safety
/// `chain` must be live and `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn iad_steady_state(chain: *const IadChain, tol: f64, out: *mut f64, len: usize) -> IadStatus {
    guard(|| {
        let chain = chain_ref(chain)?;
        let dst = out_slice(out, len, chain.inner.dim())?;
        let mu = steady_state(&chain.inner, tol, DEFAULT_KPOW).map_err(core_err)?;
        dst.copy_from_slice(mu.as_slice());
        Ok(())
    })
}

/// Runs IAD. `mu0` may be null for a uniform start. On success the steady
/// state is written to `out` and the number of outer steps to `iterations`
/// (which may be null). On non-convergence the last iterate is written and
/// `IAD_STATUS_NOT_CONVERGED` returned.
///
/// # Safety
/// Handles must be live; `mu0` (if non-null) and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn iad_solve(
    chain: *const IadChain,
    part: *const IadPartition,
    mu0: *const f64,
    len: usize,
    options: IadSolveOptions,
    out: *mut f64,
    iterations: *mut usize,
) -> IadStatus {
    guard(|| {
        let chain = chain_ref(chain)?;
        let part = partition_ref(part)?;
        let dst = out_slice(out, len, chain.inner.dim())?;
        let start = if mu0.is_null() {
            ProbabilityVector::uniform(len)
        } else {
            ProbabilityVector::new(slice::from_raw_parts(mu0, len).to_vec()).map_err(core_err)?
        };
        let mut cfg = IadConfig::default();
        if options.tau > 0.0 {
            cfg.tau = options.tau;
        }
        if options.max_outer > 0 {
            cfg.max_outer = options.max_outer;
        }
        let (result, steps) = match iad_solve_inner(chain, part, &start, &cfg) {
            Ok((mu, steps)) => (Ok(()), (mu, steps)),
            Err((e, Some(partial))) => (Err(e), partial),
            Err((e, None)) => return Err(e),
        };
        dst.copy_from_slice(steps.0.as_slice());
        if let Some(it) = iterations.as_mut() {
            *it = steps.1;
        }
        result
    })
}

type Partial = (ProbabilityVector, usize);

fn iad_solve_inner(
    chain: &IadChain,
    part: &IadPartition,
    start: &ProbabilityVector,
    cfg: &IadConfig,
) -> Result<Partial, ((IadStatus, String), Option<Partial>)> {
    match run_iad(&chain.inner, &part.inner, start, cfg) {
        Ok((mu, trace)) => Ok((mu, trace.steps())),
        Err(Error::NotConverged { iterations, trace }) => {
            let msg = format!("no convergence after {iterations} iterations");
            let last = trace.iterates.last().cloned().unwrap_or_else(|| start.clone());
            Err(((IadStatus::NotConverged, msg), Some((last, trace.steps()))))
        }
        Err(e) => Err((core_err(e), None)),
    }
}

/// Rate diagnostics for `part` with the angle bound at index `k`.
///
/// # Safety
/// Handles must be live and `out` must point to a writable report.
#[no_mangle]
pub unsafe extern "C" fn iad_rate_report(
    chain: *const IadChain,
    part: *const IadPartition,
    k: usize,
    out: *mut IadRateReport,
) -> IadStatus {
    guard(|| {
        let chain = chain_ref(chain)?;
        let part = partition_ref(part)?;
        let out = out.as_mut().ok_or_else(|| null("report"))?;
        let mu = chain.reference_steady_state().map_err(core_err)?;
        let r = full_report_with(&chain.inner, &mu, &part.inner, &[k]).map_err(core_err)?;
        let ab = r.angle_bounds[&k];
        *out = IadRateReport {
            rho_j: r.rho_j,
            rho_exact_formula: r.rho_exact_formula,
            norm_bound: r.norm_bound,
            k,
            sin2_theta: ab.sin2_theta,
            angle_bound: ab.bound,
            sqrt_lambda2: r.sqrt_lambda2,
            rho_hat_p: r.rho_hat_p,
            reversible: r.reversible,
        };
        Ok(())
    })
}
