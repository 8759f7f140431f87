//! C ABI over `ionmzi`.
//!
//! Every fallible entry point returns an [`IonmziStatus`] and writes its
//! result through an out pointer. Ion states live behind the opaque
//! [`IonmziIonPair`] handle. Strings returned by the library are released
//! with [`ionmzi_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ionmzi::cli::report::{build_report, render};
use ionmzi::cli::{ConfigFile, RunConfig};
use ionmzi::efficiency::{self, CavityModel, EfficiencyParams};
use ionmzi::protocol::{self, Entry, IonPairState};
use ionmzi::qcore::{ion_fidelity, PhotonMode, Polarization};
use ionmzi::recycler::{self, RecycleConfig};
use ionmzi::Error;
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IonmziStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotNormalized = 3,
    NumericFailure = 4,
    InvalidConfig = 5,
    Panic = 6,
}

/// Opaque two-ion state.
pub struct IonmziIonPair {
    inner: IonPairState,
}

/// Branch probabilities of one open pass.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct IonmziPassResult {
    pub p_scatter_u: f64,
    pub p_scatter_l: f64,
    pub p_detect_upper: f64,
    pub p_detect_lower: f64,
    pub p_recycle: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct IonmziIteration {
    pub p_entangled: f64,
    pub p_scattered: f64,
    pub p_stuck: f64,
    pub p_truncated: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct IonmziMonteCarlo {
    pub trials: u64,
    pub entangled: u64,
    pub scattered: u64,
    pub stuck: u64,
    pub truncated: u64,
    pub p_entangled: f64,
    pub se_entangled: f64,
}

/// Single pass and iterated yield of the mixed input. Fidelities are NaN
/// when the conditioning detector never fires.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct IonmziMixed {
    pub p_scatter: f64,
    pub p_detect_upper: f64,
    pub p_detect_lower: f64,
    pub fidelity_upper_psi_plus: f64,
    pub fidelity_lower_psi_minus: f64,
    pub p_entangled_iterated: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct IonmziThroughput {
    pub p_total: f64,
    pub pairs_per_second: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> IonmziStatus {
    match e {
        Error::NotNormalized { .. } => IonmziStatus::NotNormalized,
        Error::OutOfRange { .. }
        | Error::NonPositive(_)
        | Error::BadWeights(_)
        | Error::InvalidEntry => IonmziStatus::InvalidArgument,
        _ => IonmziStatus::NumericFailure,
    }
}

/// Runs `f`, mapping errors and panics to status codes.
fn guard<F>(f: F) -> IonmziStatus
where
    F: FnOnce() -> Result<(), (IonmziStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IonmziStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".to_owned());
            IonmziStatus::Panic
        }
    }
}

fn lib<T>(r: ionmzi::Result<T>) -> Result<T, (IonmziStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null() -> (IonmziStatus, String) {
    (
        IonmziStatus::NullPointer,
        "null pointer argument".to_owned(),
    )
}

unsafe fn pair<'a>(p: *const IonmziIonPair) -> Result<&'a IonPairState, (IonmziStatus, String)> {
    p.as_ref().map(|h| &h.inner).ok_or_else(null)
}

unsafe fn write<T>(out: *mut T, v: T) -> Result<(), (IonmziStatus, String)> {
    if out.is_null() {
        return Err(null());
    }
    out.write(v);
    Ok(())
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn boxed(inner: IonPairState) -> *mut IonmziIonPair {
    Box::into_raw(Box::new(IonmziIonPair { inner }))
}

/// Product state `(alpha|m+> + beta|m->)_U (a|m+> + b|m->)_L`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ionmzi_ion_pair_new_product(
    alpha_re: f64,
    alpha_im: f64,
    beta_re: f64,
    beta_im: f64,
    a_re: f64,
    a_im: f64,
    b_re: f64,
    b_im: f64,
    out: *mut *mut IonmziIonPair,
) -> IonmziStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let s = lib(IonPairState::product(
            c(alpha_re, alpha_im),
            c(beta_re, beta_im),
            c(a_re, a_im),
            c(b_re, b_im),
        ))?;
        write(out, boxed(s))
    })
}

/// General normalized state from its four amplitudes.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ionmzi_ion_pair_new(
    c_mp_re: f64,
    c_mp_im: f64,
    c_pm_re: f64,
    c_pm_im: f64,
    c_mm_re: f64,
    c_mm_im: f64,
    c_pp_re: f64,
    c_pp_im: f64,
    out: *mut *mut IonmziIonPair,
) -> IonmziStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let s = lib(IonPairState::new(
            c(c_mp_re, c_mp_im),
            c(c_pm_re, c_pm_im),
            c(c_mm_re, c_mm_im),
            c(c_pp_re, c_pp_im),
        ))?;
        write(out, boxed(s))
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `p` must come from an `ionmzi_ion_pair_new*` call and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ionmzi_ion_pair_free(p: *mut IonmziIonPair) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// One sigma+ pass through the open interferometer, entering next to M1.
///
/// # Safety
/// `p` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ionmzi_single_pass(
    p: *const IonmziIonPair,
    out: *mut IonmziPassResult,
) -> IonmziStatus {
    guard(|| {
        let r = lib(protocol::single_pass(
            pair(p)?,
            Polarization::SigmaPlus,
            Entry::M1_SIDE,
        ))?;
        write(
            out,
            IonmziPassResult {
                p_scatter_u: r.p_scatter_u,
                p_scatter_l: r.p_scatter_l,
                p_detect_upper: r.p_detect_upper,
                p_detect_lower: r.p_detect_lower,
                p_recycle: r.p_recycle,
            },
        )
    })
}

fn iteration(r: &recycler::IterationResult) -> IonmziIteration {
    IonmziIteration {
        p_entangled: r.p_entangled,
        p_scattered: r.p_scattered,
        p_stuck: r.p_stuck,
        p_truncated: r.p_truncated,
    }
}

/// Closed-form totals over unlimited passes.
///
/// # Safety
/// `p` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ionmzi_iterate_analytic(
    p: *const IonmziIonPair,
    out: *mut IonmziIteration,
) -> IonmziStatus {
    guard(|| {
        let r = lib(recycler::iterate_analytic(pair(p)?))?;
        write(out, iteration(&r))
    })
}

/// Pass-by-pass totals with at most `max_passes` passes.
///
/// # Safety
/// `p` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ionmzi_iterate_numeric(
    p: *const IonmziIonPair,
    max_passes: u32,
    out: *mut IonmziIteration,
) -> IonmziStatus {
    guard(|| {
        let r = lib(recycler::iterate_numeric(
            pair(p)?,
            &RecycleConfig::with_max_passes(max_passes),
        ))?;
        write(out, iteration(&r))
    })
}

/// Sampled photon histories; deterministic for a given seed.
///
/// # Safety
/// `p` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ionmzi_monte_carlo(
    p: *const IonmziIonPair,
    trials: u64,
    seed: u64,
    max_passes: u32,
    out: *mut IonmziMonteCarlo,
) -> IonmziStatus {
    guard(|| {
        let r = lib(recycler::monte_carlo(
            pair(p)?,
            trials,
            seed,
            &RecycleConfig::with_max_passes(max_passes),
        ))?;
        write(
            out,
            IonmziMonteCarlo {
                trials: r.trials,
                entangled: r.counts.entangled,
                scattered: r.counts.scattered,
                stuck: r.counts.stuck,
                truncated: r.counts.truncated,
                p_entangled: r.estimate.p_entangled,
                se_entangled: r.std_errors.p_entangled,
            },
        )
    })
}

/// `F |psi+><psi+| + (1-F) |phi+><phi+|` input.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ionmzi_mixed(fidelity: f64, out: *mut IonmziMixed) -> IonmziStatus {
    guard(|| {
        let m = lib(protocol::run_mixed(fidelity))?;
        let fid = |s: &Option<ionmzi::MixedState>,
                   t: IonPairState|
         -> Result<f64, (IonmziStatus, String)> {
            match s {
                Some(s) => lib(ion_fidelity(s, &t.to_pure(PhotonMode::Vacuum))),
                None => Ok(f64::NAN),
            }
        };
        let it = lib(recycler::pool(
            &lib(protocol::rho_ul(fidelity))?,
            recycler::iterate_analytic,
        ))?;
        write(
            out,
            IonmziMixed {
                p_scatter: m.p_scatter,
                p_detect_upper: m.p_detect_upper,
                p_detect_lower: m.p_detect_lower,
                fidelity_upper_psi_plus: fid(&m.post_detect_upper, IonPairState::psi_plus())?,
                fidelity_lower_psi_minus: fid(&m.post_detect_lower, IonPairState::psi_minus())?,
                p_entangled_iterated: it.p_entangled,
            },
        )
    })
}

/// `4 pi c / (finesse * length)` in 1/s.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ionmzi_cavity_decay_rate(
    finesse: f64,
    length: f64,
    out: *mut f64,
) -> IonmziStatus {
    guard(|| write(out, lib(efficiency::cavity_decay_rate(finesse, length))?))
}

/// Cavity emission probability from decay rate, coupling and loss rate.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ionmzi_p_cav(
    gamma: f64,
    omega: f64,
    loss_rate: f64,
    out: *mut f64,
) -> IonmziStatus {
    guard(|| write(out, lib(efficiency::p_cav(gamma, omega, loss_rate))?))
}

/// Pair rate at a given cavity operating point.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ionmzi_throughput(
    p_protocol: f64,
    p_cav: f64,
    eta: f64,
    xi: f64,
    photon_rate: f64,
    out: *mut IonmziThroughput,
) -> IonmziStatus {
    guard(|| {
        let params = EfficiencyParams {
            cavity: CavityModel::OperatingPoint { p_cav },
            eta,
            xi,
            photon_rate,
        };
        let r = lib(efficiency::throughput(p_protocol, &params))?;
        write(
            out,
            IonmziThroughput {
                p_total: r.p_total,
                pairs_per_second: r.pairs_per_second,
            },
        )
    })
}

/// Runs a JSON config (same keys as the command-line tool) and returns the
/// rendered report. Release it with [`ionmzi_string_free`].
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ionmzi_run_json(
    config_json: *const c_char,
    out: *mut *mut c_char,
) -> IonmziStatus {
    guard(|| {
        if config_json.is_null() || out.is_null() {
            return Err(null());
        }
        let text = CStr::from_ptr(config_json)
            .to_str()
            .map_err(|e| (IonmziStatus::InvalidConfig, e.to_string()))?;
        let cfg = ConfigFile::from_json(text)
            .and_then(|f| RunConfig::from_file(&f))
            .map_err(|e| (IonmziStatus::InvalidConfig, e.to_string()))?;
        let report = lib(build_report(&cfg))?;
        let s = CString::new(render(&cfg, &report))
            .map_err(|e| (IonmziStatus::NumericFailure, e.to_string()))?;
        write(out, s.into_raw())
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ionmzi_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn ionmzi_status_message(status: IonmziStatus) -> *const c_char {
    let s: &'static CStr = match status {
        IonmziStatus::Ok => c"ok",
        IonmziStatus::NullPointer => c"null pointer argument",
        IonmziStatus::InvalidArgument => c"argument out of range",
        IonmziStatus::NotNormalized => c"state not normalized",
        IonmziStatus::NumericFailure => c"numeric failure",
        IonmziStatus::InvalidConfig => c"invalid configuration",
        IonmziStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

/// Message for the last failure on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ionmzi_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}
