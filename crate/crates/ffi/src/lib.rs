//! C ABI for privtrack.
//!
//! Every entry point returns a [`PtStatus`]; on anything but `PT_STATUS_OK`
//! the message is available from [`pt_last_error`] on the same thread.
//! Learners are opaque handles created by [`pt_learner_new`] and released by
//! [`pt_learner_free`]. Strings handed out by this library are freed with
//! [`pt_string_free`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use libc::c_char;

use privtrack::experts::{dynamic_comparator, LossMatrix, LossVector};
use privtrack::harness::{build_learner, run_batch, AdversaryConfig, LearnerId, RunConfig};
use privtrack::learners::{kl_project_clipped, meta_expert_count, Learner, ProbeMode};
use privtrack::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    State = 3,
    ResourceCap = 4,
    Config = 5,
    Io = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PtLearnerKind {
    LazyRnm = 0,
    SvtRestart = 1,
    NoisyMwa = 2,
    Mwa = 3,
    MetaReduction = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PtProbe {
    Exact = 0,
    Geometric = 1,
}

/// Learner parameters. `beta <= 0` selects `1 / T`; a NaN `eta` selects the
/// learner's default step size.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PtLearnerParams {
    pub kind: PtLearnerKind,
    pub experts: usize,
    pub horizon: usize,
    pub switches: usize,
    pub epsilon: f64,
    pub beta: f64,
    pub eta: f64,
    pub probe: PtProbe,
    pub meta_cap: u64,
}

/// Opaque learner handle.
pub struct PtLearner {
    inner: Box<dyn Learner>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> PtStatus {
    match e {
        Error::InvalidArgument(_) => PtStatus::InvalidArgument,
        Error::State(_) => PtStatus::State,
        Error::ResourceCap { .. } => PtStatus::ResourceCap,
        Error::Config(_) => PtStatus::Config,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => PtStatus::Io,
    }
}

fn guard(f: impl FnOnce() -> Result<(), PtStatus>) -> PtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PtStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("panic inside privtrack".into());
            PtStatus::Panic
        }
    }
}

fn fail(e: Error) -> PtStatus {
    let status = status_of(&e);
    set_error(e.to_string());
    status
}

fn null(what: &str) -> PtStatus {
    set_error(format!("{what} is null"));
    PtStatus::NullPointer
}

/// Copies `len` values; a null pointer is only allowed for `len == 0`.
unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], PtStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn string_arg(p: *const c_char, what: &str) -> Result<String, PtStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(str::to_owned)
        .map_err(|e| fail(Error::InvalidArgument(format!("{what}: {e}"))))
}

fn out_string(s: String, out: *mut *mut c_char) -> Result<(), PtStatus> {
    let s = CString::new(s).map_err(|e| fail(Error::InvalidArgument(e.to_string())))?;
    unsafe { *out = s.into_raw() };
    Ok(())
}

/// Message of the last failed call on this thread, or null. Free with
/// [`pt_string_free`].
#[no_mangle]
pub extern "C" fn pt_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| {
        e.borrow()
            .as_ref()
            .map_or(ptr::null_mut(), |s| s.clone().into_raw())
    })
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn pt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

fn learner_config(p: &PtLearnerParams) -> RunConfig {
    let id = match p.kind {
        PtLearnerKind::LazyRnm => LearnerId::LazyRnm,
        PtLearnerKind::SvtRestart => LearnerId::SvtRestart,
        PtLearnerKind::NoisyMwa => LearnerId::NoisyMwa,
        PtLearnerKind::Mwa => LearnerId::Mwa,
        PtLearnerKind::MetaReduction => LearnerId::MetaReduction,
    };
    // The adversary is never built; any valid table will do.
    let adversary = AdversaryConfig::Rotation {
        gap: 0.0,
        low: Some(0.0),
        phases: Some(1),
    };
    let mut c = RunConfig::new(p.horizon, p.experts, p.switches, id, adversary);
    c.epsilon = p.epsilon;
    c.beta = (p.beta > 0.0).then_some(p.beta);
    c.eta = (!p.eta.is_nan()).then_some(p.eta);
    c.probe = match p.probe {
        PtProbe::Exact => ProbeMode::Exact,
        PtProbe::Geometric => ProbeMode::Geometric,
    };
    if p.meta_cap > 0 {
        c.meta_cap = p.meta_cap;
    }
    c
}

/// Creates a learner. All randomness derives from `seed`.
///
/// # Safety
/// `params` must point to a valid struct and `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn pt_learner_new(
    params: *const PtLearnerParams,
    seed: u64,
    out: *mut *mut PtLearner,
) -> PtStatus {
    guard(|| {
        if params.is_null() {
            return Err(null("params"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let config = learner_config(&*params);
        let inner = build_learner(&config, seed).map_err(fail)?;
        *out = Box::into_raw(Box::new(PtLearner { inner }));
        Ok(())
    })
}

/// # Safety
/// `learner` must come from [`pt_learner_new`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pt_learner_free(learner: *mut PtLearner) {
    if !learner.is_null() {
        drop(Box::from_raw(learner));
    }
}

/// Expert to play this round.
///
/// # Safety
/// `learner` must be a live handle and `expert` writable.
#[no_mangle]
pub unsafe extern "C" fn pt_learner_select(
    learner: *mut PtLearner,
    expert: *mut usize,
) -> PtStatus {
    guard(|| {
        let l = learner.as_mut().ok_or_else(|| null("learner"))?;
        if expert.is_null() {
            return Err(null("expert"));
        }
        *expert = l.inner.select().map_err(fail)?;
        Ok(())
    })
}

/// Feeds the loss vector of the round just played. `restarted` may be null.
///
/// # Safety
/// `learner` must be a live handle and `losses` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn pt_learner_observe(
    learner: *mut PtLearner,
    losses: *const f64,
    len: usize,
    restarted: *mut bool,
) -> PtStatus {
    guard(|| {
        let l = learner.as_mut().ok_or_else(|| null("learner"))?;
        let values = slice(losses, len, "losses")?.to_vec();
        let loss = LossVector::new(values).map_err(fail)?;
        let obs = l.inner.observe(&loss).map_err(fail)?;
        if !restarted.is_null() {
            *restarted = obs.restarted;
        }
        Ok(())
    })
}

/// Number of completed rounds, or 0 for a null handle.
///
/// # Safety
/// `learner` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pt_learner_rounds(learner: *const PtLearner) -> usize {
    learner.as_ref().map_or(0, |l| l.inner.rounds())
}

/// The privacy ledger as a JSON array of `{round, mechanism, epsilon}`.
///
/// # Safety
/// `learner` must be a live handle and `json` writable.
#[no_mangle]
pub unsafe extern "C" fn pt_learner_ledger_json(
    learner: *const PtLearner,
    json: *mut *mut c_char,
) -> PtStatus {
    guard(|| {
        let l = learner.as_ref().ok_or_else(|| null("learner"))?;
        if json.is_null() {
            return Err(null("json"));
        }
        out_string(l.inner.ledger().to_json().map_err(fail)?, json)
    })
}

/// Exact best loss over expert sequences with at most `switches` switches.
/// `losses` is row-major `rounds x experts`; `path` (optional) receives the
/// `rounds` expert indices of a minimiser.
///
/// # Safety
/// `losses` must hold `rounds * experts` values, `value` must be writable and
/// `path`, when not null, must hold `rounds` slots.
#[no_mangle]
pub unsafe extern "C" fn pt_dynamic_comparator(
    losses: *const f64,
    rounds: usize,
    experts: usize,
    switches: usize,
    value: *mut f64,
    path: *mut usize,
) -> PtStatus {
    guard(|| {
        if value.is_null() {
            return Err(null("value"));
        }
        let cells = rounds
            .checked_mul(experts)
            .ok_or_else(|| fail(Error::InvalidArgument("matrix size overflows".into())))?;
        let flat = slice(losses, cells, "losses")?;
        let rows = flat
            .chunks(experts.max(1))
            .map(|r| r.to_vec())
            .collect::<Vec<_>>();
        let m = LossMatrix::from_vecs(rows).map_err(fail)?;
        let (best, p) = dynamic_comparator(&m, switches as i64).map_err(fail)?;
        *value = best;
        if !path.is_null() {
            ptr::copy_nonoverlapping(p.experts().as_ptr(), path, rounds);
        }
        Ok(())
    })
}

/// KL projection of the positive vector `v` onto `{w : sum w = 1, w >= floor}`.
///
/// # Safety
/// `v` and `out` must each hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn pt_kl_project(
    v: *const f64,
    len: usize,
    floor: f64,
    out: *mut f64,
) -> PtStatus {
    guard(|| {
        let v = slice(v, len, "v")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let w = kl_project_clipped(v, floor).map_err(fail)?;
        ptr::copy_nonoverlapping(w.weights().as_ptr(), out, len);
        Ok(())
    })
}

/// Number of meta-experts with at most `switches` switch times, saturating
/// at `u64::MAX`.
#[no_mangle]
pub extern "C" fn pt_meta_expert_count(horizon: usize, experts: usize, switches: usize) -> u64 {
    meta_expert_count(horizon, experts, switches).min(u64::MAX as u128) as u64
}

/// Runs the batch described by a TOML config file and returns the aggregate
/// report as JSON.
///
/// # Safety
/// `config_path` must be a NUL-terminated string and `report_json` writable.
#[no_mangle]
pub unsafe extern "C" fn pt_run_config(
    config_path: *const c_char,
    report_json: *mut *mut c_char,
) -> PtStatus {
    guard(|| {
        let path = string_arg(config_path, "config_path")?;
        if report_json.is_null() {
            return Err(null("report_json"));
        }
        let config = RunConfig::load(path.as_ref()).map_err(fail)?;
        let report = run_batch(&config).map_err(fail)?;
        out_string(
            serde_json::to_string(&report).map_err(|e| fail(e.into()))?,
            report_json,
        )
    })
}
