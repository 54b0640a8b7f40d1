//! C ABI for the scenegen toolchain.
//!
//! Every function returns an [`SgStatus`]; results come back through out
//! pointers. Lexicons and datasets are opaque handles owned by the caller
//! and released with their `_free` function. Strings returned by the
//! library are released with [`sg_string_free`]. On failure,
//! [`sg_last_error`] describes the most recent error on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use scenegen::dataset::{self, DatasetError, TrajectoryDataset};
use scenegen::filter::{check_relevance, filter_description, Relevance, ScenarioDescription};
use scenegen::llm::RawResponse;
use scenegen::metrics::{constant_velocity_predict, evaluate, ClassWeights};
use scenegen::schema::{parse_config, ActorClass};
use scenegen::validator::validate_pipeline;
use scenegen::{sim, Lexicon};

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// The description is off-topic or denylisted.
    Rejected = 3,
    Parse = 4,
    Validation = 5,
    Simulation = 6,
    Dataset = 7,
    Io = 8,
    Metrics = 9,
    /// A Rust panic was caught at the boundary.
    Internal = 10,
}

/// Opaque lexicon handle.
pub struct SgLexicon(Lexicon);

/// Opaque trajectory dataset handle.
pub struct SgDataset(TrajectoryDataset);

/// Per-class prediction errors indexed vehicle, pedestrian, bicycle; NaN
/// marks a class with no samples.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SgMetrics {
    pub ade: [f64; 3],
    pub fde: [f64; 3],
    pub tae: f64,
    pub tfe: f64,
    pub pairs: usize,
}

/// Dataset counts; arrays are indexed vehicle, pedestrian, bicycle.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SgStats {
    pub total_frames: usize,
    pub agents: [usize; 3],
    pub records: [usize; 3],
    pub avg_per_frame: [f64; 3],
    pub frames_per_minute: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Fail(SgStatus, String);

impl From<DatasetError> for Fail {
    fn from(e: DatasetError) -> Self {
        let status = if matches!(e, DatasetError::Io(_)) { SgStatus::Io } else { SgStatus::Dataset };
        Fail(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SgStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("panic inside scenegen");
            SgStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(SgStatus::NullArgument, "null string argument".into()));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Fail(SgStatus::InvalidUtf8, e.to_string()))
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail(SgStatus::NullArgument, "null handle".into()))
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(SgStatus::NullArgument, "null out pointer".into()));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_box<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(SgStatus::NullArgument, "null out pointer".into()));
    }
    out.write(Box::into_raw(Box::new(value)));
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(SgStatus::NullArgument, "null out pointer".into()));
    }
    let c = CString::new(s).map_err(|e| Fail(SgStatus::Internal, e.to_string()))?;
    out.write(c.into_raw());
    Ok(())
}

/// Message for the last failed call on this thread, empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn sg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn sg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sg_lexicon_default(out: *mut *mut SgLexicon) -> SgStatus {
    guard(|| put_box(out, SgLexicon(Lexicon::default_lexicon())))
}

/// Loads a lexicon file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sg_lexicon_load(path: *const c_char, out: *mut *mut SgLexicon) -> SgStatus {
    guard(|| {
        let lex = Lexicon::load(text(path)?).map_err(|e| {
            let status = match e {
                scenegen::lexicon::LexiconError::Io(_) | scenegen::lexicon::LexiconError::NotFound(_) => SgStatus::Io,
                _ => SgStatus::Parse,
            };
            Fail(status, e.to_string())
        })?;
        put_box(out, SgLexicon(lex))
    })
}

/// # Safety
/// `lex` must be null or a handle from `sg_lexicon_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sg_lexicon_free(lex: *mut SgLexicon) {
    if !lex.is_null() {
        drop(Box::from_raw(lex));
    }
}

/// Relevance check plus description rewriting. Returns `Rejected` for
/// off-topic text, leaving `out` untouched.
///
/// # Safety
/// Pointers must be valid; `description` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn sg_filter(
    lex: *const SgLexicon,
    description: *const c_char,
    out: *mut *mut c_char,
) -> SgStatus {
    guard(|| {
        let lex = &handle(lex)?.0;
        let desc = ScenarioDescription::new(text(description)?);
        if let Relevance::Reject(reason) = check_relevance(&desc, lex) {
            return Err(Fail(SgStatus::Rejected, reason.to_string()));
        }
        put_string(out, filter_description(&desc, lex).text)
    })
}

/// Extracts and repairs the configuration in a model response; `out`
/// receives the canonical configuration text.
///
/// # Safety
/// Pointers must be valid; `response` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn sg_validate(
    lex: *const SgLexicon,
    response: *const c_char,
    out: *mut *mut c_char,
) -> SgStatus {
    guard(|| {
        let lex = &handle(lex)?.0;
        let (_, report) = validate_pipeline(&RawResponse::from_text(text(response)?), lex)
            .map_err(|e| Fail(SgStatus::Validation, e.to_string()))?;
        put_string(out, report.final_text)
    })
}

/// Simulates a configuration and collects its trajectories.
///
/// # Safety
/// `config` must be NUL-terminated; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sg_simulate(config: *const c_char, out: *mut *mut SgDataset) -> SgStatus {
    guard(|| {
        let cfg = parse_config(text(config)?).map_err(|e| Fail(SgStatus::Parse, e.to_string()))?;
        let trace = sim::run(&cfg).map_err(|e| Fail(SgStatus::Simulation, e.to_string()))?;
        let ds = dataset::collect(&trace, &cfg.tags);
        put_box(out, SgDataset(ds))
    })
}

/// # Safety
/// `path` must be NUL-terminated; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sg_dataset_read(path: *const c_char, out: *mut *mut SgDataset) -> SgStatus {
    guard(|| {
        let ds = dataset::read(text(path)?)?;
        put_box(out, SgDataset(ds))
    })
}

/// Parses `.traj` text held in memory.
///
/// # Safety
/// `traj` must be NUL-terminated; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sg_dataset_parse(traj: *const c_char, out: *mut *mut SgDataset) -> SgStatus {
    guard(|| {
        let ds = dataset::parse(text(traj)?)?;
        put_box(out, SgDataset(ds))
    })
}

/// # Safety
/// `ds` must be a live handle; `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn sg_dataset_write(ds: *const SgDataset, path: *const c_char) -> SgStatus {
    guard(|| Ok(dataset::write(&handle(ds)?.0, text(path)?)?))
}

/// Serializes to `.traj` text.
///
/// # Safety
/// `ds` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sg_dataset_to_string(ds: *const SgDataset, out: *mut *mut c_char) -> SgStatus {
    guard(|| put_string(out, dataset::to_string(&handle(ds)?.0)))
}

/// Record count; 0 for a null handle.
///
/// # Safety
/// `ds` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sg_dataset_len(ds: *const SgDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.len())
}

/// Appends `b` to `a` with shifted ids and frames into a new handle.
///
/// # Safety
/// `a` and `b` must be live handles; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sg_dataset_merge(
    a: *const SgDataset,
    b: *const SgDataset,
    out: *mut *mut SgDataset,
) -> SgStatus {
    guard(|| {
        let merged = dataset::merge(&handle(a)?.0, &handle(b)?.0);
        put_box(out, SgDataset(merged))
    })
}

/// Agent-level split; both outputs are new handles.
///
/// # Safety
/// `ds` must be a live handle; out pointers valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sg_dataset_split(
    ds: *const SgDataset,
    train_fraction: f64,
    seed: u64,
    train: *mut *mut SgDataset,
    test: *mut *mut SgDataset,
) -> SgStatus {
    guard(|| {
        if train.is_null() || test.is_null() {
            return Err(Fail(SgStatus::NullArgument, "null out pointer".into()));
        }
        let (a, b) = dataset::split(&handle(ds)?.0, train_fraction, seed)?;
        put_box(train, SgDataset(a))?;
        put_box(test, SgDataset(b))
    })
}

/// # Safety
/// `ds` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sg_dataset_stats(ds: *const SgDataset, wall_duration_s: f64, out: *mut SgStats) -> SgStatus {
    guard(|| {
        let report = dataset::stats(&handle(ds)?.0, wall_duration_s);
        let mut s = SgStats {
            total_frames: report.total_frames,
            frames_per_minute: report.frames_per_minute,
            ..Default::default()
        };
        for (i, class) in ActorClass::ALL.iter().enumerate() {
            let c = report.class(*class);
            s.agents[i] = c.agents;
            s.records[i] = c.records;
            s.avg_per_frame[i] = c.avg_per_frame;
        }
        put(out, s)
    })
}

/// Constant-velocity baseline scored with ADE/FDE. `weights` points to
/// three class weights (vehicle, pedestrian, bicycle) or is null for equal
/// weights.
///
/// # Safety
/// `ds` must be a live handle; `weights` null or 3 readable doubles; `out`
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sg_metrics(
    ds: *const SgDataset,
    observe_len: usize,
    predict_len: usize,
    weights: *const f64,
    out: *mut SgMetrics,
) -> SgStatus {
    guard(|| {
        let w = if weights.is_null() {
            ClassWeights::EQUAL
        } else {
            ClassWeights([*weights, *weights.add(1), *weights.add(2)])
        };
        let metric_err = |e: scenegen::metrics::MetricsError| Fail(SgStatus::Metrics, e.to_string());
        let task = constant_velocity_predict(&handle(ds)?.0, observe_len, predict_len).map_err(metric_err)?;
        let r = evaluate(&task, w).map_err(metric_err)?;
        let nan = |v: Option<f64>| v.unwrap_or(f64::NAN);
        put(
            out,
            SgMetrics {
                ade: [nan(r.ade_v), nan(r.ade_p), nan(r.ade_b)],
                fde: [nan(r.fde_v), nan(r.fde_p), nan(r.fde_b)],
                tae: r.tae,
                tfe: r.tfe,
                pairs: r.pairs,
            },
        )
    })
}

/// # Safety
/// `ds` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sg_dataset_free(ds: *mut SgDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}
