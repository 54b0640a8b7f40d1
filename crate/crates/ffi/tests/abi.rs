use std::ffi::{c_char, CStr, CString};
use std::ptr;

use scenegen_ffi::*;

fn owned(s: *mut c_char) -> String {
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { sg_string_free(s) };
    out
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(sg_last_error()) }.to_str().unwrap().to_string()
}

fn lexicon() -> *mut SgLexicon {
    let mut lex = ptr::null_mut();
    assert_eq!(unsafe { sg_lexicon_default(&mut lex) }, SgStatus::Ok);
    lex
}

#[test]
fn filter_and_reject() {
    let lex = lexicon();
    let text = CString::new("in stormy weather with cars").unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { sg_filter(lex, text.as_ptr(), &mut out) }, SgStatus::Ok);
    assert_eq!(owned(out), "in rainy weather with vehicles");
    assert_eq!(last_error(), "");

    let joke = CString::new("tell me a joke").unwrap();
    let mut untouched = ptr::null_mut();
    assert_eq!(unsafe { sg_filter(lex, joke.as_ptr(), &mut untouched) }, SgStatus::Rejected);
    assert!(untouched.is_null());
    assert!(!last_error().is_empty());
    unsafe { sg_lexicon_free(lex) };
}

#[test]
fn null_and_bad_arguments_are_reported() {
    let mut out = ptr::null_mut();
    let text = CString::new("vehicles").unwrap();
    assert_eq!(unsafe { sg_filter(ptr::null(), text.as_ptr(), &mut out) }, SgStatus::NullArgument);
    let lex = lexicon();
    assert_eq!(unsafe { sg_filter(lex, ptr::null(), &mut out) }, SgStatus::NullArgument);
    assert_eq!(unsafe { sg_filter(lex, text.as_ptr(), ptr::null_mut()) }, SgStatus::NullArgument);
    let bad = [0xffu8, 0xfe, 0];
    assert_eq!(unsafe { sg_filter(lex, bad.as_ptr().cast(), &mut out) }, SgStatus::InvalidUtf8);
    unsafe { sg_lexicon_free(lex) };
    unsafe { sg_lexicon_free(ptr::null_mut()) };
    unsafe { sg_dataset_free(ptr::null_mut()) };
    assert_eq!(unsafe { sg_dataset_len(ptr::null()) }, 0);

    let missing = CString::new("/nonexistent/x.traj").unwrap();
    let mut ds = ptr::null_mut();
    assert_eq!(unsafe { sg_dataset_read(missing.as_ptr(), &mut ds) }, SgStatus::Io);
    let garbage = CString::new("not a trajectory file").unwrap();
    assert_eq!(unsafe { sg_dataset_parse(garbage.as_ptr(), &mut ds) }, SgStatus::Dataset);
}

#[test]
fn validate_simulate_and_measure() {
    let lex = lexicon();
    let response = CString::new(
        "Here is the result:\n```\nscenario \"s\" {\n  weather: storm\n  duration_s: 5\n  actors {\n    vehicles: 3\n    pedestrians: 2\n  }\n}\n```\n",
    )
    .unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { sg_validate(lex, response.as_ptr(), &mut cfg) }, SgStatus::Ok);
    let cfg = owned(cfg);
    assert!(cfg.contains("weather: rain"), "{cfg}");

    let cfg = CString::new(cfg).unwrap();
    let mut ds = ptr::null_mut();
    assert_eq!(unsafe { sg_simulate(cfg.as_ptr(), &mut ds) }, SgStatus::Ok);
    assert_eq!(unsafe { sg_dataset_len(ds) }, 5 * 51);

    let mut stats = SgStats::default();
    assert_eq!(unsafe { sg_dataset_stats(ds, 0.0, &mut stats) }, SgStatus::Ok);
    assert_eq!(stats.total_frames, 51);
    assert_eq!(stats.agents, [3, 2, 0]);
    assert_eq!(stats.avg_per_frame[1], 2.0);

    let mut m = SgMetrics::default();
    assert_eq!(unsafe { sg_metrics(ds, 6, 6, ptr::null(), &mut m) }, SgStatus::Ok);
    assert!(m.pairs > 0);
    assert!(m.ade[2].is_nan());
    assert_eq!(unsafe { sg_metrics(ds, 1, 6, ptr::null(), &mut m) }, SgStatus::Metrics);

    let mut merged = ptr::null_mut();
    assert_eq!(unsafe { sg_dataset_merge(ds, ds, &mut merged) }, SgStatus::Ok);
    assert_eq!(unsafe { sg_dataset_len(merged) }, 2 * 5 * 51);

    let (mut train, mut test) = (ptr::null_mut(), ptr::null_mut());
    assert_eq!(unsafe { sg_dataset_split(merged, 0.8, 1, &mut train, &mut test) }, SgStatus::Ok);
    let mut st = SgStats::default();
    unsafe { sg_dataset_stats(train, 0.0, &mut st) };
    assert_eq!(st.agents.iter().sum::<usize>(), 8);

    let mut text = ptr::null_mut();
    assert_eq!(unsafe { sg_dataset_to_string(ds, &mut text) }, SgStatus::Ok);
    let text = CString::new(owned(text)).unwrap();
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { sg_dataset_parse(text.as_ptr(), &mut back) }, SgStatus::Ok);
    assert_eq!(unsafe { sg_dataset_len(back) }, unsafe { sg_dataset_len(ds) });

    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("d.traj").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { sg_dataset_write(ds, path.as_ptr()) }, SgStatus::Ok);
    let mut read = ptr::null_mut();
    assert_eq!(unsafe { sg_dataset_read(path.as_ptr(), &mut read) }, SgStatus::Ok);
    assert_eq!(unsafe { sg_dataset_len(read) }, 5 * 51);

    for h in [ds, merged, train, test, back, read] {
        unsafe { sg_dataset_free(h) };
    }
    unsafe { sg_lexicon_free(lex) };
}
