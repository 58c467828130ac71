use std::ffi::{CStr, CString};
use std::ptr;

use privtrack_ffi::*;

fn params(kind: PtLearnerKind) -> PtLearnerParams {
    PtLearnerParams {
        kind,
        experts: 3,
        horizon: 16,
        switches: 1,
        epsilon: 1.0,
        beta: 0.0,
        eta: f64::NAN,
        probe: PtProbe::Geometric,
        meta_cap: 0,
    }
}

unsafe fn take_string(p: *mut libc::c_char) -> String {
    assert!(!p.is_null());
    let s = CStr::from_ptr(p).to_str().unwrap().to_owned();
    pt_string_free(p);
    s
}

#[test]
fn learners_play_through_handles() {
    let kinds = [
        PtLearnerKind::LazyRnm,
        PtLearnerKind::SvtRestart,
        PtLearnerKind::NoisyMwa,
        PtLearnerKind::Mwa,
        PtLearnerKind::MetaReduction,
    ];
    for kind in kinds {
        unsafe {
            let mut h = ptr::null_mut();
            assert_eq!(pt_learner_new(&params(kind), 7, &mut h), PtStatus::Ok);
            for t in 0..16 {
                let mut j = usize::MAX;
                assert_eq!(pt_learner_select(h, &mut j), PtStatus::Ok);
                assert!(j < 3);
                let loss = [0.2, if t < 8 { 0.0 } else { 1.0 }, 0.7];
                assert_eq!(
                    pt_learner_observe(h, loss.as_ptr(), 3, ptr::null_mut()),
                    PtStatus::Ok
                );
            }
            assert_eq!(pt_learner_rounds(h), 16);
            let mut json = ptr::null_mut();
            assert_eq!(pt_learner_ledger_json(h, &mut json), PtStatus::Ok);
            let ledger = take_string(json);
            assert!(ledger.starts_with('['));
            pt_learner_free(h);
        }
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    unsafe {
        let mut h = ptr::null_mut();
        let mut bad = params(PtLearnerKind::NoisyMwa);
        bad.epsilon = -1.0;
        assert_eq!(pt_learner_new(&bad, 0, &mut h), PtStatus::Config);
        assert!(take_string(pt_last_error()).contains("epsilon"));

        assert_eq!(
            pt_learner_new(ptr::null(), 0, &mut h),
            PtStatus::NullPointer
        );

        let mut big = params(PtLearnerKind::MetaReduction);
        big.horizon = 5000;
        big.switches = 3;
        assert_eq!(pt_learner_new(&big, 0, &mut h), PtStatus::ResourceCap);

        assert_eq!(
            pt_learner_new(&params(PtLearnerKind::Mwa), 0, &mut h),
            PtStatus::Ok
        );
        let loss = [0.1, 0.2, 0.3];
        // observe before select
        assert_eq!(
            pt_learner_observe(h, loss.as_ptr(), 3, ptr::null_mut()),
            PtStatus::State
        );
        let mut j = 0;
        assert_eq!(pt_learner_select(h, &mut j), PtStatus::Ok);
        assert_eq!(
            pt_learner_observe(h, loss.as_ptr(), 2, ptr::null_mut()),
            PtStatus::InvalidArgument
        );
        let out_of_range = [0.1, 2.0, 0.3];
        assert_eq!(
            pt_learner_observe(h, out_of_range.as_ptr(), 3, ptr::null_mut()),
            PtStatus::InvalidArgument
        );
        pt_learner_free(h);
        pt_learner_free(ptr::null_mut());
        assert_eq!(pt_learner_rounds(ptr::null()), 0);
    }
}

#[test]
fn comparator_and_projection() {
    // 4 x 2, best single-switch path 1,1,0,0
    let losses = [0.9, 0.1, 0.8, 0.0, 0.0, 1.0, 0.1, 0.7];
    let mut value = 0.0;
    let mut path = [9usize; 4];
    unsafe {
        assert_eq!(
            pt_dynamic_comparator(losses.as_ptr(), 4, 2, 1, &mut value, path.as_mut_ptr()),
            PtStatus::Ok
        );
    }
    assert!((value - 0.2).abs() < 1e-12);
    assert_eq!(path, [1, 1, 0, 0]);

    let v = [0.99, 0.01];
    let mut w = [0.0; 2];
    unsafe {
        assert_eq!(
            pt_kl_project(v.as_ptr(), 2, 0.1, w.as_mut_ptr()),
            PtStatus::Ok
        );
        assert_eq!(
            pt_kl_project(v.as_ptr(), 2, 0.6, w.as_mut_ptr()),
            PtStatus::InvalidArgument
        );
    }
    assert!((w[0] - 0.9).abs() < 1e-12 && (w[1] - 0.1).abs() < 1e-12);

    assert_eq!(pt_meta_expert_count(6, 2, 1), 26);
    assert_eq!(pt_meta_expert_count(100_000, 1000, 50), u64::MAX);
}

#[test]
fn run_config_returns_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(
        &cfg,
        format!(
            "horizon = 50\nexperts = 2\nswitches = 1\nlearner = \"noisy-mwa\"\ntrials = 2\noutput_dir = {:?}\n[adversary]\nkind = \"rotation\"\ngap = 0.2\n",
            dir.path().join("out").display().to_string()
        ),
    )
    .unwrap();
    let path = CString::new(cfg.to_str().unwrap()).unwrap();
    let mut json = ptr::null_mut();
    unsafe {
        assert_eq!(pt_run_config(path.as_ptr(), &mut json), PtStatus::Ok);
        let report: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
        assert_eq!(report["trials"].as_array().unwrap().len(), 2);
        let missing = CString::new("/nonexistent/c.toml").unwrap();
        assert_eq!(pt_run_config(missing.as_ptr(), &mut json), PtStatus::Config);
    }
    assert!(dir.path().join("out/report.json").exists());
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(pt_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
