//! Compiles and runs a small C program against the generated header and the
//! static library.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "privtrack.h"

int main(void) {
    PtLearnerParams p = {PT_LEARNER_KIND_NOISY_MWA, 2, 10, 1, 1.0, 0.0, NAN, PT_PROBE_EXACT, 0};
    PtLearner *h = NULL;
    if (pt_learner_new(&p, 3, &h) != PT_STATUS_OK) return 1;
    for (int t = 0; t < 10; t++) {
        size_t j;
        double loss[2] = {0.0, 1.0};
        if (pt_learner_select(h, &j) != PT_STATUS_OK || j > 1) return 2;
        if (pt_learner_observe(h, loss, 2, NULL) != PT_STATUS_OK) return 3;
    }
    if (pt_learner_rounds(h) != 10) return 4;
    pt_learner_free(h);

    double m[4] = {1.0, 0.0, 0.0, 1.0};
    double value;
    if (pt_dynamic_comparator(m, 2, 2, 1, &value, NULL) != PT_STATUS_OK || value != 0.0) return 5;

    p.epsilon = 0.0;
    if (pt_learner_new(&p, 3, &h) != PT_STATUS_CONFIG) return 6;
    char *msg = pt_last_error();
    printf("%s\n", msg);
    pt_string_free(msg);
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    // target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

fn find_cc() -> Option<&'static str> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|cc| Command::new(cc).arg("--version").output().is_ok())
}

#[test]
fn c_program_links_and_runs() {
    let Some(cc) = find_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let lib = target_dir().join("libprivtrack_ffi.a");
    assert!(lib.exists(), "{} missing", lib.display());
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let exe = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new(cc)
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).contains("epsilon"));
}
