use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use curvepull::exact_farey::cusp_normalize;
use curvepull::pullback::{build_evaluator, CuspFate};
use curvepull::ratmap::{cubic_example, quadratic_example, standard_marking, SpherePoint};
use curvepull_ffi::*;

const QUADRATIC: &str = r#"{"num":["1","-4","4"],"den":["1"],"marked":["0","1","inf","1/4"]}"#;
const CUBIC: &str = r#"{"num":["1","-3","3","-1"],"den":["1","6","9"],"marked":["0","1","inf","1/5"]}"#;

struct Handle(*mut CpEvaluator);

impl Drop for Handle {
    fn drop(&mut self) {
        unsafe { cp_evaluator_free(self.0) }
    }
}

fn load(json: &str) -> Result<Handle, (CpStatus, String)> {
    let c = CString::new(json).unwrap();
    let mut out = ptr::null_mut();
    let s = unsafe { cp_evaluator_from_spec(c.as_ptr(), &mut out) };
    if s == CpStatus::Ok {
        assert!(!out.is_null());
        assert!(cp_last_error().is_null());
        Ok(Handle(out))
    } else {
        assert!(out.is_null());
        Err((s, last_error()))
    }
}

fn last_error() -> String {
    let p = cp_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn fate(h: &Handle, p: i64, q: i64) -> (CpFateKind, i64, i64) {
    let (mut k, mut a, mut b) = (CpFateKind::Undecided, 0, 0);
    assert_eq!(unsafe { cp_cusp_fate(h.0, p, q, &mut k, &mut a, &mut b) }, CpStatus::Ok);
    (k, a, b)
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(cp_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn fates_match_engine() {
    for (json, f, a) in [(QUADRATIC, quadratic_example(), SpherePoint::rat(1, 4)), (CUBIC, cubic_example(), SpherePoint::rat(1, 5))] {
        let h = load(json).unwrap();
        let ev = build_evaluator(&f, &standard_marking(a)).unwrap();
        for (p, q) in [(0, 1), (1, 1), (1, 0), (1, 2), (-1, 2), (2, 3), (3, 5), (-4, 7)] {
            let (k, tp, tq) = fate(&h, p, q);
            match ev.fate(cusp_normalize(p, q).unwrap()) {
                CuspFate::Essential(c) => assert_eq!((k, tp, tq), (CpFateKind::Essential, c.p(), c.q()), "{p}/{q}"),
                CuspFate::Peripheral => assert_eq!(k, CpFateKind::Peripheral, "{p}/{q}"),
                CuspFate::Undecided(_) => assert_eq!(k, CpFateKind::Undecided, "{p}/{q}"),
            }
        }
    }
}

#[test]
fn cubic_half_goes_to_minus_two_with_multiplier_third() {
    let h = load(CUBIC).unwrap();
    assert_eq!(fate(&h, 1, 2), (CpFateKind::Essential, -2, 1));
    let (mut n, mut d) = (0, 0);
    assert_eq!(unsafe { cp_cusp_multiplier(h.0, 1, 2, &mut n, &mut d) }, CpStatus::Ok);
    assert_eq!((n, d), (1, 3));
    let mut deg = 0;
    assert_eq!(unsafe { cp_evaluator_degree(h.0, &mut deg) }, CpStatus::Ok);
    assert_eq!(deg, 3);
}

#[test]
fn tau0_is_fixed_by_sigma() {
    let h = load(QUADRATIC).unwrap();
    let (mut re, mut im, mut sr, mut si) = (0.0, 0.0, 0.0, 0.0);
    assert_eq!(unsafe { cp_evaluator_tau0(h.0, &mut re, &mut im) }, CpStatus::Ok);
    assert!((im - 1.27926).abs() < 1e-5);
    assert_eq!(unsafe { cp_sigma_eval(h.0, re, im, &mut sr, &mut si) }, CpStatus::Ok);
    assert!((sr - re).abs() + (si - im).abs() < 1e-8);
    assert_eq!(unsafe { cp_sigma_eval(h.0, 0.0, -1.0, &mut sr, &mut si) }, CpStatus::Precondition);
}

#[test]
fn attractor_json_round_trips() {
    let h = load(QUADRATIC).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { cp_attractor_json(h.0, 6, 50, &mut s) }, CpStatus::Ok);
    let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { cp_string_free(s) };
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["attractor"], serde_json::json!(["-1/1", "1/1"]));
    assert_eq!(v["closure"]["passed"], true);
    assert_eq!(unsafe { cp_attractor_json(h.0, 500, 50, &mut s) }, CpStatus::Precondition);
    assert!(s.is_null());
}

#[test]
fn constant_marking() {
    let h = load(r#"{"num":["1","-4","4"],"den":["1"],"marked":["0","1","inf","1/2"]}"#).unwrap();
    let mut c = false;
    assert_eq!(unsafe { cp_evaluator_is_constant(h.0, &mut c) }, CpStatus::Ok);
    assert!(c);
    assert_eq!(fate(&h, 2, 7).0, CpFateKind::Peripheral);
}

#[test]
fn error_statuses() {
    assert_eq!(load("{").err().unwrap().0, CpStatus::Parse);
    let (s, msg) = load(r#"{"num":["1","0","1"],"den":["1"],"marked":["0","1","inf","2"]}"#).err().unwrap();
    assert_eq!(s, CpStatus::NotPcf);
    assert!(msg.contains("postcritically finite"), "{msg}");
    let twisted = r#"{"num":["-3/4","4","-4"],"den":["0","4","-4"],"marked":["0","1","inf","1/4"]}"#;
    assert_eq!(load(twisted).err().unwrap().0, CpStatus::Precondition);

    let mut out = ptr::null_mut();
    assert_eq!(unsafe { cp_evaluator_from_spec(ptr::null(), &mut out) }, CpStatus::NullArgument);
    let bad = [0xffu8, 0];
    assert_eq!(unsafe { cp_evaluator_from_spec(bad.as_ptr().cast(), &mut out) }, CpStatus::InvalidUtf8);

    let h = load(QUADRATIC).unwrap();
    let mut deg = 0;
    assert_eq!(unsafe { cp_evaluator_degree(ptr::null(), &mut deg) }, CpStatus::NullArgument);
    assert_eq!(unsafe { cp_evaluator_degree(h.0, ptr::null_mut()) }, CpStatus::NullArgument);
    let (mut k, mut a, mut b) = (CpFateKind::Undecided, 0, 0);
    assert_eq!(unsafe { cp_cusp_fate(h.0, 1, 0, &mut k, &mut a, &mut b) }, CpStatus::Ok);
    assert_eq!(unsafe { cp_cusp_fate(h.0, 0, 0, &mut k, &mut a, &mut b) }, CpStatus::Precondition);
    assert_eq!(unsafe { cp_evaluator_set_settings(h.0, 1.5, 12) }, CpStatus::Precondition);
    assert_eq!(unsafe { cp_evaluator_set_settings(h.0, 0.5, 2) }, CpStatus::Precondition);
    assert_eq!(unsafe { cp_evaluator_set_settings(h.0, 0.25, 16) }, CpStatus::Ok);
    unsafe { cp_evaluator_free(ptr::null_mut()) };
    unsafe { cp_string_free(ptr::null_mut()) };
}

/// `cargo test` only builds the rlib, so build the static library here, in
/// its own target directory to stay clear of the outer build lock.
fn static_lib() -> PathBuf {
    let here = std::env::current_exe().unwrap();
    // tests run from target/<profile>/deps
    let target = here.ancestors().nth(3).unwrap().join("c-smoke");
    let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
    let out = Command::new(cargo)
        .args(["build", "--release", "--lib", "-p", "curvepull-ffi", "--target-dir"])
        .arg(&target)
        .current_dir(env!("CARGO_MANIFEST_DIR"))
        .output()
        .expect("cargo available");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    target.join("release").join("libcurvepull_ffi.a")
}

#[test]
fn header_compiles_and_links_from_c() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = static_lib();
    assert!(lib.is_file(), "static library not built at {}", lib.display());
    let exe = std::env::temp_dir().join(format!("curvepull-smoke-{}", std::process::id()));
    let cc = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(root.join("include"))
        .arg(root.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .expect("cc available");
    assert!(cc.status.success(), "{}", String::from_utf8_lossy(&cc.stderr));
    let run = Command::new(&exe).output().unwrap();
    let _ = std::fs::remove_file(&exe);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(
        String::from_utf8(run.stdout).unwrap(),
        "deg=3 kind=1 target=-2/1 mult=1/3 json=1 bad=3 null=1\n"
    );
}
