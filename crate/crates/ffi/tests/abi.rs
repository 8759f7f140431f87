use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use ionmzi_ffi::*;

fn product(a2: f64) -> *mut IonmziIonPair {
    let (a, b) = (a2.sqrt(), (1.0 - a2).sqrt());
    let mut h = ptr::null_mut();
    let st = unsafe { ionmzi_ion_pair_new_product(a, 0.0, b, 0.0, a, 0.0, b, 0.0, &mut h) };
    assert_eq!(st, IonmziStatus::Ok);
    assert!(!h.is_null());
    h
}

#[test]
fn single_pass_and_iteration() {
    let h = product(0.7);
    let mut pass = IonmziPassResult::default();
    let mut it = IonmziIteration::default();
    unsafe {
        assert_eq!(ionmzi_single_pass(h, &mut pass), IonmziStatus::Ok);
        assert_eq!(ionmzi_iterate_analytic(h, &mut it), IonmziStatus::Ok);
    }
    // |a|^2 |b|^2 / 2 for matched moduli
    assert!((pass.p_detect_lower - 0.105).abs() < 1e-12);
    let total = pass.p_scatter_u
        + pass.p_scatter_l
        + pass.p_detect_upper
        + pass.p_detect_lower
        + pass.p_recycle;
    assert!((total - 1.0).abs() < 1e-12);
    assert!((it.p_entangled - 0.14).abs() < 1e-12);

    let mut num = IonmziIteration::default();
    unsafe { assert_eq!(ionmzi_iterate_numeric(h, 30, &mut num), IonmziStatus::Ok) };
    assert!((num.p_entangled - it.p_entangled).abs() < 1e-10);
    unsafe { ionmzi_ion_pair_free(h) };
}

#[test]
fn monte_carlo_is_deterministic() {
    let h = product(0.7);
    let mut a = IonmziMonteCarlo::default();
    let mut b = IonmziMonteCarlo::default();
    unsafe {
        assert_eq!(
            ionmzi_monte_carlo(h, 20_000, 9, 30, &mut a),
            IonmziStatus::Ok
        );
        assert_eq!(
            ionmzi_monte_carlo(h, 20_000, 9, 30, &mut b),
            IonmziStatus::Ok
        );
        ionmzi_ion_pair_free(h);
    }
    assert_eq!(a.entangled, b.entangled);
    assert_eq!(a.entangled + a.scattered + a.stuck + a.truncated, 20_000);
    assert!((a.p_entangled - 0.14).abs() < 4.0 * a.se_entangled);
}

#[test]
fn mixed_and_efficiency() {
    let mut m = IonmziMixed::default();
    unsafe { assert_eq!(ionmzi_mixed(0.7, &mut m), IonmziStatus::Ok) };
    assert!((m.p_detect_lower - 0.7 / 4.0).abs() < 1e-12);
    assert!((m.p_entangled_iterated - 0.7 / 3.0).abs() < 1e-12);
    assert!((m.fidelity_upper_psi_plus - 0.7 / 1.3).abs() < 1e-12);

    let mut gamma = 0.0;
    unsafe {
        assert_eq!(
            ionmzi_cavity_decay_rate(19_000.0, 3e-3, &mut gamma),
            IonmziStatus::Ok
        )
    };
    assert!((gamma / 6.609_303_744_943_345e7 - 1.0).abs() < 1e-12);

    let mut t = IonmziThroughput::default();
    unsafe {
        assert_eq!(
            ionmzi_throughput(m.p_entangled_iterated, 0.01, 0.7, 1.0, 5000.0, &mut t),
            IonmziStatus::Ok
        )
    };
    assert!((t.pairs_per_second - 8.1667).abs() < 1e-2);

    let mut p = 0.0;
    unsafe { assert_eq!(ionmzi_p_cav(1e7, 1e7, 1e7, &mut p), IonmziStatus::Ok) };
    assert!(p > 0.0 && p < 1.0);
}

#[test]
fn errors_map_to_status_codes() {
    let mut h = ptr::null_mut();
    let st = unsafe { ionmzi_ion_pair_new_product(1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, &mut h) };
    assert_eq!(st, IonmziStatus::NotNormalized);
    assert!(h.is_null());
    let msg = unsafe { CStr::from_ptr(ionmzi_last_error_message()) };
    assert!(!msg.to_bytes().is_empty());

    let mut pass = IonmziPassResult::default();
    assert_eq!(
        unsafe { ionmzi_single_pass(ptr::null(), &mut pass) },
        IonmziStatus::NullPointer
    );
    let mut m = IonmziMixed::default();
    assert_eq!(
        unsafe { ionmzi_mixed(1.5, &mut m) },
        IonmziStatus::InvalidArgument
    );
    let mut g = 0.0;
    assert_eq!(
        unsafe { ionmzi_cavity_decay_rate(-1.0, 3e-3, &mut g) },
        IonmziStatus::InvalidArgument
    );

    let text = unsafe { CStr::from_ptr(ionmzi_status_message(IonmziStatus::InvalidConfig)) };
    assert_eq!(text.to_str().unwrap(), "invalid configuration");
    unsafe { ionmzi_ion_pair_free(ptr::null_mut()) };
}

#[test]
fn json_config_round_trip() {
    let cfg = CString::new(r#"{"scenario": "throughput", "preset": "paper-product"}"#).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { ionmzi_run_json(cfg.as_ptr(), &mut out) },
        IonmziStatus::Ok
    );
    let report = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_owned();
    unsafe { ionmzi_string_free(out) };
    assert!(report.contains("\"pairs_per_second\": 4.9"));

    let bad = CString::new(r#"{"scenario": "mixed", "fidelity": 2.0}"#).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { ionmzi_run_json(bad.as_ptr(), &mut out) },
        IonmziStatus::InvalidConfig
    );
    assert!(out.is_null());
    let msg = unsafe { CStr::from_ptr(ionmzi_last_error_message()) }
        .to_str()
        .unwrap();
    assert!(msg.contains("fidelity"));
}

#[test]
fn header_compiles_as_c() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let header = format!("{dir}/include/ionmzi.h");
    assert!(std::path::Path::new(&header).exists());
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".to_owned());
    let src = std::env::temp_dir().join(format!("ionmzi_header_{}.c", std::process::id()));
    std::fs::write(
        &src,
        "#include \"ionmzi.h\"\nint main(void) { IonmziIonPair *p = 0; (void)p; return IONMZI_STATUS_OK; }\n",
    )
    .unwrap();
    let status = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(format!("{dir}/include"))
        .arg(&src)
        .status();
    let _ = std::fs::remove_file(&src);
    match status {
        Ok(s) => assert!(s.success(), "C compiler rejected the header"),
        Err(e) => eprintln!("skipping C header check, no compiler: {e}"),
    }
}
