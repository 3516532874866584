use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use qrac_ffi::*;

const QUBIT: f64 = 0.728_553_390_593_273_7;

fn last_error() -> Option<String> {
    let p = qrac_last_error_message();
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
}

#[test]
fn version_is_package_version() {
    let v = unsafe { CStr::from_ptr(qrac_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn builtin_table_round_trip() {
    let mut t: *mut QracTable = ptr::null_mut();
    assert_eq!(qrac_table_builtin(3, &mut t), QracStatus::Ok);
    let mut len = 0usize;
    assert_eq!(qrac_table_len(t, &mut len), QracStatus::Ok);
    assert_eq!(len, 9);
    let (mut a, mut b) = (0usize, 0usize);
    assert_eq!(qrac_table_get(t, 3, &mut a, &mut b), QracStatus::Ok);
    assert_eq!((a, b), (1, 2));
    assert_eq!(qrac_table_get(t, 9, &mut a, &mut b), QracStatus::OutOfRange);
    assert!(last_error().unwrap().contains("index 9"));
    let mut valid = false;
    assert_eq!(qrac_table_is_valid(t, &mut valid), QracStatus::Ok);
    assert!(valid);
    unsafe { qrac_table_free(t) };
}

#[test]
fn custom_table_validation() {
    let digits = [0usize, 0, 0, 1, 1, 0, 1, 1];
    let mut t: *mut QracTable = ptr::null_mut();
    assert_eq!(unsafe { qrac_table_new(2, digits.as_ptr(), 4, &mut t) }, QracStatus::Ok);
    let mut valid = true;
    assert_eq!(qrac_table_is_valid(t, &mut valid), QracStatus::Ok);
    assert!(!valid);

    let mut report: *mut QracReport = ptr::null_mut();
    assert_eq!(qrac_protocol_run(2, t, QracVariant::TwoStrings, &mut report), QracStatus::Encoding);
    assert!(report.is_null());
    unsafe { qrac_table_free(t) };

    let bad = [0usize, 0, 0, 1, 1, 1, 2, 0];
    let mut t2: *mut QracTable = ptr::null_mut();
    assert_eq!(unsafe { qrac_table_new(2, bad.as_ptr(), 4, &mut t2) }, QracStatus::OutOfRange);
}

#[test]
fn unavailable_builtin_and_bad_dimension() {
    let mut t: *mut QracTable = ptr::null_mut();
    assert_eq!(qrac_table_builtin(5, &mut t), QracStatus::NotAvailable);
    assert_eq!(qrac_table_generate(1, &mut t), QracStatus::InvalidDimension);
    assert!(last_error().is_some());
    assert_eq!(qrac_table_generate(5, &mut t), QracStatus::Ok);
    assert!(last_error().is_none());
    unsafe { qrac_table_free(t) };
}

#[test]
fn protocol_report_accessors() {
    let mut report: *mut QracReport = ptr::null_mut();
    assert_eq!(qrac_protocol_run(2, ptr::null(), QracVariant::TwoStrings, &mut report), QracStatus::Ok);
    let (mut avg, mut min) = (0.0, 0.0);
    assert_eq!(qrac_report_p_avg(report, &mut avg), QracStatus::Ok);
    assert_eq!(qrac_report_p_min(report, &mut min), QracStatus::Ok);
    assert!((avg - QUBIT).abs() < 1e-12 && (min - QUBIT).abs() < 1e-12);

    let key = CString::new("c=1").unwrap();
    let mut c1 = 0.0;
    assert_eq!(unsafe { qrac_report_per_choice(report, key.as_ptr(), &mut c1) }, QracStatus::Ok);
    assert!((c1 - QUBIT).abs() < 1e-12);
    let missing = CString::new("c=7").unwrap();
    assert_eq!(unsafe { qrac_report_per_choice(report, missing.as_ptr(), &mut c1) }, QracStatus::InvalidArgument);

    let mut json: *mut std::ffi::c_char = ptr::null_mut();
    assert_eq!(qrac_report_to_json(report, &mut json), QracStatus::Ok);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    assert!(text.contains("\"per_string\""));
    unsafe {
        qrac_string_free(json);
        qrac_report_free(report);
    }
}

#[test]
fn four_bit_and_trivial_reports() {
    let mut report: *mut QracReport = ptr::null_mut();
    assert_eq!(qrac_protocol_run(2, ptr::null(), QracVariant::FourDitsPairs, &mut report), QracStatus::Ok);
    let mut min = 0.0;
    qrac_report_p_min(report, &mut min);
    assert!((min - QUBIT / 2.0).abs() < 1e-12);
    unsafe { qrac_report_free(report) };

    assert_eq!(qrac_protocol_run(3, ptr::null(), QracVariant::FourDitsPairs, &mut report), QracStatus::InvalidArgument);

    assert_eq!(qrac_trivial_strategy(2, QracVariant::FourDitsPairs, &mut report), QracStatus::Ok);
    let mut avg = 0.0;
    qrac_report_p_avg(report, &mut avg);
    assert!((avg - 13.0 / 24.0).abs() < 1e-15);
    unsafe { qrac_report_free(report) };
}

#[test]
fn teleport_entry_points() {
    let mut f = 0.0;
    assert_eq!(qrac_teleport_fidelity(3, 5, &mut f), QracStatus::Ok);
    assert!((f - 5.0 / 9.0).abs() < 1e-10);
    assert_eq!(qrac_teleport_fidelity(2, 0, &mut f), QracStatus::OutOfRange);
    assert_eq!(qrac_split_strategy(2, 2, &mut f), QracStatus::Ok);
    assert!((f - 0.5).abs() < 1e-12);
    assert_eq!(qrac_favored_strategy(2, &mut f), QracStatus::Ok);
    assert_eq!(f, 0.625);
    assert_eq!(qrac_composite_fidelity(2, &mut f), QracStatus::Ok);
    assert!((f - QUBIT).abs() < 1e-9);
    assert_eq!(qrac_composite_fidelity(3, &mut f), QracStatus::NotAvailable);
}

#[test]
fn bound_entry_points() {
    let (mut n, mut d) = (0i64, 0i64);
    assert_eq!(qrac_symmetric_bound(2, 2, &mut n, &mut d), QracStatus::Ok);
    assert_eq!((n, d), (3, 4));
    assert_eq!(qrac_werner_fidelity(1, 2, 2, &mut n, &mut d), QracStatus::Ok);
    assert_eq!((n, d), (5, 6));
    assert_eq!(qrac_werner_fidelity(3, 2, 2, &mut n, &mut d), QracStatus::InvalidArgument);

    let mut v = 0.0;
    assert_eq!(qrac_asym_closed_form(0.5, 2, &mut v), QracStatus::Ok);
    assert!((v - 0.75).abs() < 1e-15);

    let p = [0.3, 0.7];
    let mut point = [0.0; 2];
    assert_eq!(unsafe { qrac_asym_optimize(2, p.as_ptr(), 2, 16, 1, &mut v, point.as_mut_ptr()) }, QracStatus::Ok);
    let mut closed = 0.0;
    qrac_asym_closed_form(0.3, 2, &mut closed);
    assert!((v - closed).abs() < 1e-6);
    assert!(point.iter().all(|&x| (0.0..=1.0).contains(&x)));
    assert_eq!(unsafe { qrac_asym_optimize(2, p.as_ptr(), 2, 16, 1, &mut v, ptr::null_mut()) }, QracStatus::Ok);
}

#[test]
fn null_pointers_are_reported() {
    assert_eq!(qrac_table_builtin(2, ptr::null_mut()), QracStatus::NullPointer);
    assert!(last_error().unwrap().contains("table"));
    let mut v = 0.0;
    assert_eq!(qrac_report_p_avg(ptr::null(), &mut v), QracStatus::NullPointer);
    assert_eq!(unsafe { qrac_asym_optimize(2, ptr::null(), 2, 4, 0, &mut v, ptr::null_mut()) }, QracStatus::NullPointer);
    unsafe {
        qrac_table_free(ptr::null_mut());
        qrac_report_free(ptr::null_mut());
        qrac_string_free(ptr::null_mut());
    }
}

#[test]
fn errors_are_per_thread() {
    let mut t: *mut QracTable = ptr::null_mut();
    assert_eq!(qrac_table_generate(0, &mut t), QracStatus::InvalidDimension);
    std::thread::spawn(|| assert!(last_error().is_none())).join().unwrap();
    assert!(last_error().is_some());
}

#[test]
fn header_declares_every_entry_point() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/qrac.h")).unwrap();
    for name in [
        "qrac_last_error_message",
        "qrac_version",
        "qrac_string_free",
        "qrac_table_builtin",
        "qrac_table_generate",
        "qrac_table_new",
        "qrac_table_free",
        "qrac_table_len",
        "qrac_table_get",
        "qrac_table_is_valid",
        "qrac_protocol_run",
        "qrac_trivial_strategy",
        "qrac_report_free",
        "qrac_report_p_avg",
        "qrac_report_p_min",
        "qrac_report_per_choice",
        "qrac_report_to_json",
        "qrac_teleport_fidelity",
        "qrac_split_strategy",
        "qrac_favored_strategy",
        "qrac_composite_fidelity",
        "qrac_symmetric_bound",
        "qrac_werner_fidelity",
        "qrac_asym_closed_form",
        "qrac_asym_optimize",
    ] {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct QracTable QracTable;"));
    assert!(header.contains("QRAC_STATUS_OK = 0"));
}

#[test]
fn header_compiles_as_c() {
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let src = std::env::temp_dir().join(format!("qrac_header_check_{}.c", std::process::id()));
    std::fs::write(&src, "#include \"qrac.h\"\nint main(void) { QracTable *t = 0; return qrac_table_builtin(2, &t) == QRAC_STATUS_OK ? 0 : 1; }\n").unwrap();
    let status = Command::new("cc").arg("-fsyntax-only").arg("-Wall").arg("-I").arg(&include).arg(&src).status();
    let _ = std::fs::remove_file(&src);
    match status {
        Ok(s) => assert!(s.success(), "cc rejected the generated header"),
        Err(e) => eprintln!("skipping C compile check: cc unavailable ({e})"),
    }
}
