use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use coneiso_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    unsafe {
        coneiso_last_error(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn version_matches_cargo() {
    let v = unsafe { CStr::from_ptr(coneiso_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn identity_and_quotient_on_the_quadrant() {
    unsafe {
        let mut cone = ptr::null_mut();
        let mut w = ptr::null_mut();
        let mut h = ptr::null_mut();
        let mut e = ptr::null_mut();
        assert_eq!(coneiso_cone_orthant(2, &mut cone), ConeisoStatus::Ok);
        let spec = CString::new("tag = \"monomial\"\nexponents = [1.0, 1.0]").unwrap();
        assert_eq!(
            coneiso_weight_from_toml(cone, spec.as_ptr(), &mut w),
            ConeisoStatus::Ok
        );
        assert_eq!(coneiso_gauge_euclidean(2, &mut h), ConeisoStatus::Ok);

        let mut deg = 0.0;
        assert_eq!(coneiso_weight_degree(w, &mut deg), ConeisoStatus::Ok);
        assert_eq!(deg, 2.0);
        let x = [2.0, 3.0];
        let mut v = 0.0;
        assert_eq!(
            coneiso_weight_eval(w, x.as_ptr(), 2, &mut v),
            ConeisoStatus::Ok
        );
        assert_eq!(v, 6.0);

        let (mut p, mut dv, mut gap) = (0.0, 0.0, 1.0);
        assert_eq!(
            coneiso_identity_check(w, h, cone, 1e-10, &mut p, &mut dv, &mut gap),
            ConeisoStatus::Ok
        );
        // w(B ∩ Σ) = 1/8 for x₁x₂ on the quadrant, and P = D·V with D = 4
        assert!((p - 0.5).abs() < 1e-9, "{p}");
        assert!(gap < 1e-9);

        let c = [0.0, 0.0];
        assert_eq!(
            coneiso_region_ball(c.as_ptr(), 2, 2.0, &mut e),
            ConeisoStatus::Ok
        );
        let mut q = ConeisoQuotient::default();
        assert_eq!(
            coneiso_quotient(e, w, h, cone, 1e-9, &mut q),
            ConeisoStatus::Ok
        );
        assert!((q.quotient - q.sharp_constant).abs() < 1e-7 * q.sharp_constant);

        coneiso_region_free(e);
        coneiso_gauge_free(h);
        coneiso_weight_free(w);
        coneiso_cone_free(cone);
    }
}

#[test]
fn errors_are_reported_with_codes_and_messages() {
    unsafe {
        let mut cone = ptr::null_mut();
        assert_eq!(
            coneiso_cone_orthant(0, &mut cone),
            ConeisoStatus::InvalidCone
        );
        assert!(cone.is_null());
        assert!(last_error().contains("cone"));

        assert_eq!(
            coneiso_cone_orthant(2, ptr::null_mut()),
            ConeisoStatus::NullPointer
        );
        assert_eq!(last_error(), "output handle is null");

        let mut w = ptr::null_mut();
        let tag = CString::new("no_such_weight").unwrap();
        assert_ne!(
            coneiso_weight_catalog(tag.as_ptr(), &mut w),
            ConeisoStatus::Ok
        );
        assert!(w.is_null());

        let tag = CString::new("monomial_11").unwrap();
        assert_eq!(
            coneiso_weight_catalog(tag.as_ptr(), &mut w),
            ConeisoStatus::Ok
        );
        let x = [-1.0, 1.0];
        let mut v = 0.0;
        assert_eq!(
            coneiso_weight_eval(w, x.as_ptr(), 2, &mut v),
            ConeisoStatus::DomainError
        );
        assert_eq!(
            coneiso_weight_eval(w, x.as_ptr(), 1, &mut v),
            ConeisoStatus::InvalidArgument
        );
        coneiso_weight_free(w);

        let mut h = ptr::null_mut();
        assert_eq!(
            coneiso_gauge_p_norm(2, 0.5, &mut h),
            ConeisoStatus::InvalidArgument
        );

        // success clears the message
        assert_eq!(coneiso_gauge_euclidean(2, &mut h), ConeisoStatus::Ok);
        assert_eq!(last_error(), "");
        coneiso_gauge_free(h);
        coneiso_cone_free(ptr::null_mut());
    }
}

#[test]
fn last_error_truncates_and_reports_full_length() {
    unsafe {
        let mut cone = ptr::null_mut();
        coneiso_cone_orthant(0, &mut cone);
        let full = coneiso_last_error(ptr::null_mut(), 0);
        let mut buf = [1 as c_char; 4];
        assert_eq!(coneiso_last_error(buf.as_mut_ptr(), 4), full);
        assert_eq!(buf[3], 0);
        assert!(full > 3);
    }
}

#[test]
fn wirtinger_half_circle_threshold() {
    unsafe {
        let mut l = 0.0;
        // B ≡ 1 on an arc of length π: λ₁ = 1
        assert_eq!(
            coneiso_wirtinger(0.0, std::f64::consts::PI, 400, &mut l),
            ConeisoStatus::Ok
        );
        assert!((l - 1.0).abs() < 1e-4, "{l}");
        // sin θ on (0, π): λ₁ = 2 = α + 1
        assert_eq!(coneiso_wirtinger(1.0, 0.0, 400, &mut l), ConeisoStatus::Ok);
        assert!((l - 2.0).abs() < 1e-3, "{l}");
    }
}

#[test]
fn run_scenario_writes_catalog_csv() {
    let dir = std::env::temp_dir().join(format!("coneiso-ffi-{}", std::process::id()));
    let s = CString::new("catalog").unwrap();
    let d = CString::new(dir.to_str().unwrap()).unwrap();
    let mut code = -1;
    let status = unsafe { coneiso_run_scenario(s.as_ptr(), ptr::null(), 3, d.as_ptr(), &mut code) };
    assert_eq!(status, ConeisoStatus::Ok, "{}", last_error());
    assert_eq!(code, 0);
    assert!(std::fs::read_dir(&dir).unwrap().any(|e| e
        .unwrap()
        .path()
        .extension()
        .is_some_and(|x| x == "csv")));
    std::fs::remove_dir_all(&dir).ok();

    let bad = CString::new("nonsense").unwrap();
    let status =
        unsafe { coneiso_run_scenario(bad.as_ptr(), ptr::null(), -1, d.as_ptr(), &mut code) };
    assert_ne!(status, ConeisoStatus::Ok);
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let header = include.join("coneiso.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in [
        "coneiso_quotient",
        "coneiso_run_scenario",
        "coneiso_last_error",
        "CONEISO_STATUS_OK",
    ] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let src = std::env::temp_dir().join(format!("coneiso-header-{}.c", std::process::id()));
    std::fs::write(
        &src,
        "#include \"coneiso.h\"\nint main(void) {\n  ConeisoCone *c = NULL;\n  ConeisoStatus s = coneiso_cone_orthant(2, &c);\n  coneiso_cone_free(c);\n  return s == CONEISO_STATUS_OK ? 0 : 1;\n}\n",
    )
    .unwrap();
    for (compiler, lang) in [("cc", "c"), ("c++", "c++")] {
        match Command::new(compiler)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang, "-I"])
            .arg(&include)
            .arg(&src)
            .output()
        {
            Ok(out) => assert!(
                out.status.success(),
                "{compiler}: {}",
                String::from_utf8_lossy(&out.stderr)
            ),
            Err(_) => eprintln!("{compiler} not available, skipping"),
        }
    }
    std::fs::remove_file(src).ok();
}
