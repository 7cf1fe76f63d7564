use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use vkit_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    unsafe {
        vkit_last_error(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn square() -> *mut VkitMetric {
    let pts = [0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0];
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { vkit_metric_from_points(pts.as_ptr(), 4, 2, &mut m) }, VkitStatus::Ok);
    m
}

#[test]
fn metric_round_trip() {
    let m = square();
    unsafe {
        assert_eq!(vkit_metric_len(m), 4);
        let mut d = 0.0;
        assert_eq!(vkit_metric_dist(m, 0, 2, &mut d), VkitStatus::Ok);
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(vkit_metric_dist(m, 0, 9, &mut d), VkitStatus::OutOfRange);
        assert!(last_error().contains("out of range"));
        vkit_metric_free(m);
    }
}

#[test]
fn rejects_bad_matrix_and_null() {
    let bad = [0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0];
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(vkit_metric_from_matrix(bad.as_ptr(), 3, &mut m), VkitStatus::InvalidMetric);
        assert!(m.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(vkit_metric_from_matrix(ptr::null(), 3, &mut m), VkitStatus::NullPointer);
        assert_eq!(vkit_metric_len(ptr::null()), 0);
        vkit_metric_free(ptr::null_mut());
    }
}

#[test]
fn transport_and_measures() {
    let m = square();
    unsafe {
        let (sa, wa) = ([0usize, 1], [0.5, 0.5]);
        let (sb, wb) = ([2usize, 3], [0.5, 0.5]);
        let mut d = 0.0;
        assert_eq!(
            vkit_wasserstein(m, sa.as_ptr(), wa.as_ptr(), 2, sb.as_ptr(), wb.as_ptr(), 2, &mut d),
            VkitStatus::Ok
        );
        assert!((d - 1.0).abs() < 1e-12);
        let mut b = 0.0;
        assert_eq!(
            vkit_barycentric_distance(sa.as_ptr(), wa.as_ptr(), 2, sb.as_ptr(), wb.as_ptr(), 2, &mut b),
            VkitStatus::Ok
        );
        assert_eq!(b, 2.0);
        let bad_w = [0.7, 0.7];
        assert_eq!(
            vkit_wasserstein(m, sa.as_ptr(), bad_w.as_ptr(), 2, sb.as_ptr(), wb.as_ptr(), 2, &mut d),
            VkitStatus::InvalidMeasure
        );
        let far = [9usize];
        let one = [1.0];
        assert_eq!(
            vkit_wasserstein(m, far.as_ptr(), one.as_ptr(), 1, sb.as_ptr(), wb.as_ptr(), 2, &mut d),
            VkitStatus::OutOfRange
        );
        vkit_metric_free(m);
    }
}

#[test]
fn diagrams_and_betti() {
    let m = square();
    unsafe {
        let mut k = ptr::null_mut();
        assert_eq!(vkit_complex_build(m, VkitFiltration::VietorisRips, f64::INFINITY, 2, &mut k), VkitStatus::Ok);
        assert_eq!(vkit_complex_count(k, 0), 4);
        assert_eq!(vkit_complex_count(k, 1), 6);
        assert_eq!(vkit_complex_count(k, usize::MAX), 4 + 6 + 4);
        let mut beta = 0;
        assert_eq!(vkit_betti_at(k, 1.2, 1, &mut beta), VkitStatus::Ok);
        assert_eq!(beta, 1);

        let mut d = ptr::null_mut();
        assert_eq!(vkit_diagram_compute(k, 2, &mut d), VkitStatus::SkeletonTooShallow);
        assert_eq!(vkit_diagram_compute(k, 1, &mut d), VkitStatus::Ok);
        let n = vkit_diagram_len(d);
        let mut rows = Vec::new();
        for i in 0..n {
            let (mut dim, mut b, mut e) = (0, 0.0, 0.0);
            assert_eq!(vkit_diagram_get(d, i, &mut dim, &mut b, &mut e), VkitStatus::Ok);
            rows.push((dim, b, e));
        }
        assert_eq!(rows.iter().filter(|r| r.0 == 0 && r.2.is_infinite()).count(), 1);
        assert_eq!(rows.iter().filter(|r| r.0 == 0 && r.2 == 1.0).count(), 3);
        assert!(rows.iter().any(|r| r.0 == 1 && r.1 == 1.0 && (r.2 - 2f64.sqrt()).abs() < 1e-12));
        let (mut dim, mut b, mut e) = (0, 0.0, 0.0);
        assert_eq!(vkit_diagram_get(d, n, &mut dim, &mut b, &mut e), VkitStatus::OutOfRange);

        let mut dist = -1.0;
        assert_eq!(vkit_diagram_distance(d, d, &mut dist), VkitStatus::Ok);
        assert_eq!(dist, 0.0);

        let mut c = ptr::null_mut();
        assert_eq!(vkit_complex_build(m, VkitFiltration::Cech, f64::INFINITY, 2, &mut c), VkitStatus::Ok);
        let mut dc = ptr::null_mut();
        assert_eq!(vkit_diagram_compute(c, 1, &mut dc), VkitStatus::Ok);
        assert_eq!(vkit_diagram_distance(d, dc, &mut dist), VkitStatus::Ok);
        assert!(dist > 0.0 && dist.is_finite());

        vkit_diagram_free(dc);
        vkit_complex_free(c);
        vkit_diagram_free(d);
        vkit_complex_free(k);
        vkit_metric_free(m);
    }
}

#[test]
fn fk_locate_and_count() {
    unsafe {
        let mut count = 0;
        assert_eq!(vkit_fk_simplex_count(2, 2, &mut count), VkitStatus::Ok);
        assert_eq!(count, 8);
        assert_eq!(vkit_fk_simplex_count(0, 2, &mut count), VkitStatus::InvalidArgument);

        let y = [0.3, 0.8];
        let (mut base, mut perm, mut bary) = ([0usize; 2], [0usize; 2], [0.0; 3]);
        assert_eq!(
            vkit_fk_locate(2, 2, y.as_ptr(), base.as_mut_ptr(), perm.as_mut_ptr(), bary.as_mut_ptr()),
            VkitStatus::Ok
        );
        assert_eq!(base, [0, 1]);
        assert!((bary.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let out = [1.5, 0.0];
        assert_eq!(
            vkit_fk_locate(2, 2, out.as_ptr(), base.as_mut_ptr(), perm.as_mut_ptr(), bary.as_mut_ptr()),
            VkitStatus::OutOfRange
        );
    }
}

#[test]
fn status_strings() {
    for code in 0..8 {
        let s = unsafe { CStr::from_ptr(vkit_status_string(code)) };
        assert!(!s.to_bytes().is_empty());
    }
    let s = unsafe { CStr::from_ptr(vkit_status_string(99)) };
    assert_eq!(s.to_str().unwrap(), "unknown status");
}

#[test]
fn header_declares_every_export() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(root.join("include/vkit.h")).unwrap();
    let source = std::fs::read_to_string(root.join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 18);
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
}

fn find_static_lib() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let profile_dir = exe.parent()?.parent()?;
    let lib = profile_dir.join("libvkit_ffi.a");
    lib.exists().then_some(lib)
}

#[test]
fn c_program_links_and_runs() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let Some(lib) = find_static_lib() else {
        eprintln!("libvkit_ffi.a not found next to the test binary; skipping C link test");
        return;
    };
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping C link test");
        return;
    }
    let out_dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let exe = out_dir.join("vkit_smoke");
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(root.join("include"))
        .arg(root.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C smoke program failed to compile");
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
}
