//! C ABI for `vkit`.
//!
//! Objects cross the boundary as opaque handles created by `vkit_*_new` /
//! `vkit_*_build` / `vkit_*_compute` functions and released with the
//! matching `vkit_*_free`. Every fallible call returns a [`VkitStatus`];
//! results are written through out-pointers only on success. A description
//! of the most recent failure on the calling thread is available from
//! [`vkit_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use vkit::complex::{build_cech, build_vr, FilteredComplex};
use vkit::fk::FkTriangulation;
use vkit::measure::{barycentric_distance, FiniteMeasure};
use vkit::metric::FiniteMetricSpace;
use vkit::persistence::{betti_at, compute_diagram, diagram_distance, PersistenceDiagram};
use vkit::transport::wasserstein;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VkitStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidMetric = 3,
    InvalidMeasure = 4,
    OutOfRange = 5,
    SkeletonTooShallow = 6,
    Panic = 7,
}

/// Filtration type for [`vkit_complex_build`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VkitFiltration {
    VietorisRips = 0,
    Cech = 1,
}

/// A validated finite metric space.
pub struct VkitMetric(FiniteMetricSpace);

/// A filtered simplicial complex.
pub struct VkitComplex(FilteredComplex);

/// A persistence diagram.
pub struct VkitDiagram(PersistenceDiagram);

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: &str) {
    LAST_ERROR.with(|e| {
        let mut buf = e.borrow_mut();
        buf.clear();
        buf.extend_from_slice(msg.as_bytes());
    });
}

fn fail(status: VkitStatus, msg: impl AsRef<str>) -> VkitStatus {
    set_error(msg.as_ref());
    status
}

fn guard(f: impl FnOnce() -> VkitStatus) -> VkitStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(VkitStatus::Panic, "internal panic"),
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(VkitStatus::NullPointer, concat!("null pointer: ", stringify!($p)));
        })+
    };
}

/// Static description of a status code; unknown codes map to
/// "unknown status".
#[no_mangle]
pub extern "C" fn vkit_status_string(status: i32) -> *const c_char {
    let s: &'static CStr = match status {
        0 => c"ok",
        1 => c"null pointer",
        2 => c"invalid argument",
        3 => c"invalid metric",
        4 => c"invalid measure",
        5 => c"index out of range",
        6 => c"complex skeleton too shallow",
        7 => c"internal panic",
        _ => c"unknown status",
    };
    s.as_ptr()
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len - 1` bytes) and returns the full message length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn vkit_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Builds a space from a row-major `n × n` distance matrix.
///
/// # Safety
/// `data` must point to `n * n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vkit_metric_from_matrix(data: *const f64, n: usize, out: *mut *mut VkitMetric) -> VkitStatus {
    guard(|| {
        non_null!(data, out);
        let Some(total) = n.checked_mul(n) else { return fail(VkitStatus::InvalidArgument, "matrix too large") };
        let flat = slice::from_raw_parts(data, total);
        let rows: Vec<Vec<f64>> = flat.chunks(n.max(1)).map(<[f64]>::to_vec).collect();
        match FiniteMetricSpace::from_matrix(&rows) {
            Ok(space) => {
                *out = Box::into_raw(Box::new(VkitMetric(space)));
                VkitStatus::Ok
            }
            Err(e) => fail(VkitStatus::InvalidMetric, e.to_string()),
        }
    })
}

/// Builds a Euclidean space from `n` points of dimension `dim` (row-major).
///
/// # Safety
/// `coords` must point to `n * dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vkit_metric_from_points(
    coords: *const f64,
    n: usize,
    dim: usize,
    out: *mut *mut VkitMetric,
) -> VkitStatus {
    guard(|| {
        non_null!(coords, out);
        if dim == 0 {
            return fail(VkitStatus::InvalidArgument, "dimension must be positive");
        }
        let Some(total) = n.checked_mul(dim) else { return fail(VkitStatus::InvalidArgument, "input too large") };
        let pts: Vec<Vec<f64>> = slice::from_raw_parts(coords, total).chunks(dim).map(<[f64]>::to_vec).collect();
        match FiniteMetricSpace::from_points(&pts) {
            Ok(space) => {
                *out = Box::into_raw(Box::new(VkitMetric(space)));
                VkitStatus::Ok
            }
            Err(e) => fail(VkitStatus::InvalidMetric, e.to_string()),
        }
    })
}

/// Number of points; 0 for a null handle.
///
/// # Safety
/// `metric` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vkit_metric_len(metric: *const VkitMetric) -> usize {
    metric.as_ref().map_or(0, |m| m.0.len())
}

/// # Safety
/// `metric` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vkit_metric_dist(metric: *const VkitMetric, i: usize, j: usize, out: *mut f64) -> VkitStatus {
    guard(|| {
        non_null!(metric, out);
        let m = &(*metric).0;
        if i >= m.len() || j >= m.len() {
            return fail(VkitStatus::OutOfRange, format!("index ({i}, {j}) out of range for {} points", m.len()));
        }
        *out = m.dist(i, j);
        VkitStatus::Ok
    })
}

/// # Safety
/// `metric` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vkit_metric_free(metric: *mut VkitMetric) {
    if !metric.is_null() {
        drop(Box::from_raw(metric));
    }
}

unsafe fn measure(support: *const usize, weights: *const f64, len: usize) -> Result<FiniteMeasure, VkitStatus> {
    if support.is_null() || weights.is_null() {
        return Err(fail(VkitStatus::NullPointer, "null measure arrays"));
    }
    let s = slice::from_raw_parts(support, len).to_vec();
    let w = slice::from_raw_parts(weights, len).to_vec();
    FiniteMeasure::new(s, w).map_err(|e| fail(VkitStatus::InvalidMeasure, e.to_string()))
}

/// Exact 1-Wasserstein distance between two measures given as
/// (support indices, weights) arrays.
///
/// # Safety
/// Arrays must hold `len_a` / `len_b` elements; `metric` must be live and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vkit_wasserstein(
    metric: *const VkitMetric,
    support_a: *const usize,
    weights_a: *const f64,
    len_a: usize,
    support_b: *const usize,
    weights_b: *const f64,
    len_b: usize,
    out: *mut f64,
) -> VkitStatus {
    guard(|| {
        non_null!(metric, out);
        let a = match measure(support_a, weights_a, len_a) {
            Ok(m) => m,
            Err(s) => return s,
        };
        let b = match measure(support_b, weights_b, len_b) {
            Ok(m) => m,
            Err(s) => return s,
        };
        match wasserstein(&(*metric).0, &a, &b) {
            Ok((d, _)) => {
                *out = d;
                VkitStatus::Ok
            }
            Err(e) => fail(VkitStatus::OutOfRange, e.to_string()),
        }
    })
}

/// ℓ¹ distance between barycentric coordinate vectors.
///
/// # Safety
/// As for [`vkit_wasserstein`], without a metric.
#[no_mangle]
pub unsafe extern "C" fn vkit_barycentric_distance(
    support_a: *const usize,
    weights_a: *const f64,
    len_a: usize,
    support_b: *const usize,
    weights_b: *const f64,
    len_b: usize,
    out: *mut f64,
) -> VkitStatus {
    guard(|| {
        non_null!(out);
        let a = match measure(support_a, weights_a, len_a) {
            Ok(m) => m,
            Err(s) => return s,
        };
        let b = match measure(support_b, weights_b, len_b) {
            Ok(m) => m,
            Err(s) => return s,
        };
        *out = barycentric_distance(&a, &b);
        VkitStatus::Ok
    })
}

/// Open Vietoris–Rips or intrinsic Čech complex with simplices of at most
/// `k_max + 1` vertices and values `< r` (`r` may be `INFINITY`).
///
/// # Safety
/// `metric` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vkit_complex_build(
    metric: *const VkitMetric,
    kind: VkitFiltration,
    r: f64,
    k_max: usize,
    out: *mut *mut VkitComplex,
) -> VkitStatus {
    guard(|| {
        non_null!(metric, out);
        if r.is_nan() {
            return fail(VkitStatus::InvalidArgument, "threshold is NaN");
        }
        let m = &(*metric).0;
        let k = match kind {
            VkitFiltration::VietorisRips => build_vr(m, r, k_max),
            VkitFiltration::Cech => build_cech(m, r, k_max),
        };
        *out = Box::into_raw(Box::new(VkitComplex(k)));
        VkitStatus::Ok
    })
}

/// Number of simplices of dimension `dim`, or of all dimensions when
/// `dim == SIZE_MAX`.
///
/// # Safety
/// `complex` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn vkit_complex_count(complex: *const VkitComplex, dim: usize) -> usize {
    complex.as_ref().map_or(0, |c| if dim == usize::MAX { c.0.len() } else { c.0.count_dim(dim) })
}

/// Betti number of the strict sublevel `{value < r}` in dimension `dim`.
///
/// # Safety
/// `complex` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vkit_betti_at(complex: *const VkitComplex, r: f64, dim: usize, out: *mut usize) -> VkitStatus {
    guard(|| {
        non_null!(complex, out);
        *out = betti_at(&(*complex).0, r, dim);
        VkitStatus::Ok
    })
}

/// # Safety
/// `complex` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vkit_complex_free(complex: *mut VkitComplex) {
    if !complex.is_null() {
        drop(Box::from_raw(complex));
    }
}

/// Persistence diagram in dimensions `0..=max_dim`.
///
/// # Safety
/// `complex` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vkit_diagram_compute(
    complex: *const VkitComplex,
    max_dim: usize,
    out: *mut *mut VkitDiagram,
) -> VkitStatus {
    guard(|| {
        non_null!(complex, out);
        match compute_diagram(&(*complex).0, max_dim) {
            Ok(d) => {
                *out = Box::into_raw(Box::new(VkitDiagram(d)));
                VkitStatus::Ok
            }
            Err(e) => fail(VkitStatus::SkeletonTooShallow, e.to_string()),
        }
    })
}

/// Number of intervals; 0 for a null handle.
///
/// # Safety
/// `diagram` must be null or live.
#[no_mangle]
pub unsafe extern "C" fn vkit_diagram_len(diagram: *const VkitDiagram) -> usize {
    diagram.as_ref().map_or(0, |d| d.0.len())
}

/// Interval `index` in canonical order (dimension, birth, death). Essential
/// classes have `death = INFINITY`.
///
/// # Safety
/// `diagram` must be live; out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn vkit_diagram_get(
    diagram: *const VkitDiagram,
    index: usize,
    dim: *mut usize,
    birth: *mut f64,
    death: *mut f64,
) -> VkitStatus {
    guard(|| {
        non_null!(diagram, dim, birth, death);
        let Some(iv) = (*diagram).0.intervals().get(index) else {
            return fail(VkitStatus::OutOfRange, format!("interval {index} out of range"));
        };
        *dim = iv.dim;
        *birth = iv.birth;
        *death = iv.death;
        VkitStatus::Ok
    })
}

/// Bottleneck distance (may be `INFINITY`).
///
/// # Safety
/// Both diagrams must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn vkit_diagram_distance(
    a: *const VkitDiagram,
    b: *const VkitDiagram,
    out: *mut f64,
) -> VkitStatus {
    guard(|| {
        non_null!(a, b, out);
        *out = diagram_distance(&(*a).0, &(*b).0);
        VkitStatus::Ok
    })
}

/// # Safety
/// `diagram` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vkit_diagram_free(diagram: *mut VkitDiagram) {
    if !diagram.is_null() {
        drop(Box::from_raw(diagram));
    }
}

/// `n! · pⁿ`, the number of top simplices of the Freudenthal–Kuhn
/// triangulation of `[0,1]ⁿ` at resolution `p`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vkit_fk_simplex_count(n: usize, p: usize, out: *mut usize) -> VkitStatus {
    guard(|| {
        non_null!(out);
        let tri = match FkTriangulation::new(n, p) {
            Ok(t) => t,
            Err(e) => return fail(VkitStatus::InvalidArgument, e.to_string()),
        };
        match tri.simplex_count() {
            Some(c) => {
                *out = c;
                VkitStatus::Ok
            }
            None => fail(VkitStatus::OutOfRange, "simplex count overflows"),
        }
    })
}

/// Locates `y ∈ [0,1]ⁿ`: writes the lattice base corner (`n` entries), the
/// axis order (`n` entries, 0-based) and barycentric coordinates
/// (`n + 1` entries).
///
/// # Safety
/// `y` must hold `n` doubles; `base` and `perm` `n` writable entries;
/// `bary` `n + 1` writable entries.
#[no_mangle]
pub unsafe extern "C" fn vkit_fk_locate(
    n: usize,
    p: usize,
    y: *const f64,
    base: *mut usize,
    perm: *mut usize,
    bary: *mut f64,
) -> VkitStatus {
    guard(|| {
        non_null!(y, base, perm, bary);
        let tri = match FkTriangulation::new(n, p) {
            Ok(t) => t,
            Err(e) => return fail(VkitStatus::InvalidArgument, e.to_string()),
        };
        match tri.locate(slice::from_raw_parts(y, n)) {
            Ok(loc) => {
                slice::from_raw_parts_mut(base, n).copy_from_slice(&loc.simplex.base);
                slice::from_raw_parts_mut(perm, n).copy_from_slice(&loc.simplex.perm);
                slice::from_raw_parts_mut(bary, n + 1).copy_from_slice(&loc.bary);
                VkitStatus::Ok
            }
            Err(e) => fail(VkitStatus::OutOfRange, e.to_string()),
        }
    })
}
