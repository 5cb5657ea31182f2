//! C interface to `graph_hardy`.
//!
//! Graphs live behind an opaque [`HgGraph`] handle. Every fallible call returns
//! an [`HgStatus`]; on failure [`hg_last_error`] holds a message for the
//! calling thread. Vertex functions are `double` arrays of length
//! `hg_graph_vertex_count`, edge functions are arrays over the directed edge
//! slots reported by [`hg_graph_edges`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use graph_hardy::calculus::Calculus;
use graph_hardy::geometry::{geometry_report, DEFAULT_EXHAUSTIVE_LIMIT};
use graph_hardy::hardy_bmo::{bmo_norm, molecular_decompose, BmoKind, TuplePolicy};
use graph_hardy::operators::{apply_p, differential, gradient, laplacian, p_diagonal};
use graph_hardy::quadratic::{default_l_max, lusin};
use graph_hardy::riesz::riesz;
use graph_hardy::{zoo, Error, VertexFunction, WeightedGraph};

const LEVEL_CAP: usize = 100_000;

/// Opaque graph handle.
pub struct HgGraph {
    inner: WeightedGraph,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Disconnected, negative or asymmetric weights, zero measure, empty.
    InvalidGraph = 3,
    DimensionMismatch = 4,
    /// Input has a component on the constants.
    KernelComponent = 5,
    NonConvergent = 6,
    ValidationFailed = 7,
    Io = 8,
    Parse = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HgBmoKind {
    Bz1 = 1,
    Bz2 = 2,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> HgStatus {
    match e {
        Error::DisconnectedGraph { .. }
        | Error::NegativeWeight { .. }
        | Error::AsymmetricWeight { .. }
        | Error::ZeroMeasureVertex(_)
        | Error::EmptyGraph => HgStatus::InvalidGraph,
        Error::DimensionMismatch { .. } => HgStatus::DimensionMismatch,
        Error::KernelComponent { .. } => HgStatus::KernelComponent,
        Error::NonConvergent { .. } => HgStatus::NonConvergent,
        Error::FactorizationMismatch(_)
        | Error::SizeBoundViolated { .. }
        | Error::ValidationFailed(_)
        | Error::NotExactForm(_) => HgStatus::ValidationFailed,
        Error::Io(_) => HgStatus::Io,
        Error::Parse { .. } | Error::Json(_) => HgStatus::Parse,
        Error::BadTuple { .. } | Error::OverlappingSets | Error::InvalidArgument(_) => HgStatus::InvalidArgument,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(body: impl FnOnce() -> Result<(), Fail>) -> HgStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => HgStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            HgStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            HgStatus::Panic
        }
    }
}

unsafe fn graph_ref<'a>(g: *const HgGraph) -> Result<&'a WeightedGraph, Fail> {
    g.as_ref().map(|h| &h.inner).ok_or(Fail::Null("graph"))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &'static str) -> Result<&'a mut [T], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn c_str<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Lib(Error::InvalidArgument(format!("{what} is not valid UTF-8"))))
}

fn check_len(expected: usize, got: usize) -> Result<(), Fail> {
    if expected == got {
        Ok(())
    } else {
        Err(Fail::Lib(Error::DimensionMismatch { expected, got }))
    }
}

unsafe fn input(g: &WeightedGraph, f: *const f64, len: usize) -> Result<VertexFunction, Fail> {
    check_len(g.n(), len)?;
    Ok(slice(f, len, "f")?.to_vec().into())
}

unsafe fn write_out<T: Copy>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null("out"));
    }
    *out = value;
    Ok(())
}

unsafe fn write_vertex(g: &WeightedGraph, out: *mut f64, len: usize, v: &[f64]) -> Result<(), Fail> {
    check_len(g.n(), len)?;
    slice_mut(out, len, "out")?.copy_from_slice(v);
    Ok(())
}

unsafe fn write_graph(out: *mut *mut HgGraph, g: WeightedGraph) -> Result<(), Fail> {
    write_out(out, Box::into_raw(Box::new(HgGraph { inner: g })))
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a graph from `count` undirected edges `(xs[i], ys[i], ws[i])`.
/// `xs[i] == ys[i]` is a loop.
///
/// # Safety
/// The three arrays must hold `count` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hg_graph_from_edges(
    xs: *const usize,
    ys: *const usize,
    ws: *const f64,
    count: usize,
    out: *mut *mut HgGraph,
) -> HgStatus {
    guard(|| {
        let xs = slice(xs, count, "xs")?;
        let ys = slice(ys, count, "ys")?;
        let ws = slice(ws, count, "ws")?;
        let edges: Vec<_> = (0..count).map(|i| (xs[i], ys[i], ws[i])).collect();
        write_graph(out, WeightedGraph::from_edges(&edges)?)
    })
}

/// Loads an edge-list or JSON graph file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hg_graph_from_file(path: *const c_char, out: *mut *mut HgGraph) -> HgStatus {
    guard(|| {
        let path = c_str(path, "path")?;
        write_graph(out, WeightedGraph::load(Path::new(path))?)
    })
}

/// Builds a named graph, e.g. `k2l`, `lazy_cycle_16`, `lazy_torus_32~1`.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hg_graph_from_zoo(name: *const c_char, out: *mut *mut HgGraph) -> HgStatus {
    guard(|| {
        let name = c_str(name, "name")?;
        write_graph(out, zoo::by_name(name)?)
    })
}

/// # Safety
/// `g` must come from one of the constructors and not be freed twice. NULL is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn hg_graph_free(g: *mut HgGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// # Safety
/// `g` must be a live handle or NULL (returns 0).
#[no_mangle]
pub unsafe extern "C" fn hg_graph_vertex_count(g: *const HgGraph) -> usize {
    g.as_ref().map_or(0, |h| h.inner.n())
}

/// Number of directed edge slots (each undirected edge twice, loops once).
///
/// # Safety
/// `g` must be a live handle or NULL (returns 0).
#[no_mangle]
pub unsafe extern "C" fn hg_graph_edge_slot_count(g: *const HgGraph) -> usize {
    g.as_ref().map_or(0, |h| h.inner.edge_count())
}

/// Directed edge slots in the order used by edge functions.
///
/// # Safety
/// Each output array must hold `len = hg_graph_edge_slot_count(g)` elements.
#[no_mangle]
pub unsafe extern "C" fn hg_graph_edges(
    g: *const HgGraph,
    xs: *mut usize,
    ys: *mut usize,
    ws: *mut f64,
    len: usize,
) -> HgStatus {
    guard(|| {
        let g = graph_ref(g)?;
        check_len(g.edge_count(), len)?;
        let (xs, ys, ws) = (slice_mut(xs, len, "xs")?, slice_mut(ys, len, "ys")?, slice_mut(ws, len, "ws")?);
        for x in 0..g.n() {
            for e in g.edge_range(x) {
                xs[e] = x;
                ys[e] = g.edge_target(e);
                ws[e] = g.edge_weight(e);
            }
        }
        Ok(())
    })
}

/// Vertex measure `m(x) = Σ_y μ_xy`.
///
/// # Safety
/// `out` must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn hg_measure(g: *const HgGraph, out: *mut f64, len: usize) -> HgStatus {
    guard(|| {
        let g = graph_ref(g)?;
        write_vertex(g, out, len, g.measure())
    })
}

macro_rules! vertex_op {
    ($(#[$doc:meta])* $name:ident, $op:path) => {
        $(#[$doc])*
        ///
        /// # Safety
        /// `f` and `out` must hold `len` elements.
        #[no_mangle]
        pub unsafe extern "C" fn $name(g: *const HgGraph, f: *const f64, out: *mut f64, len: usize) -> HgStatus {
            guard(|| {
                let g = graph_ref(g)?;
                let f = input(g, f, len)?;
                write_vertex(g, out, len, &$op(g, &f))
            })
        }
    };
}

vertex_op!(
    /// `P f`.
    hg_apply_p, apply_p
);
vertex_op!(
    /// `Δ f = f − P f`.
    hg_laplacian, laplacian
);
vertex_op!(
    /// `|∇f|(x) = (½ Σ_y p(x,y) |f(x) − f(y)|²)^{1/2}`.
    hg_gradient, gradient
);

/// `df` over the edge slots.
///
/// # Safety
/// `f` must hold `len` elements and `out` `out_len = hg_graph_edge_slot_count(g)`.
#[no_mangle]
pub unsafe extern "C" fn hg_differential(
    g: *const HgGraph,
    f: *const f64,
    len: usize,
    out: *mut f64,
    out_len: usize,
) -> HgStatus {
    guard(|| {
        let g = graph_ref(g)?;
        let f = input(g, f, len)?;
        check_len(g.edge_count(), out_len)?;
        slice_mut(out, out_len, "out")?.copy_from_slice(&differential(g, &f));
        Ok(())
    })
}

/// Lusin square function `L_β f` into `out` (may be NULL) and its L¹ norm
/// into `norm`. `l_max = 0` picks the level count from `tol`.
///
/// # Safety
/// `f` (and `out` when non-NULL) must hold `len` elements; `norm` writable.
#[no_mangle]
pub unsafe extern "C" fn hg_quadnorm(
    g: *const HgGraph,
    f: *const f64,
    len: usize,
    beta: f64,
    l_max: usize,
    tol: f64,
    out: *mut f64,
    norm: *mut f64,
) -> HgStatus {
    guard(|| {
        let g = graph_ref(g)?;
        let f = input(g, f, len)?;
        let cal = Calculus::new(g, tol);
        let l_max = if l_max == 0 { default_l_max(&cal, beta, tol, LEVEL_CAP) } else { l_max };
        let sq = lusin(&cal, &f, beta, l_max)?;
        if !out.is_null() {
            write_vertex(g, out, len, &sq.values)?;
        }
        write_out(norm, sq.l1_norm(g))
    })
}

/// Riesz transform of a mean-zero `f`: `|∇Δ^{-1/2} f|` into `out` (may be
/// NULL) and its L¹ norm into `l1`.
///
/// # Safety
/// `f` (and `out` when non-NULL) must hold `len` elements; `l1` writable.
#[no_mangle]
pub unsafe extern "C" fn hg_riesz(
    g: *const HgGraph,
    f: *const f64,
    len: usize,
    tol: f64,
    out: *mut f64,
    l1: *mut f64,
) -> HgStatus {
    guard(|| {
        let g = graph_ref(g)?;
        let f = input(g, f, len)?;
        let cal = Calculus::new(g, tol);
        let r = riesz(&cal, &f, None)?;
        if !out.is_null() {
            write_vertex(g, out, len, &r.gradient_form)?;
        }
        write_out(l1, r.norms.gradient_l1)
    })
}

/// BMO norm over `s ∈ [1, s_max]`.
///
/// # Safety
/// `f` must hold `len` elements; `value` writable.
#[no_mangle]
pub unsafe extern "C" fn hg_bmo(
    g: *const HgGraph,
    f: *const f64,
    len: usize,
    kind: HgBmoKind,
    m: usize,
    s_max: usize,
    seed: u64,
    value: *mut f64,
) -> HgStatus {
    guard(|| {
        let g = graph_ref(g)?;
        let f = input(g, f, len)?;
        let cal = Calculus::new(g, 1e-12);
        let kind = match kind {
            HgBmoKind::Bz1 => BmoKind::Bz1 { m },
            HgBmoKind::Bz2 => BmoKind::Bz2 { m },
        };
        let policy = TuplePolicy { seed, ..TuplePolicy::default() };
        write_out(value, bmo_norm(&cal, &f, kind, s_max, &policy)?.value)
    })
}

/// Molecular decomposition of a mean-zero `f`, as a JSON string to be
/// released with [`hg_string_free`].
///
/// # Safety
/// `f` must hold `len` elements; `json` writable.
#[no_mangle]
pub unsafe extern "C" fn hg_decompose_json(
    g: *const HgGraph,
    f: *const f64,
    len: usize,
    m: usize,
    beta: f64,
    eps: f64,
    tol: f64,
    json: *mut *mut c_char,
) -> HgStatus {
    guard(|| {
        let g = graph_ref(g)?;
        let f = input(g, f, len)?;
        let d0 = geometry_report(g, &p_diagonal(g), DEFAULT_EXHAUSTIVE_LIMIT).d0_estimate;
        let cal = Calculus::new(g, 1e-13);
        let d = molecular_decompose(&cal, &f, m, beta, eps, d0, tol)?;
        let text = CString::new(d.to_json(g)).expect("json has no NUL");
        write_out(json, text.into_raw())
    })
}

/// # Safety
/// `s` must come from this library, or be NULL.
#[no_mangle]
pub unsafe extern "C" fn hg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
