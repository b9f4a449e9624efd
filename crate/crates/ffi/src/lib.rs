//! C interface to the sgl library.
//!
//! Instances travel as opaque handles created by the `sgl_instance_*`
//! constructors and released with [`sgl_instance_free`]. Structured results
//! cross the boundary as UTF-8 JSON strings allocated by Rust and released
//! with [`sgl_string_free`]. Every function returns an [`SglStatus`]; after
//! any non-`Ok` status, [`sgl_last_error`] returns a message describing the
//! failure on the current thread. Panics never unwind across the boundary.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use sgl::{
    bound_fixed_point, bound_grid_search, brute_force_opt, builtin_instance, exact_expected_values,
    instance_from_json, monte_carlo_expected_values, random_order_greedy, read_instance,
    verify_properties, EnumCaps, Instance, PermutationSource, SglError, TieBreakPolicy, VerifyMode,
};

/// Result of every call in this interface.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SglStatus {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The library rejected the request; see `sgl_last_error`.
    DomainError = 3,
    /// An internal panic was caught; see `sgl_last_error`.
    Panic = 4,
}

/// An immutable problem instance: a partition matroid plus a value oracle.
pub struct SglInstance {
    inner: Instance,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<Vec<u8>>) {
    let message = CString::new(message).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message);
}

fn domain(e: SglError) -> SglStatus {
    set_error(format!("{}: {e}", e.kind()));
    SglStatus::DomainError
}

fn guard(f: impl FnOnce() -> SglStatus) -> SglStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            SglStatus::Panic
        }
    }
}

/// # Safety
/// `s` must be null or a NUL-terminated string valid for reads.
unsafe fn utf8_arg<'a>(s: *const c_char) -> Result<&'a str, SglStatus> {
    if s.is_null() {
        set_error("null string argument");
        return Err(SglStatus::NullArgument);
    }
    unsafe { CStr::from_ptr(s) }.to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        SglStatus::InvalidUtf8
    })
}

/// # Safety
/// `inst` must be null or a live handle from an `sgl_instance_*` constructor.
unsafe fn instance_arg<'a>(inst: *const SglInstance) -> Result<&'a Instance, SglStatus> {
    if inst.is_null() {
        set_error("null instance handle");
        return Err(SglStatus::NullArgument);
    }
    Ok(unsafe { &(*inst).inner })
}

fn export_instance(instance: Instance, out: *mut *mut SglInstance) -> SglStatus {
    if out.is_null() {
        set_error("null output pointer");
        return SglStatus::NullArgument;
    }
    let handle = Box::new(SglInstance { inner: instance });
    unsafe { *out = Box::into_raw(handle) };
    SglStatus::Ok
}

fn export_string(text: String, out: *mut *mut c_char) -> SglStatus {
    if out.is_null() {
        set_error("null output pointer");
        return SglStatus::NullArgument;
    }
    match CString::new(text) {
        Ok(s) => {
            unsafe { *out = s.into_raw() };
            SglStatus::Ok
        }
        Err(_) => {
            set_error("result contained an interior NUL byte");
            SglStatus::Panic
        }
    }
}

fn parse_tie(spec: &str) -> Result<TieBreakPolicy, SglStatus> {
    TieBreakPolicy::parse_spec(spec).map_err(domain)
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread; never free it.
#[no_mangle]
pub extern "C" fn sgl_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Loads a builtin instance; `name` is `"7-12"` or `"19-33"`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer. On `Ok`
/// the caller owns the handle written to `*out` and must release it with
/// [`sgl_instance_free`].
#[no_mangle]
pub unsafe extern "C" fn sgl_instance_builtin(
    name: *const c_char,
    out: *mut *mut SglInstance,
) -> SglStatus {
    guard(|| {
        let name = match unsafe { utf8_arg(name) } {
            Ok(s) => s,
            Err(status) => return status,
        };
        match builtin_instance(name) {
            Some(instance) => export_instance(instance, out),
            None => {
                set_error(format!("unknown builtin instance `{name}`"));
                SglStatus::DomainError
            }
        }
    })
}

/// Parses an instance document (weighted-coverage or swm-coverage JSON);
/// SWM documents are reduced on load. `name` labels errors and names the
/// reduction.
///
/// # Safety
/// `json` and `name` must be NUL-terminated strings and `out` a valid
/// pointer. On `Ok` the caller owns `*out`.
#[no_mangle]
pub unsafe extern "C" fn sgl_instance_from_json(
    json: *const c_char,
    name: *const c_char,
    out: *mut *mut SglInstance,
) -> SglStatus {
    guard(|| {
        let json = match unsafe { utf8_arg(json) } {
            Ok(s) => s,
            Err(status) => return status,
        };
        let name = match unsafe { utf8_arg(name) } {
            Ok(s) => s,
            Err(status) => return status,
        };
        match instance_from_json(json, name) {
            Ok(instance) => export_instance(instance, out),
            Err(e) => domain(e),
        }
    })
}

/// Loads an instance document from a file path.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer. On `Ok`
/// the caller owns `*out`.
#[no_mangle]
pub unsafe extern "C" fn sgl_instance_from_file(
    path: *const c_char,
    out: *mut *mut SglInstance,
) -> SglStatus {
    guard(|| {
        let path = match unsafe { utf8_arg(path) } {
            Ok(s) => s,
            Err(status) => return status,
        };
        match read_instance(path) {
            Ok(instance) => export_instance(instance, out),
            Err(e) => domain(e),
        }
    })
}

/// Releases an instance handle. Null is a no-op.
///
/// # Safety
/// `inst` must be null or a handle from an `sgl_instance_*` constructor that
/// has not been freed; it is invalid after this call.
#[no_mangle]
pub unsafe extern "C" fn sgl_instance_free(inst: *mut SglInstance) {
    if !inst.is_null() {
        drop(unsafe { Box::from_raw(inst) });
    }
}

/// Number of ground-set elements.
///
/// # Safety
/// `inst` must be a live handle and `out_size` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sgl_instance_ground_size(
    inst: *const SglInstance,
    out_size: *mut usize,
) -> SglStatus {
    guard(|| {
        let instance = match unsafe { instance_arg(inst) } {
            Ok(i) => i,
            Err(status) => return status,
        };
        if out_size.is_null() {
            set_error("null output pointer");
            return SglStatus::NullArgument;
        }
        unsafe { *out_size = instance.matroid().ground().len() };
        SglStatus::Ok
    })
}

/// Number of matroid parts (the m of the arrival process).
///
/// # Safety
/// `inst` must be a live handle and `out_parts` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sgl_instance_num_parts(
    inst: *const SglInstance,
    out_parts: *mut usize,
) -> SglStatus {
    guard(|| {
        let instance = match unsafe { instance_arg(inst) } {
            Ok(i) => i,
            Err(status) => return status,
        };
        if out_parts.is_null() {
            set_error("null output pointer");
            return SglStatus::NullArgument;
        }
        unsafe { *out_parts = instance.matroid().m() };
        SglStatus::Ok
    })
}

fn solve_common(
    instance: &Instance,
    source: &PermutationSource,
    tie_spec: &str,
    out_json: *mut *mut c_char,
) -> SglStatus {
    let policy = match parse_tie(tie_spec) {
        Ok(p) => p,
        Err(status) => return status,
    };
    match random_order_greedy(instance, source, &policy) {
        Ok(trace) => export_string(
            serde_json::to_string(&trace).expect("serializable trace"),
            out_json,
        ),
        Err(e) => domain(e),
    }
}

/// One greedy run under the uniformly random arrival order drawn from
/// `seed`. Writes the full trace as JSON (permutation, per-step options,
/// final set and value).
///
/// # Safety
/// `inst` must be a live handle, `tie_spec` a NUL-terminated string (e.g.
/// `"first-name"`), and `out_json` a valid pointer. On `Ok` the caller owns
/// `*out_json` and must release it with [`sgl_string_free`].
#[no_mangle]
pub unsafe extern "C" fn sgl_solve_json(
    inst: *const SglInstance,
    seed: u64,
    tie_spec: *const c_char,
    out_json: *mut *mut c_char,
) -> SglStatus {
    guard(|| {
        let instance = match unsafe { instance_arg(inst) } {
            Ok(i) => i,
            Err(status) => return status,
        };
        let tie_spec = match unsafe { utf8_arg(tie_spec) } {
            Ok(s) => s,
            Err(status) => return status,
        };
        solve_common(
            instance,
            &PermutationSource::Uniform { seed },
            tie_spec,
            out_json,
        )
    })
}

/// One greedy run under an explicit arrival order: `order` lists every part
/// index (0-based) exactly once.
///
/// # Safety
/// `inst` must be a live handle, `order` valid for `order_len` reads,
/// `tie_spec` a NUL-terminated string, `out_json` a valid pointer. On `Ok`
/// the caller owns `*out_json`.
#[no_mangle]
pub unsafe extern "C" fn sgl_solve_order_json(
    inst: *const SglInstance,
    order: *const usize,
    order_len: usize,
    tie_spec: *const c_char,
    out_json: *mut *mut c_char,
) -> SglStatus {
    guard(|| {
        let instance = match unsafe { instance_arg(inst) } {
            Ok(i) => i,
            Err(status) => return status,
        };
        let tie_spec = match unsafe { utf8_arg(tie_spec) } {
            Ok(s) => s,
            Err(status) => return status,
        };
        if order.is_null() {
            set_error("null order pointer");
            return SglStatus::NullArgument;
        }
        let order = unsafe { std::slice::from_raw_parts(order, order_len) }.to_vec();
        solve_common(
            instance,
            &PermutationSource::Explicit(order),
            tie_spec,
            out_json,
        )
    })
}

/// Brute-force optimum over all bases, as JSON
/// `{"opt_set": [...], "opt_value": v, "bases": "count"}`.
///
/// # Safety
/// `inst` must be a live handle and `out_json` a valid pointer. On `Ok` the
/// caller owns `*out_json`.
#[no_mangle]
pub unsafe extern "C" fn sgl_opt_json(
    inst: *const SglInstance,
    out_json: *mut *mut c_char,
) -> SglStatus {
    guard(|| {
        let instance = match unsafe { instance_arg(inst) } {
            Ok(i) => i,
            Err(status) => return status,
        };
        match brute_force_opt(instance, &EnumCaps::default()) {
            Ok((set, value)) => {
                let mut names: Vec<String> = set
                    .names(instance.matroid().ground())
                    .iter()
                    .map(|s| s.to_string())
                    .collect();
                names.sort_unstable();
                let doc = serde_json::json!({
                    "opt_set": names,
                    "opt_value": value,
                    "bases": instance.matroid().base_count().to_string(),
                });
                export_string(doc.to_string(), out_json)
            }
            Err(e) => domain(e),
        }
    })
}

/// Expected greedy value over all m! arrival orders, as a JSON report with
/// per-step means, the optimum, the ratio and its exact fraction.
///
/// # Safety
/// `inst` must be a live handle, `tie_spec` a NUL-terminated string, and
/// `out_json` a valid pointer. On `Ok` the caller owns `*out_json`.
#[no_mangle]
pub unsafe extern "C" fn sgl_ratio_exact_json(
    inst: *const SglInstance,
    tie_spec: *const c_char,
    out_json: *mut *mut c_char,
) -> SglStatus {
    guard(|| {
        let instance = match unsafe { instance_arg(inst) } {
            Ok(i) => i,
            Err(status) => return status,
        };
        let tie_spec = match unsafe { utf8_arg(tie_spec) } {
            Ok(s) => s,
            Err(status) => return status,
        };
        let policy = match parse_tie(tie_spec) {
            Ok(p) => p,
            Err(status) => return status,
        };
        match exact_expected_values(instance, &policy, &EnumCaps::default()) {
            Ok(report) => export_string(
                serde_json::to_string(&report).expect("serializable report"),
                out_json,
            ),
            Err(e) => domain(e),
        }
    })
}

/// Monte Carlo estimate of the expected greedy value over `trials` seeded
/// random orders; the result does not depend on thread count.
///
/// # Safety
/// `inst` must be a live handle, `tie_spec` a NUL-terminated string, and
/// `out_json` a valid pointer. On `Ok` the caller owns `*out_json`.
#[no_mangle]
pub unsafe extern "C" fn sgl_ratio_monte_carlo_json(
    inst: *const SglInstance,
    trials: u64,
    seed: u64,
    tie_spec: *const c_char,
    out_json: *mut *mut c_char,
) -> SglStatus {
    guard(|| {
        let instance = match unsafe { instance_arg(inst) } {
            Ok(i) => i,
            Err(status) => return status,
        };
        let tie_spec = match unsafe { utf8_arg(tie_spec) } {
            Ok(s) => s,
            Err(status) => return status,
        };
        let policy = match parse_tie(tie_spec) {
            Ok(p) => p,
            Err(status) => return status,
        };
        match monte_carlo_expected_values(instance, trials, seed, &policy, &EnumCaps::default()) {
            Ok(report) => export_string(
                serde_json::to_string(&report).expect("serializable report"),
                out_json,
            ),
            Err(e) => domain(e),
        }
    })
}

fn verify_common(instance: &Instance, mode: VerifyMode, out_json: *mut *mut c_char) -> SglStatus {
    match verify_properties(instance.oracle(), mode) {
        Ok(report) => export_string(
            serde_json::to_string(&report).expect("serializable report"),
            out_json,
        ),
        Err(e) => domain(e),
    }
}

/// Checks non-negativity, monotonicity, submodularity and the derived
/// marginal inequalities over every subset; rejects ground sets larger than
/// `max_elements`. The JSON report lists violations with witnesses.
///
/// # Safety
/// `inst` must be a live handle and `out_json` a valid pointer. On `Ok` the
/// caller owns `*out_json`.
#[no_mangle]
pub unsafe extern "C" fn sgl_verify_exhaustive_json(
    inst: *const SglInstance,
    max_elements: usize,
    out_json: *mut *mut c_char,
) -> SglStatus {
    guard(|| {
        let instance = match unsafe { instance_arg(inst) } {
            Ok(i) => i,
            Err(status) => return status,
        };
        verify_common(instance, VerifyMode::Exhaustive { max_elements }, out_json)
    })
}

/// Sampled variant of the property check, including the random-subset
/// sampling lower bound.
///
/// # Safety
/// `inst` must be a live handle and `out_json` a valid pointer. On `Ok` the
/// caller owns `*out_json`.
#[no_mangle]
pub unsafe extern "C" fn sgl_verify_sampled_json(
    inst: *const SglInstance,
    trials: u64,
    seed: u64,
    out_json: *mut *mut c_char,
) -> SglStatus {
    guard(|| {
        let instance = match unsafe { instance_arg(inst) } {
            Ok(i) => i,
            Err(status) => return status,
        };
        verify_common(instance, VerifyMode::Sampled { trials, seed }, out_json)
    })
}

/// Solves the ratio-bound quadratic at `(p, q)` and writes the root to
/// `*out_c`; p in [0, 1] (0 meaning the limit), q in (0, 1).
///
/// # Safety
/// `out_c` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sgl_bound_fixed_point(p: f64, q: f64, out_c: *mut f64) -> SglStatus {
    guard(|| {
        if out_c.is_null() {
            set_error("null output pointer");
            return SglStatus::NullArgument;
        }
        match bound_fixed_point(p, q) {
            Ok(solution) => {
                unsafe { *out_c = solution.c };
                SglStatus::Ok
            }
            Err(e) => domain(e),
        }
    })
}

/// Maximizes the fixed-point root over the grid `{1/res, ..., (res-1)/res}²`
/// and writes the best parameters and root.
///
/// # Safety
/// `out_p`, `out_q` and `out_c` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sgl_bound_grid_search(
    resolution: usize,
    out_p: *mut f64,
    out_q: *mut f64,
    out_c: *mut f64,
) -> SglStatus {
    guard(|| {
        if out_p.is_null() || out_q.is_null() || out_c.is_null() {
            set_error("null output pointer");
            return SglStatus::NullArgument;
        }
        match bound_grid_search(resolution) {
            Ok(solution) => {
                unsafe {
                    *out_p = solution.p;
                    *out_q = solution.q;
                    *out_c = solution.c;
                }
                SglStatus::Ok
            }
            Err(e) => domain(e),
        }
    })
}

/// Releases a string returned by this interface. Null is a no-op.
///
/// # Safety
/// `s` must be null or a string returned by this interface that has not been
/// freed; it is invalid after this call.
#[no_mangle]
pub unsafe extern "C" fn sgl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    fn cstr(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    fn last_error() -> String {
        unsafe { CStr::from_ptr(sgl_last_error()) }
            .to_string_lossy()
            .into_owned()
    }

    fn builtin(name: &str) -> *mut SglInstance {
        let mut handle = ptr::null_mut();
        let status = unsafe { sgl_instance_builtin(cstr(name).as_ptr(), &mut handle) };
        assert_eq!(status, SglStatus::Ok);
        handle
    }

    fn take_string(s: *mut c_char) -> String {
        let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
        unsafe { sgl_string_free(s) };
        text
    }

    #[test]
    fn builtin_solve_and_opt_round_trip() {
        let handle = builtin("7-12");

        let mut n = 0usize;
        let mut m = 0usize;
        unsafe {
            assert_eq!(sgl_instance_ground_size(handle, &mut n), SglStatus::Ok);
            assert_eq!(sgl_instance_num_parts(handle, &mut m), SglStatus::Ok);
        }
        assert_eq!((n, m), (12, 3));

        let order = [0usize, 1, 2];
        let mut out = ptr::null_mut();
        let status = unsafe {
            sgl_solve_order_json(
                handle,
                order.as_ptr(),
                order.len(),
                cstr("last-index").as_ptr(),
                &mut out,
            )
        };
        assert_eq!(status, SglStatus::Ok);
        let trace: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
        assert_eq!(trace["final_value"], 7.0);
        assert_eq!(trace["final_set"][0], "x2");

        let mut out = ptr::null_mut();
        assert_eq!(unsafe { sgl_opt_json(handle, &mut out) }, SglStatus::Ok);
        let opt: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
        assert_eq!(opt["opt_value"], 12.0);
        assert_eq!(opt["bases"], "64");

        unsafe { sgl_instance_free(handle) };
    }

    #[test]
    fn ratio_reports_exact_fraction() {
        let handle = builtin("19-33");
        let mut out = ptr::null_mut();
        let status =
            unsafe { sgl_ratio_exact_json(handle, cstr("priority:x,z,y,o").as_ptr(), &mut out) };
        assert_eq!(status, SglStatus::Ok);
        let report: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
        assert_eq!(report["expected_final"], 152.0);
        assert_eq!(report["ratio_fraction"][0], 19);
        assert_eq!(report["ratio_fraction"][1], 33);

        let mut out = ptr::null_mut();
        let status = unsafe {
            sgl_ratio_monte_carlo_json(handle, 256, 0, cstr("first-name").as_ptr(), &mut out)
        };
        assert_eq!(status, SglStatus::Ok);
        let report: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
        assert_eq!(report["mode"]["kind"], "monte-carlo");

        unsafe { sgl_instance_free(handle) };
    }

    #[test]
    fn json_constructor_and_verify() {
        let doc = r#"{
            "kind": "weighted-coverage",
            "name": "tiny",
            "universe": {"p": 2.0},
            "parts": [{"name": "P", "elements": {"e": ["p"], "f": []}}]
        }"#;
        let mut handle = ptr::null_mut();
        let status = unsafe {
            sgl_instance_from_json(cstr(doc).as_ptr(), cstr("tiny").as_ptr(), &mut handle)
        };
        assert_eq!(status, SglStatus::Ok);

        let mut out = ptr::null_mut();
        let status = unsafe { sgl_verify_exhaustive_json(handle, 16, &mut out) };
        assert_eq!(status, SglStatus::Ok);
        let report: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
        assert_eq!(report["violations_total"], 0);

        unsafe { sgl_instance_free(handle) };
    }

    #[test]
    fn bound_functions_write_roots() {
        let mut c = 0.0;
        assert_eq!(
            unsafe { sgl_bound_fixed_point(0.4, 0.4, &mut c) },
            SglStatus::Ok
        );
        assert!((c - 0.5096192848064404).abs() < 1e-15);

        let (mut p, mut q, mut best) = (0.0, 0.0, 0.0);
        assert_eq!(
            unsafe { sgl_bound_grid_search(20, &mut p, &mut q, &mut best) },
            SglStatus::Ok
        );
        assert_eq!((p, q), (0.4, 0.4));

        assert_eq!(
            unsafe { sgl_bound_fixed_point(1.5, 0.4, &mut c) },
            SglStatus::DomainError
        );
        assert!(last_error().starts_with("OutOfRange:"), "{}", last_error());
    }

    #[test]
    fn errors_and_null_handling() {
        let mut handle = ptr::null_mut();
        let status = unsafe { sgl_instance_builtin(cstr("unknown").as_ptr(), &mut handle) };
        assert_eq!(status, SglStatus::DomainError);
        assert!(last_error().contains("unknown builtin"), "{}", last_error());

        let status = unsafe { sgl_instance_builtin(ptr::null(), &mut handle) };
        assert_eq!(status, SglStatus::NullArgument);

        let bad = [0x66u8, 0xFF, 0x00];
        let status = unsafe { sgl_instance_builtin(bad.as_ptr() as *const c_char, &mut handle) };
        assert_eq!(status, SglStatus::InvalidUtf8);

        let status =
            unsafe { sgl_instance_from_json(cstr("{}").as_ptr(), cstr("x").as_ptr(), &mut handle) };
        assert_eq!(status, SglStatus::DomainError);
        assert!(last_error().starts_with("ParseError:"), "{}", last_error());

        let mut out = ptr::null_mut();
        assert_eq!(
            unsafe { sgl_opt_json(ptr::null(), &mut out) },
            SglStatus::NullArgument
        );

        unsafe {
            sgl_instance_free(ptr::null_mut());
            sgl_string_free(ptr::null_mut());
        }
    }
}
