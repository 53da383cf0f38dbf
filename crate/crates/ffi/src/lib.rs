//! C ABI for `wsnloc`.
//!
//! Every fallible function returns a [`WsnStatus`]. On failure a message is
//! stored per thread and can be read with [`wsn_last_error_message`].
//! Objects cross the boundary as opaque handles that the caller releases
//! with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use wsnloc::experiments::{self, Method, MethodSettings, Scenario, ScenarioReport};
use wsnloc::network::Deployment;
use wsnloc::report::Summary;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WsnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidDeployment = 3,
    InvalidParams = 4,
    InvalidConfig = 5,
    NoEstimates = 6,
    Localization = 7,
    Panic = 8,
}

/// Localization methods, as accepted by the `method` arguments.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WsnMethod {
    Dvhop = 0,
    Pso = 1,
    Scapso = 2,
    Adapscapso = 3,
}

/// A node deployment.
pub struct WsnDeployment(Deployment);

/// Results of a Monte-Carlo scenario run.
pub struct WsnReport(ScenarioReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(WsnStatus, String);

impl From<wsnloc::Error> for Failure {
    fn from(e: wsnloc::Error) -> Self {
        use wsnloc::Error as E;
        let status = match e {
            E::InvalidDeployment(_) => WsnStatus::InvalidDeployment,
            E::InvalidParams(_) => WsnStatus::InvalidParams,
            E::Config(_) => WsnStatus::InvalidConfig,
            E::NoEstimates => WsnStatus::NoEstimates,
            _ => WsnStatus::Localization,
        };
        Failure(status, e.to_string())
    }
}

fn fail(status: WsnStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> WsnStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WsnStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            WsnStatus::Panic
        }
    }
}

fn method_from(raw: u32) -> Result<Method, Failure> {
    match raw {
        0 => Ok(Method::DvHop),
        1 => Ok(Method::Pso),
        2 => Ok(Method::Scapso),
        3 => Ok(Method::AdapScaPso),
        _ => Err(fail(WsnStatus::InvalidArgument, format!("unknown method {raw}"))),
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(WsnStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(WsnStatus::InvalidArgument, format!("{name} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| fail(WsnStatus::NullPointer, format!("{name} is null")))
}

fn out_arg<T>(p: *mut T, name: &str) -> Result<*mut T, Failure> {
    if p.is_null() {
        Err(fail(WsnStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(p)
    }
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn wsn_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn wsn_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Deploys `n_nodes` nodes uniformly over `width` x `height`, exactly as a
/// scenario run with the same run seed would.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wsn_deployment_generate(
    n_nodes: usize,
    anchor_ratio: f64,
    width: f64,
    height: f64,
    comm_range: f64,
    seed: u64,
    out: *mut *mut WsnDeployment,
) -> WsnStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let s = Scenario {
            name: "custom".into(),
            n_nodes,
            anchor_ratio,
            comm_range,
            area: (width, height),
            n_runs: 1,
            noise_sigma: 0.0,
        };
        s.validate()?;
        let d = s.deploy(seed)?;
        *out = Box::into_raw(Box::new(WsnDeployment(d)));
        Ok(())
    })
}

/// Parses and validates a deployment JSON document.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wsn_deployment_from_json(json: *const c_char, out: *mut *mut WsnDeployment) -> WsnStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let d = Deployment::from_json(str_arg(json, "json")?)?;
        *out = Box::into_raw(Box::new(WsnDeployment(d)));
        Ok(())
    })
}

/// Serializes a deployment. Free the result with [`wsn_string_free`].
///
/// # Safety
/// `d` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wsn_deployment_to_json(d: *const WsnDeployment, out: *mut *mut c_char) -> WsnStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let d = ref_arg(d, "deployment")?;
        let s = CString::new(d.0.to_json()).map_err(|e| fail(WsnStatus::Localization, e.to_string()))?;
        *out = s.into_raw();
        Ok(())
    })
}

/// Number of nodes, or 0 for NULL.
///
/// # Safety
/// `d` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn wsn_deployment_node_count(d: *const WsnDeployment) -> usize {
    d.as_ref().map_or(0, |d| d.0.nodes.len())
}

/// # Safety
/// `d` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wsn_deployment_free(d: *mut WsnDeployment) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Localizes the unknown nodes of `d` with one method and default
/// parameters. `est_x` and `est_y` must hold `len` == node count values;
/// entries of anchors and unlocalized nodes are set to NaN. The average
/// error over localized nodes goes to `avg_error` when it is not NULL.
///
/// # Safety
/// `d` must be a live handle; `est_x` and `est_y` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn wsn_localize(
    d: *const WsnDeployment,
    method: u32,
    seed: u64,
    est_x: *mut f64,
    est_y: *mut f64,
    len: usize,
    avg_error: *mut f64,
) -> WsnStatus {
    guard(|| {
        let d = &ref_arg(d, "deployment")?.0;
        let method = method_from(method)?;
        let (xs, ys) = (out_arg(est_x, "est_x")?, out_arg(est_y, "est_y")?);
        if len != d.nodes.len() {
            return Err(fail(
                WsnStatus::InvalidArgument,
                format!("len is {len}, deployment has {} nodes", d.nodes.len()),
            ));
        }
        let outcomes = experiments::run_methods(d, &[method], seed, &MethodSettings::default(), 0.0)?;
        let result = &outcomes[0].localization.result;
        let xs = std::slice::from_raw_parts_mut(xs, len);
        let ys = std::slice::from_raw_parts_mut(ys, len);
        for (i, n) in d.nodes.iter().enumerate() {
            let e = result.estimates.get(&n.id);
            xs[i] = e.map_or(f64::NAN, |p| p.x);
            ys[i] = e.map_or(f64::NAN, |p| p.y);
        }
        if !avg_error.is_null() {
            *avg_error = experiments::avg_error(result, d)?;
        }
        Ok(())
    })
}

/// Runs preset `scenario` ("s1" to "s4") for `n_runs` runs with all four
/// methods and default parameters.
///
/// # Safety
/// `scenario` must be a nul-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wsn_run_scenario(
    scenario: *const c_char,
    n_runs: usize,
    master_seed: u64,
    out: *mut *mut WsnReport,
) -> WsnStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let name = str_arg(scenario, "scenario")?;
        let s = Scenario::by_name(name)
            .ok_or_else(|| fail(WsnStatus::InvalidConfig, format!("unknown scenario `{name}`")))?
            .with_runs(n_runs);
        let rep = experiments::run_scenario(&s, &Method::ALL, master_seed, &MethodSettings::default())?;
        *out = Box::into_raw(Box::new(WsnReport(rep)));
        Ok(())
    })
}

/// Mean over runs of a method's average localization error, in meters.
///
/// # Safety
/// `r` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wsn_report_mean_error(r: *const WsnReport, method: u32, out: *mut f64) -> WsnStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let r = ref_arg(r, "report")?;
        let m = method_from(method)?;
        *out = r.0.mean_error(m).ok_or_else(|| fail(WsnStatus::NoEstimates, format!("no error values for {m}")))?;
        Ok(())
    })
}

/// Summary JSON with per-method statistics and error reductions. Free the
/// result with [`wsn_string_free`].
///
/// # Safety
/// `r` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn wsn_report_summary_json(r: *const WsnReport, out: *mut *mut c_char) -> WsnStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let r = ref_arg(r, "report")?;
        let json = Summary::new(std::slice::from_ref(&r.0))?.to_json();
        *out = CString::new(json).map_err(|e| fail(WsnStatus::Localization, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `r` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wsn_report_free(r: *mut WsnReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}
