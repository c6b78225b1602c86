//! C ABI for the tandem metaheuristics library.
//!
//! Problems are opaque handles created from instance files or text and freed
//! with [`tandem_problem_free`]. All functions return a [`TandemStatus`];
//! on failure, [`tandem_last_error`] yields a thread-local message.
//!
//! The generated header lives at `include/tandem.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};

use tandem::driver::{run_algorithm, AlgorithmSpec, LoadedProblem, ProblemKind};
use tandem::{CompositeProblem, CoreError, StopCondition};

/// Result of every fallible call in this API.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TandemStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// A parameter was out of range or named an unknown entity.
    InvalidArgument = 3,
    /// The instance file or text did not parse.
    ParseError = 4,
    /// The solver failed at runtime.
    RuntimeError = 5,
}

/// Summary of one seeded run.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct TandemRunStats {
    pub best_value: f64,
    pub evaluations: u64,
    pub iterations: u64,
    pub wall_ms: u64,
    pub seed: u64,
}

/// Opaque problem handle: a parsed instance plus its composite model.
pub struct TandemProblem {
    composite: CompositeProblem,
    component_ids: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let message = CString::new(message.into()).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn fail(status: TandemStatus, message: impl Into<String>) -> TandemStatus {
    set_error(message);
    status
}

fn core_error_status(err: &CoreError) -> TandemStatus {
    match err {
        CoreError::InvalidConfig(_)
        | CoreError::InvalidSchedule(_)
        | CoreError::UnboundedStop
        | CoreError::TooFewSamples { .. } => TandemStatus::InvalidArgument,
        _ => TandemStatus::RuntimeError,
    }
}

/// # Safety
/// `ptr` must be null or a NUL-terminated string valid for reads.
unsafe fn utf8_arg<'a>(ptr: *const c_char) -> Result<&'a str, TandemStatus> {
    if ptr.is_null() {
        return Err(TandemStatus::NullArgument);
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| TandemStatus::InvalidUtf8)
}

fn build_problem(kind: &str, text: &str) -> Result<TandemProblem, TandemStatus> {
    let kind: ProblemKind = kind.parse().map_err(|message: String| {
        set_error(message);
        TandemStatus::InvalidArgument
    })?;
    let loaded = LoadedProblem::parse(kind, text).map_err(|failure| {
        set_error(failure.to_string());
        TandemStatus::ParseError
    })?;
    let composite = loaded.to_composite();
    let component_ids = composite
        .component_ids()
        .into_iter()
        .map(|id| CString::new(id.id).expect("component ids have no NUL"))
        .collect();
    Ok(TandemProblem {
        composite,
        component_ids,
    })
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn tandem_version() -> *const c_char {
    const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

/// Message of the most recent failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tandem_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |message| message.as_ptr())
    })
}

/// Load an instance file. `kind` is "ttp" or "killersudoku". On success,
/// writes a handle to `out`; free it with [`tandem_problem_free`].
///
/// # Safety
/// `kind` and `path` must be null or valid NUL-terminated strings; `out`
/// must be a valid pointer to pointer storage.
#[no_mangle]
pub unsafe extern "C" fn tandem_problem_load(
    kind: *const c_char,
    path: *const c_char,
    out: *mut *mut TandemProblem,
) -> TandemStatus {
    if out.is_null() {
        return fail(TandemStatus::NullArgument, "out pointer is null");
    }
    let kind = match utf8_arg(kind) {
        Ok(kind) => kind,
        Err(status) => return fail(status, "bad kind argument"),
    };
    let path = match utf8_arg(path) {
        Ok(path) => path,
        Err(status) => return fail(status, "bad path argument"),
    };
    let text = match std::fs::read_to_string(path) {
        Ok(text) => text,
        Err(e) => return fail(TandemStatus::InvalidArgument, format!("cannot read {path}: {e}")),
    };
    match build_problem(kind, &text) {
        Ok(problem) => {
            *out = Box::into_raw(Box::new(problem));
            TandemStatus::Ok
        }
        Err(status) => status,
    }
}

/// [`tandem_problem_load`] for instance text already in memory.
///
/// # Safety
/// As [`tandem_problem_load`], with `text` in place of `path`.
#[no_mangle]
pub unsafe extern "C" fn tandem_problem_from_text(
    kind: *const c_char,
    text: *const c_char,
    out: *mut *mut TandemProblem,
) -> TandemStatus {
    if out.is_null() {
        return fail(TandemStatus::NullArgument, "out pointer is null");
    }
    let kind = match utf8_arg(kind) {
        Ok(kind) => kind,
        Err(status) => return fail(status, "bad kind argument"),
    };
    let text = match utf8_arg(text) {
        Ok(text) => text,
        Err(status) => return fail(status, "bad text argument"),
    };
    match build_problem(kind, text) {
        Ok(problem) => {
            *out = Box::into_raw(Box::new(problem));
            TandemStatus::Ok
        }
        Err(status) => status,
    }
}

/// Free a problem handle. Null is a no-op.
///
/// # Safety
/// `problem` must be null or a handle returned by this library that has not
/// been freed yet.
#[no_mangle]
pub unsafe extern "C" fn tandem_problem_free(problem: *mut TandemProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Number of components, or -1 for a null handle.
///
/// # Safety
/// `problem` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn tandem_problem_component_count(problem: *const TandemProblem) -> i32 {
    match problem.as_ref() {
        Some(problem) => problem.composite.component_count() as i32,
        None => -1,
    }
}

/// Identifier of the component at `index`, or null when out of range. The
/// pointer stays valid while the problem handle lives.
///
/// # Safety
/// `problem` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn tandem_problem_component_id(
    problem: *const TandemProblem,
    index: usize,
) -> *const c_char {
    match problem.as_ref() {
        Some(problem) => problem
            .component_ids
            .get(index)
            .map_or(std::ptr::null(), |id| id.as_ptr()),
        None => std::ptr::null(),
    }
}

/// Run one seeded search. `algorithm` is one of "jls", "ils", "sa",
/// "cosolver", "ea" with library-default parameters. `max_evaluations`
/// bounds the objective budget; 0 selects the default stop condition (one
/// stale pass plus a million-evaluation safety cap).
///
/// # Safety
/// `problem` must be a live handle; `algorithm` a valid NUL-terminated
/// string; `out_stats` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tandem_solve(
    problem: *const TandemProblem,
    algorithm: *const c_char,
    seed: u64,
    max_evaluations: u64,
    out_stats: *mut TandemRunStats,
) -> TandemStatus {
    let Some(problem) = problem.as_ref() else {
        return fail(TandemStatus::NullArgument, "problem handle is null");
    };
    if out_stats.is_null() {
        return fail(TandemStatus::NullArgument, "out_stats pointer is null");
    }
    let algorithm = match utf8_arg(algorithm) {
        Ok(algorithm) => algorithm,
        Err(status) => return fail(status, "bad algorithm argument"),
    };
    let spec = match AlgorithmSpec::default_for(algorithm) {
        Ok(spec) => spec,
        Err(e) => return fail(TandemStatus::InvalidArgument, e.to_string()),
    };
    let stop = if max_evaluations == 0 {
        StopCondition::default()
    } else {
        StopCondition::default().with_max_evaluations(max_evaluations)
    };
    match run_algorithm(&problem.composite, &spec, &stop, seed) {
        Ok(result) => {
            *out_stats = TandemRunStats {
                best_value: result.best_value,
                evaluations: result.evaluations,
                iterations: result.iterations,
                wall_ms: result.wall_time.as_millis() as u64,
                seed: result.seed,
            };
            TandemStatus::Ok
        }
        Err(e) => fail(core_error_status(&e), e.to_string()),
    }
}

/// Run the dependency detector for `dependent <- dependee` (component ids)
/// and write the verdict to `out_dependent`.
///
/// # Safety
/// `problem` must be a live handle; the id arguments valid NUL-terminated
/// strings; `out_dependent` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tandem_detect_dependency(
    problem: *const TandemProblem,
    dependee: *const c_char,
    dependent: *const c_char,
    sample_count: u32,
    seed: u64,
    out_dependent: *mut bool,
) -> TandemStatus {
    let Some(problem) = problem.as_ref() else {
        return fail(TandemStatus::NullArgument, "problem handle is null");
    };
    if out_dependent.is_null() {
        return fail(TandemStatus::NullArgument, "out_dependent pointer is null");
    }
    let dependee = match utf8_arg(dependee) {
        Ok(id) => id,
        Err(status) => return fail(status, "bad dependee argument"),
    };
    let dependent = match utf8_arg(dependent) {
        Ok(id) => id,
        Err(status) => return fail(status, "bad dependent argument"),
    };
    let composite = &problem.composite;
    let Some(dependee_index) = composite.component_index(dependee) else {
        return fail(
            TandemStatus::InvalidArgument,
            format!("unknown component {dependee:?}"),
        );
    };
    let Some(dependent_index) = composite.component_index(dependent) else {
        return fail(
            TandemStatus::InvalidArgument,
            format!("unknown component {dependent:?}"),
        );
    };
    match tandem::detect_dependency(
        composite,
        dependee_index,
        dependent_index,
        sample_count as usize,
        seed,
    ) {
        Ok(verdict) => {
            *out_dependent = verdict.dependent;
            TandemStatus::Ok
        }
        Err(e) => fail(core_error_status(&e), e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    fn cstr(text: &str) -> CString {
        CString::new(text).unwrap()
    }

    fn fixture_problem() -> *mut TandemProblem {
        let kind = cstr("ttp");
        let text = cstr(tandem::problems::ttp::fixtures::TTP_N4_M3);
        let mut handle: *mut TandemProblem = ptr::null_mut();
        let status =
            unsafe { tandem_problem_from_text(kind.as_ptr(), text.as_ptr(), &mut handle) };
        assert_eq!(status, TandemStatus::Ok);
        assert!(!handle.is_null());
        handle
    }

    #[test]
    fn load_inspect_and_free() {
        let handle = fixture_problem();
        unsafe {
            assert_eq!(tandem_problem_component_count(handle), 2);
            let tour = CStr::from_ptr(tandem_problem_component_id(handle, 0));
            let plan = CStr::from_ptr(tandem_problem_component_id(handle, 1));
            assert_eq!(tour.to_str().unwrap(), "TOUR");
            assert_eq!(plan.to_str().unwrap(), "PLAN");
            assert!(tandem_problem_component_id(handle, 9).is_null());
            tandem_problem_free(handle);
            tandem_problem_free(ptr::null_mut());
        }
    }

    #[test]
    fn solve_is_deterministic_per_seed() {
        let handle = fixture_problem();
        let algo = cstr("jls");
        let mut first = TandemRunStats {
            best_value: 0.0,
            evaluations: 0,
            iterations: 0,
            wall_ms: 0,
            seed: 0,
        };
        let mut second = first;
        unsafe {
            assert_eq!(
                tandem_solve(handle, algo.as_ptr(), 7, 10_000, &mut first),
                TandemStatus::Ok
            );
            assert_eq!(
                tandem_solve(handle, algo.as_ptr(), 7, 10_000, &mut second),
                TandemStatus::Ok
            );
            tandem_problem_free(handle);
        }
        assert!(first.best_value.is_finite());
        assert_eq!(first.best_value.to_bits(), second.best_value.to_bits());
        assert_eq!(first.evaluations, second.evaluations);
        assert_eq!(first.seed, 7);
    }

    #[test]
    fn dependency_detection_through_the_abi() {
        let handle = fixture_problem();
        let tour = cstr("TOUR");
        let plan = cstr("PLAN");
        let mut dependent = false;
        unsafe {
            let status = tandem_detect_dependency(
                handle,
                tour.as_ptr(),
                plan.as_ptr(),
                6,
                42,
                &mut dependent,
            );
            assert_eq!(status, TandemStatus::Ok);
            tandem_problem_free(handle);
        }
        assert!(dependent);
    }

    #[test]
    fn errors_set_status_and_message() {
        let handle = fixture_problem();
        let algo = cstr("tabu");
        let mut stats = TandemRunStats {
            best_value: 0.0,
            evaluations: 0,
            iterations: 0,
            wall_ms: 0,
            seed: 0,
        };
        unsafe {
            let status = tandem_solve(handle, algo.as_ptr(), 0, 0, &mut stats);
            assert_eq!(status, TandemStatus::InvalidArgument);
            let message = CStr::from_ptr(tandem_last_error()).to_str().unwrap();
            assert!(message.contains("tabu"), "{message}");

            assert_eq!(
                tandem_solve(ptr::null(), algo.as_ptr(), 0, 0, &mut stats),
                TandemStatus::NullArgument
            );
            tandem_problem_free(handle);
        }
    }

    #[test]
    fn parse_and_kind_errors() {
        let mut handle: *mut TandemProblem = ptr::null_mut();
        let bad_kind = cstr("sudokuu");
        let text = cstr("whatever");
        unsafe {
            assert_eq!(
                tandem_problem_from_text(bad_kind.as_ptr(), text.as_ptr(), &mut handle),
                TandemStatus::InvalidArgument
            );
            let kind = cstr("killersudoku");
            let bad_text = cstr("not an instance\n");
            assert_eq!(
                tandem_problem_from_text(kind.as_ptr(), bad_text.as_ptr(), &mut handle),
                TandemStatus::ParseError
            );
            let message = CStr::from_ptr(tandem_last_error()).to_str().unwrap();
            assert!(message.contains("line 1"), "{message}");
        }
    }

    #[test]
    fn invalid_utf8_is_rejected() {
        let mut handle: *mut TandemProblem = ptr::null_mut();
        let bad = [0xffu8, 0x00];
        let kind = cstr("ttp");
        unsafe {
            assert_eq!(
                tandem_problem_from_text(
                    kind.as_ptr(),
                    bad.as_ptr().cast::<c_char>(),
                    &mut handle
                ),
                TandemStatus::InvalidUtf8
            );
        }
    }

    #[test]
    fn version_is_a_static_string() {
        let version = unsafe { CStr::from_ptr(tandem_version()) };
        assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
