//! C ABI over the spacezk laboratory.
//!
//! Every object crosses the boundary as an opaque handle made by a
//! constructor such as `szk_graph_petersen` or `szk_session_run` and released
//! by the matching `szk_*_free`.
//! Fallible calls return an [`SzkStatus`]; the message for the most recent
//! failure on the calling thread is available from [`szk_last_error`].
//! Strings returned to the caller are owned by the caller and must be
//! released with [`szk_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spacezk::adversary::zoo_by_name;
use spacezk::harness::{run_experiment, ExperimentConfig, Report};
use spacezk::protocol::{
    replay_verify, run_session, ProverState, ProverStrategy, Transcript, Transport, Verdict, VerifierState,
};
use spacezk::simulator::{make_oracle, simulate, SimParams, Verifier, DEFAULT_MAX_ITERS};
use spacezk::wi::Graph;
use spacezk::Error;

/// Result of every fallible call. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SzkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Config = 4,
    Protocol = 5,
    Simulation = 6,
    Quantum = 7,
    Statistics = 8,
    Io = 9,
    /// A Rust panic was caught at the boundary.
    Panic = 10,
}

impl From<&Error> for SzkStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Config(_) | Error::Mode(_) => SzkStatus::Config,
            Error::Protocol { .. } | Error::Frame(_) | Error::SessionAborted(_) | Error::Format(_) => {
                SzkStatus::Protocol
            }
            Error::IterationBudgetExceeded { .. } | Error::NonTermination { .. } | Error::Postprocess(_) => {
                SzkStatus::Simulation
            }
            Error::Dimension(_)
            | Error::ImpossibleBranch { .. }
            | Error::InvalidEffect(_)
            | Error::InvalidState(_)
            | Error::BasisNotOrthonormal(_)
            | Error::BudgetExceeded { .. } => SzkStatus::Quantum,
            Error::Stat(_) => SzkStatus::Statistics,
            Error::Io(_) => SzkStatus::Io,
        }
    }
}

/// Prover played against the honest verifier in [`szk_session_run`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SzkProver {
    /// Needs a graph with a known Hamiltonian cycle.
    Honest = 0,
    Guessing = 1,
    Mauling = 2,
}

/// Flattened verdict: `kind` is 0 accept, 1 reject, 2 abort; `step` is the
/// protocol step for reject and abort, 0 for accept.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SzkVerdict {
    pub kind: u8,
    pub step: u8,
}

impl From<&Verdict> for SzkVerdict {
    fn from(v: &Verdict) -> Self {
        match v {
            Verdict::Accept => SzkVerdict { kind: 0, step: 0 },
            Verdict::Reject { step } => SzkVerdict { kind: 1, step: *step },
            Verdict::Abort { step } => SzkVerdict { kind: 2, step: *step },
        }
    }
}

/// A graph, with its Hamiltonian cycle when one is known.
pub struct SzkGraph {
    graph: Graph,
    cycle: Option<Vec<usize>>,
}

pub struct SzkTranscript {
    transcript: Transcript,
    /// Peak simulator qubits, zero for real sessions.
    peak_qubits: usize,
}

pub struct SzkReport {
    report: Report,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(SzkStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(SzkStatus::from(&e), e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(SzkStatus::InvalidArgument, msg.into())
}

/// Runs `f` behind a panic guard and records any failure.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SzkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SzkStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            SzkStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail(SzkStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| Fail(SzkStatus::NullPointer, format!("{what} is null")))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(SzkStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Fail(SzkStatus::InvalidUtf8, format!("{what}: {e}")))
}

fn owned_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|e| invalid(format!("string holds a NUL: {e}")))
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn szk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn szk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn szk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// The Petersen graph: ten vertices, no Hamiltonian cycle.
///
/// # Safety
/// `out_graph` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn szk_graph_petersen(out_graph: *mut *mut SzkGraph) -> SzkStatus {
    guard(|| {
        let slot = out(out_graph, "out_graph")?;
        *slot = Box::into_raw(Box::new(SzkGraph {
            graph: Graph::petersen(),
            cycle: None,
        }));
        Ok(())
    })
}

/// A random graph on `n` vertices with a planted Hamiltonian cycle and each
/// other edge present with probability `density`.
///
/// # Safety
/// `out_graph` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn szk_graph_random_hamiltonian(
    n: usize,
    density: f64,
    seed: u64,
    out_graph: *mut *mut SzkGraph,
) -> SzkStatus {
    guard(|| {
        let slot = out(out_graph, "out_graph")?;
        if !(3..=64).contains(&n) {
            return Err(invalid(format!("need 3 ≤ n ≤ 64 vertices, got {n}")));
        }
        if !(0.0..=1.0).contains(&density) {
            return Err(invalid(format!("density {density} outside [0, 1]")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (graph, cycle) = Graph::random_hamiltonian(n, density, &mut rng);
        *slot = Box::into_raw(Box::new(SzkGraph {
            graph,
            cycle: Some(cycle),
        }));
        Ok(())
    })
}

/// Vertex count, or 0 for NULL.
///
/// # Safety
/// `graph` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn szk_graph_vertex_count(graph: *const SzkGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.graph.num_vertices())
}

/// # Safety
/// `graph` must be NULL or a live handle, and is dangling afterwards.
#[no_mangle]
pub unsafe extern "C" fn szk_graph_free(graph: *mut SzkGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// One session of `prover` against the honest verifier on `graph`.
///
/// # Safety
/// `graph` must be a live handle and `out_transcript` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn szk_session_run(
    graph: *const SzkGraph,
    prover: SzkProver,
    lambda: usize,
    t: u32,
    seed: u64,
    out_transcript: *mut *mut SzkTranscript,
) -> SzkStatus {
    guard(|| {
        let g = borrow(graph, "graph")?;
        let slot = out(out_transcript, "out_transcript")?;
        let strategy = match prover {
            SzkProver::Honest => ProverStrategy::Honest {
                cycle: g
                    .cycle
                    .clone()
                    .ok_or_else(|| invalid("the honest prover needs a graph with a known cycle"))?,
            },
            SzkProver::Guessing => ProverStrategy::Guessing,
            SzkProver::Mauling => ProverStrategy::Mauling,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = ProverState::new(seed, g.graph.clone(), lambda, t, strategy, &mut rng)?;
        let mut v = VerifierState::new(seed, g.graph.clone(), lambda, t)?;
        let transcript = run_session(&mut p, &mut v, Transport::Direct, seed, &mut rng).map_err(Error::from)?;
        *slot = Box::into_raw(Box::new(SzkTranscript {
            transcript,
            peak_qubits: 0,
        }));
        Ok(())
    })
}

/// Simulated view of the named zoo verifier (`honest`, `always-abort`,
/// `never-abort`, `bit-conditional`, `quantum-coin`, `delayed-abort`) with
/// a `width`-qubit register.
///
/// # Safety
/// `graph` must be a live handle, `verifier` a NUL-terminated string and
/// `out_transcript` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn szk_simulate(
    graph: *const SzkGraph,
    verifier: *const c_char,
    width: usize,
    lambda: usize,
    t: u32,
    seed: u64,
    out_transcript: *mut *mut SzkTranscript,
) -> SzkStatus {
    guard(|| {
        let g = borrow(graph, "graph")?;
        let name = c_str(verifier, "verifier")?;
        let slot = out(out_transcript, "out_transcript")?;
        let v = zoo_by_name(name, width, &g.graph, lambda, t)?;
        let (advice, st0) = (v.advice(), v.initial_memory(seed));
        let mut oracle = make_oracle(Box::new(v), width)?;
        let params = SimParams {
            lambda,
            t,
            max_iters: DEFAULT_MAX_ITERS,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let view = simulate(&g.graph, params, &mut oracle, advice, st0, &mut rng)?;
        *slot = Box::into_raw(Box::new(SzkTranscript {
            transcript: view.transcript,
            peak_qubits: view.peak_qubits,
        }));
        Ok(())
    })
}

/// # Safety
/// `transcript` must be a live handle and `out_verdict` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn szk_transcript_verdict(
    transcript: *const SzkTranscript,
    out_verdict: *mut SzkVerdict,
) -> SzkStatus {
    guard(|| {
        let tr = borrow(transcript, "transcript")?;
        *out(out_verdict, "out_verdict")? = SzkVerdict::from(&tr.transcript.verdict);
        Ok(())
    })
}

/// Number of messages, or 0 for NULL.
///
/// # Safety
/// `transcript` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn szk_transcript_message_count(transcript: *const SzkTranscript) -> usize {
    transcript.as_ref().map_or(0, |t| t.transcript.messages.len())
}

/// Peak simulator qubits; 0 for real sessions and NULL.
///
/// # Safety
/// `transcript` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn szk_transcript_peak_qubits(transcript: *const SzkTranscript) -> usize {
    transcript.as_ref().map_or(0, |t| t.peak_qubits)
}

/// Re-runs the honest verifier over the transcript and writes 1 when its
/// verdict matches the recorded one.
///
/// # Safety
/// Both handles must be live and `out_matches` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn szk_transcript_replay(
    transcript: *const SzkTranscript,
    graph: *const SzkGraph,
    lambda: usize,
    t: u32,
    out_matches: *mut u8,
) -> SzkStatus {
    guard(|| {
        let tr = borrow(transcript, "transcript")?;
        let g = borrow(graph, "graph")?;
        let slot = out(out_matches, "out_matches")?;
        *slot = (replay_verify(&tr.transcript, &g.graph, lambda, t)? == tr.transcript.verdict) as u8;
        Ok(())
    })
}

/// JSON form of the transcript; free with [`szk_string_free`].
///
/// # Safety
/// `transcript` must be a live handle and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn szk_transcript_to_json(
    transcript: *const SzkTranscript,
    out_json: *mut *mut c_char,
) -> SzkStatus {
    guard(|| {
        let tr = borrow(transcript, "transcript")?;
        let slot = out(out_json, "out_json")?;
        let json = serde_json::to_string(&tr.transcript).map_err(|e| Fail(SzkStatus::Protocol, e.to_string()))?;
        *slot = owned_string(json)?;
        Ok(())
    })
}

/// # Safety
/// `transcript` must be NULL or a live handle, and is dangling afterwards.
#[no_mangle]
pub unsafe extern "C" fn szk_transcript_free(transcript: *mut SzkTranscript) {
    if !transcript.is_null() {
        drop(Box::from_raw(transcript));
    }
}

/// Runs a named harness experiment at its defaults.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out_report` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn szk_experiment_run(
    name: *const c_char,
    seed: u64,
    out_report: *mut *mut SzkReport,
) -> SzkStatus {
    guard(|| {
        let name = c_str(name, "name")?;
        let slot = out(out_report, "out_report")?;
        let report = run_experiment(&ExperimentConfig::new(name, seed))?;
        *slot = Box::into_raw(Box::new(SzkReport { report }));
        Ok(())
    })
}

/// 1 when every metric passed, 0 otherwise or for NULL.
///
/// # Safety
/// `report` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn szk_report_passed(report: *const SzkReport) -> u8 {
    report.as_ref().is_some_and(|r| r.report.passed()) as u8
}

/// Value of the named metric.
///
/// # Safety
/// `report` must be a live handle, `metric` a NUL-terminated string and
/// `out_value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn szk_report_metric(
    report: *const SzkReport,
    metric: *const c_char,
    out_value: *mut f64,
) -> SzkStatus {
    guard(|| {
        let r = borrow(report, "report")?;
        let name = c_str(metric, "metric")?;
        let slot = out(out_value, "out_value")?;
        *slot = r
            .report
            .metric(name)
            .ok_or_else(|| invalid(format!("no metric {name:?}")))?
            .value;
        Ok(())
    })
}

/// Seed-determined JSON form of the report (no wall-clock fields); free
/// with [`szk_string_free`].
///
/// # Safety
/// `report` must be a live handle and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn szk_report_to_json(report: *const SzkReport, out_json: *mut *mut c_char) -> SzkStatus {
    guard(|| {
        let r = borrow(report, "report")?;
        let slot = out(out_json, "out_json")?;
        *slot = owned_string(r.report.to_canonical_json()?)?;
        Ok(())
    })
}

/// # Safety
/// `report` must be NULL or a live handle, and is dangling afterwards.
#[no_mangle]
pub unsafe extern "C" fn szk_report_free(report: *mut SzkReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
