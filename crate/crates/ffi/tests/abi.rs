use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use spacezk_ffi::*;

fn last_error() -> String {
    let p = szk_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn take_string(p: *mut c_char) -> String {
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned();
    unsafe { szk_string_free(p) };
    s
}

#[test]
fn honest_session_accepts_and_replays() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(szk_graph_random_hamiltonian(6, 0.3, 7, &mut g), SzkStatus::Ok);
        assert_eq!(szk_graph_vertex_count(g), 6);
        let mut tr = ptr::null_mut();
        assert_eq!(szk_session_run(g, SzkProver::Honest, 8, 8, 3, &mut tr), SzkStatus::Ok);
        let mut v = SzkVerdict { kind: 9, step: 9 };
        assert_eq!(szk_transcript_verdict(tr, &mut v), SzkStatus::Ok);
        assert_eq!(v, SzkVerdict { kind: 0, step: 0 });
        assert!(szk_transcript_message_count(tr) > 6);
        assert_eq!(szk_transcript_peak_qubits(tr), 0);
        let mut same = 0u8;
        assert_eq!(szk_transcript_replay(tr, g, 8, 8, &mut same), SzkStatus::Ok);
        assert_eq!(same, 1);
        let mut json = ptr::null_mut();
        assert_eq!(szk_transcript_to_json(tr, &mut json), SzkStatus::Ok);
        let parsed: serde_json::Value = serde_json::from_str(&take_string(json)).unwrap();
        assert_eq!(parsed["verdict"], "Accept");
        szk_transcript_free(tr);
        szk_graph_free(g);
    }
}

#[test]
fn honest_prover_without_a_cycle_is_rejected_at_the_boundary() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(szk_graph_petersen(&mut g), SzkStatus::Ok);
        let mut tr = ptr::null_mut();
        assert_eq!(szk_session_run(g, SzkProver::Honest, 8, 8, 1, &mut tr), SzkStatus::InvalidArgument);
        assert!(tr.is_null());
        assert!(last_error().contains("known cycle"));
        szk_graph_free(g);
    }
}

#[test]
fn guessing_prover_on_petersen_is_not_accepted() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(szk_graph_petersen(&mut g), SzkStatus::Ok);
        let mut tr = ptr::null_mut();
        assert_eq!(szk_session_run(g, SzkProver::Guessing, 8, 8, 2, &mut tr), SzkStatus::Ok);
        let mut v = SzkVerdict { kind: 0, step: 0 };
        szk_transcript_verdict(tr, &mut v);
        // λ/2^λ = 1/32 at λ = 8 is possible, but not for this seed
        assert_eq!(v.kind, 1);
        szk_transcript_free(tr);
        szk_graph_free(g);
    }
}

#[test]
fn simulated_view_stays_within_twice_the_width() {
    let name = CString::new("never-abort").unwrap();
    unsafe {
        let mut g = ptr::null_mut();
        szk_graph_petersen(&mut g);
        let mut tr = ptr::null_mut();
        assert_eq!(szk_simulate(g, name.as_ptr(), 2, 8, 8, 5, &mut tr), SzkStatus::Ok, "{}", last_error());
        let mut v = SzkVerdict { kind: 9, step: 9 };
        szk_transcript_verdict(tr, &mut v);
        assert_eq!(v.kind, 0);
        assert!(szk_transcript_peak_qubits(tr) <= 4);
        szk_transcript_free(tr);
        szk_graph_free(g);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let bogus = CString::new("no-such-verifier").unwrap();
    unsafe {
        let mut g = ptr::null_mut();
        szk_graph_petersen(&mut g);
        let mut tr = ptr::null_mut();
        assert_eq!(szk_simulate(g, bogus.as_ptr(), 1, 8, 8, 1, &mut tr), SzkStatus::Config);
        assert!(last_error().contains("no-such-verifier"));
        assert_eq!(szk_simulate(g, ptr::null(), 1, 8, 8, 1, &mut tr), SzkStatus::NullPointer);
        assert_eq!(szk_simulate(ptr::null(), bogus.as_ptr(), 1, 8, 8, 1, &mut tr), SzkStatus::NullPointer);
        assert_eq!(szk_session_run(g, SzkProver::Guessing, 0, 8, 1, &mut tr), SzkStatus::Config);
        let bad_utf8 = [0xffu8, 0xfe, 0];
        assert_eq!(
            szk_simulate(g, bad_utf8.as_ptr().cast(), 1, 8, 8, 1, &mut tr),
            SzkStatus::InvalidUtf8
        );
        assert_eq!(szk_graph_random_hamiltonian(2, 0.3, 1, &mut g), SzkStatus::InvalidArgument);
        assert_eq!(szk_graph_random_hamiltonian(6, 1.5, 1, &mut g), SzkStatus::InvalidArgument);
        szk_graph_free(g);
        // NULL handles are tolerated by the free functions and getters
        szk_graph_free(ptr::null_mut());
        szk_transcript_free(ptr::null_mut());
        szk_report_free(ptr::null_mut());
        szk_string_free(ptr::null_mut());
        assert_eq!(szk_graph_vertex_count(ptr::null()), 0);
        assert_eq!(szk_report_passed(ptr::null()), 0);
    }
}

#[test]
fn experiment_report_round_trips() {
    let name = CString::new("binding").unwrap();
    let metric = CString::new("equivocable_fraction").unwrap();
    let missing = CString::new("nope").unwrap();
    unsafe {
        let mut r = ptr::null_mut();
        assert_eq!(szk_experiment_run(name.as_ptr(), 1, &mut r), SzkStatus::Ok);
        assert_eq!(szk_report_passed(r), 1);
        let mut v = -1.0;
        assert_eq!(szk_report_metric(r, metric.as_ptr(), &mut v), SzkStatus::Ok);
        assert!((0.0..=0.0625).contains(&v));
        assert_eq!(szk_report_metric(r, missing.as_ptr(), &mut v), SzkStatus::InvalidArgument);
        let mut json = ptr::null_mut();
        assert_eq!(szk_report_to_json(r, &mut json), SzkStatus::Ok);
        let s = take_string(json);
        assert!(s.contains("equivocable_fraction") && !s.contains("wall_clock_ms"));
        szk_report_free(r);

        let unknown = CString::new("unknown-experiment").unwrap();
        assert_eq!(szk_experiment_run(unknown.as_ptr(), 1, &mut r), SzkStatus::Config);
    }
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(szk_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/spacezk.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in [
        "szk_last_error",
        "szk_session_run",
        "szk_simulate",
        "szk_experiment_run",
        "szk_report_free",
        "SZK_STATUS_PANIC",
    ] {
        assert!(text.contains(f), "header lacks {f}");
    }
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR"));
    let unit = |ext: &str| {
        let p = dir.join(format!("header_check.{ext}"));
        let src = format!(
            "#include \"{}\"\nint main(void) {{ SzkGraph *g = 0; szk_graph_petersen(&g); szk_graph_free(g); return 0; }}\n",
            header.display()
        );
        std::fs::write(&p, src).unwrap();
        p
    };
    for (cc, ext) in [("cc", "c"), ("c++", "cpp")] {
        let Ok(out) = Command::new(cc).args(["-fsyntax-only", "-Wall", "-Werror"]).arg(unit(ext)).output() else {
            eprintln!("{cc} not found; skipping the {ext} compile check");
            continue;
        };
        assert!(out.status.success(), "{ext}: {}", String::from_utf8_lossy(&out.stderr));
    }
}
