//! The acceptance suite. Each test runs one harness experiment at its
//! default parameters and re-checks the reported values against
//! tolerances pinned here, independently of the report's own pass flags.
//!
//! Run with `cargo test --release --test acceptance -- --nocapture` for the
//! full table; the verdict lines go straight to stdout either way.

use std::collections::BTreeSet;
use std::io::Write;

use spacezk::crypto::prg_expand;
use spacezk::harness::{run_experiment, ExperimentConfig, Report};
use spacezk::Bits;

const SEED: u64 = 1;
const SIGMAS: f64 = 3.0;
const ALPHA: f64 = 1e-3;

fn run(name: &str) -> Report {
    run_experiment(&ExperimentConfig::new(name, SEED)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn value(r: &Report, name: &str) -> f64 {
    r.metric(name)
        .unwrap_or_else(|| panic!("{}: no metric {name}", r.config.experiment))
        .value
}

fn param_f64(r: &Report, name: &str) -> f64 {
    r.params
        .get(name)
        .and_then(serde_json::Value::as_f64)
        .unwrap_or_else(|| panic!("{}: no numeric param {name}", r.config.experiment))
}

fn sigma(p: f64, n: f64) -> f64 {
    (p * (1.0 - p) / n).sqrt()
}

/// Collects named checks, prints the criterion line and fails on any miss.
struct Verdict {
    id: u32,
    title: &'static str,
    checks: Vec<(String, bool)>,
}

impl Verdict {
    fn new(id: u32, title: &'static str) -> Self {
        Verdict {
            id,
            title,
            checks: vec![],
        }
    }

    fn check(&mut self, what: impl Into<String>, ok: bool) -> &mut Self {
        self.checks.push((what.into(), ok));
        self
    }

    fn finish(&self, report: &Report) {
        let pass = self.checks.iter().all(|c| c.1) && report.passed();
        let failed: Vec<&str> = self.checks.iter().filter(|c| !c.1).map(|c| c.0.as_str()).collect();
        let mut out = std::io::stdout().lock();
        writeln!(
            out,
            "criterion {:2} {:<34} {}  ({} checks{}{})",
            self.id,
            self.title,
            if pass { "PASS" } else { "FAIL" },
            self.checks.len(),
            if failed.is_empty() { "" } else { "; failed: " },
            failed.join(", ")
        )
        .unwrap();
        if !pass {
            writeln!(out, "{}", report.to_text()).unwrap();
        }
        assert!(pass, "criterion {} failed", self.id);
    }
}

#[test]
fn criterion_01_maximally_mixed_bound() {
    let r = run("mixed-state-bound");
    let mut v = Verdict::new(1, "maximally-mixed bound");
    v.check("λ = 16", param_f64(&r, "lambda") == 16.0)
        .check("200 verifiers", param_f64(&r, "verifiers") == 200.0)
        .check("zero violations", value(&r, "violations") == 0.0)
        .check("slack ≥ −1e-9", value(&r, "min_slack") >= -1e-9)
        .check("runtime < 60 s", value(&r, "runtime_s") < 60.0);
    let widths = &r.histograms["width"];
    v.check(
        "M ∈ {1,2,3} all exercised",
        ["M=1", "M=2", "M=3"].iter().all(|k| widths.get(*k).copied().unwrap_or(0) > 0),
    );
    v.finish(&r);
}

#[test]
fn criterion_02_simulator_iteration_bound() {
    let r = run("sim-iterations");
    let mut v = Verdict::new(2, "simulator iteration bound");
    let m = param_f64(&r, "width");
    let lambda = param_f64(&r, "lambda");
    v.check("M = 3", m == 3.0).check("λ = 8", lambda == 8.0);
    let coins: Vec<String> = r
        .metrics
        .iter()
        .filter_map(|x| x.name.strip_suffix(".mean_iterations").map(str::to_string))
        .collect();
    v.check("quantum-coin family present", coins.len() >= 3 && coins.iter().all(|c| c.starts_with("quantum-coin")));
    for c in &coins {
        let mean = r.metric(&format!("{c}.mean_iterations")).unwrap();
        let s = mean.sigma.expect("mean carries its standard error");
        let (p, pp) = (param_f64(&r, &format!("{c}.p")), param_f64(&r, &format!("{c}.p_prime")));
        v.check(format!("{c} mean ≤ 16"), mean.value <= 2f64.powf(m + 1.0));
        v.check(format!("{c} mean ≤ (1−p)+p/p′+3σ"), mean.value <= (1.0 - p) + p / pp + SIGMAS * s);
        let looped = param_f64(&r, &format!("{c}.looped"));
        let e = (-lambda).exp();
        let tail = value(&r, &format!("{c}.tail_beyond_lambda_over_p_prime"));
        v.check(format!("{c} tail ≤ e^−λ+3σ"), tail <= e + SIGMAS * sigma(e, looped));
    }
    v.finish(&r);
}

#[test]
fn criterion_03_space_contract() {
    let r = run("space");
    let mut v = Verdict::new(3, "space contract (peak ≤ 2M)");
    v.check("every run within 2M", value(&r, "runs_over_2m") == 0.0)
        .check("max peak/2M ≤ 1", value(&r, "max_peak_over_2m") <= 1.0)
        .check("six zoo verifiers × 100 runs", param_f64(&r, "runs") == 600.0);
    v.finish(&r);
}

#[test]
fn criterion_04_completeness() {
    let r = run("completeness");
    let mut v = Verdict::new(4, "completeness");
    v.check("λ = 8, t = 40", param_f64(&r, "lambda") == 8.0 && param_f64(&r, "t") == 40.0)
        .check("200 sessions", param_f64(&r, "sessions") == 200.0)
        .check("accept rate = 1", value(&r, "accept_rate") == 1.0)
        .check("runtime < 120 s", value(&r, "runtime_s") < 120.0);
    v.finish(&r);
}

#[test]
fn criterion_05_soundness_ceiling() {
    let r = run("soundness");
    let mut v = Verdict::new(5, "soundness ceiling");
    let lambda = param_f64(&r, "lambda");
    let t = param_f64(&r, "t");
    let (ng, nm) = (param_f64(&r, "guessing_trials"), param_f64(&r, "mauling_trials"));
    v.check("λ = 8", lambda == 8.0).check("10⁴ guessing trials", ng == 1e4);
    let g_ceiling = lambda / 2f64.powf(lambda);
    v.check(
        "guessing ≤ λ/2^λ+3σ",
        value(&r, "guessing.accept_rate") <= g_ceiling + SIGMAS * sigma(g_ceiling, ng),
    );
    let m_ceiling = 2f64.powf(-t);
    v.check(
        "mauling ≤ 2^−t+3σ",
        value(&r, "mauling.accept_rate") <= m_ceiling + SIGMAS * sigma(m_ceiling, nm),
    );
    v.finish(&r);
}

/// Equivocable receiver messages are exactly the differences G(s₁)⊕G(s₂).
fn binding_by_difference_set(lambda: usize) -> f64 {
    let outs: Vec<Bits> = (0..1u64 << lambda)
        .map(|s| prg_expand(&Bits::from_u64(s, lambda), 3 * lambda))
        .collect();
    let diffs: BTreeSet<u64> = outs
        .iter()
        .flat_map(|a| outs.iter().map(move |b| a.xor(b).to_u64()))
        .collect();
    diffs.len() as f64 / 2f64.powi(3 * lambda as i32)
}

#[test]
fn criterion_06_binding_exhaustive() {
    let r = run("binding");
    let mut v = Verdict::new(6, "binding, exhaustive");
    let frac = value(&r, "equivocable_fraction");
    let oracle = binding_by_difference_set(4);
    v.check("λ = 4", param_f64(&r, "lambda") == 4.0)
        .check("fraction ≤ 2^−4", frac <= 0.0625)
        .check("all 2^12 receiver messages", param_f64(&r, "receiver_msgs") == 4096.0)
        .check("matches the difference-set count", (frac - oracle).abs() < 1e-15);
    v.finish(&r);
}

#[test]
fn criterion_07_subspace_machinery() {
    let r = run("subspace");
    let mut v = Verdict::new(7, "subspace machinery");
    v.check("Test passes w.p. 1 (1e-12)", value(&r, "test.max_pass_deficit") <= 1e-12)
        .check("Test post-state fidelity 1 (1e-12)", value(&r, "test.max_fidelity_deficit") <= 1e-12)
        .check("C_A† route = direct (1e-9)", value(&r, "project.max_route_difference") <= 1e-9)
        .check("C_A exact (1e-12)", value(&r, "ca.max_fidelity_deficit") <= 1e-12)
        .check("50 trials", param_f64(&r, "trials") == 50.0);
    let dims = r.params["dims"].as_array().unwrap();
    v.check("n ≤ 8", dims.iter().all(|d| d.as_u64().unwrap() <= 8));
    v.finish(&r);
}

#[test]
fn criterion_08_cloning_floor() {
    let r = run("clone-naive");
    let mut v = Verdict::new(8, "cloning floor");
    let trials = param_f64(&r, "trials");
    for n in [4i32, 6] {
        for (name, target) in [("measure_and_resend", 2f64.powi(-n)), ("identity_pad", 2f64.powi(-n / 2))] {
            let got = value(&r, &format!("{name}.n{n}.success_rate"));
            let tol = SIGMAS * sigma(target, trials);
            v.check(format!("{name} n={n} = {target} ± 3σ"), (got - target).abs() <= tol);
        }
    }
    v.finish(&r);
}

#[test]
fn criterion_09_impossibility_structure() {
    let r = run("impossibility");
    let mut v = Verdict::new(9, "impossibility structure");
    let n = param_f64(&r, "n");
    let runs = param_f64(&r, "runs");
    v.check("n = 8", n == 8.0)
        .check("10³ runs", runs == 1000.0)
        .check("straight-line: no J/B/C/D/E events", value(&r, "straight-line.events") == 0.0)
        .check("straight-line accepts", value(&r, "straight-line.accept_rate") == 1.0);
    let floor = 2f64.powf(-n / 2.0);
    for p in ["out-of-order", "out-of-order-plus", "repeat-query"] {
        let probes = param_f64(&r, &format!("{p}.probes"));
        let rate = value(&r, &format!("{p}.state_successful_rate"));
        v.check(format!("{p} ≤ 2^−n/2+3σ"), probes > 0.0 && rate <= floor + SIGMAS * sigma(floor, probes));
    }
    v.check("10⁵ forged queries", param_f64(&r, "forge.attempts") == 1e5)
        .check("forged-tag D events = 0", value(&r, "forge.d_events") == 0.0)
        .check("no forgery answered", value(&r, "forge.answered") == 0.0);
    v.finish(&r);
}

#[test]
fn criterion_10_extraction() {
    let r = run("extraction");
    let mut v = Verdict::new(10, "P̃ extraction");
    let (yes, no) = (value(&r, "yes.accept_rate"), value(&r, "no.accept_rate"));
    v.check("n = 6, λ = 8", param_f64(&r, "n") == 6.0 && param_f64(&r, "lambda") == 8.0)
        .check("500 runs each", param_f64(&r, "runs") == 500.0)
        .check("yes ≥ 0.95", yes >= 0.95)
        .check("no ≤ 0.05", no <= 0.05)
        .check("gap ≥ 0.9", yes - no >= 0.9)
        .check("ciphertext content invisible", value(&r, "h2.chi2_p") >= ALPHA);
    v.finish(&r);
}

#[test]
fn criterion_11_view_indistinguishability() {
    let r = run("view-indistinguishability");
    let mut v = Verdict::new(11, "view indistinguishability (χ²)");
    let samples = param_f64(&r, "samples");
    v.check("λ = 16", param_f64(&r, "lambda") == 16.0).check("2000 samples", samples == 2000.0);
    let ps: Vec<(&str, f64)> = r
        .metrics
        .iter()
        .filter_map(|m| m.name.strip_suffix(".chi2_p").map(|n| (n, m.value)))
        .collect();
    v.check("every zoo verifier tested", ps.len() == 6);
    for (name, p) in &ps {
        v.check(format!("{name} p ≥ 1e-3"), *p >= ALPHA);
        for side in ["real", "sim"] {
            let total: u64 = r.histograms[&format!("{name}.{side}")].values().sum();
            v.check(format!("{name} {side} sample count"), total as f64 == samples);
        }
    }
    v.check("simulator within 2M", value(&r, "sim.max_peak_over_2m") <= 1.0);
    v.finish(&r);
}
