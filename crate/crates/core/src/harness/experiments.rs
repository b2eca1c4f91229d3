//! The named experiments. Each one fills a [`Report`] with metrics whose
//! tolerances are fixed here, from its own exact predictions.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::config::{Experiment, ExperimentConfig};
use super::report::{Metric, Report, Tolerance};
use super::stats::{align, binomial_sigma, chi2_test, mean_and_sigma, tv_distance, Histogram};
use crate::adversary::{
    build_contrived_verifier, build_zoo, guessing_prover, mauling_prover, run_extracted, run_forgeries, run_policy,
    zoo_by_name, CiphertextMode, EventCounters, PolicyParams, Probe, RandomVerifier, SimPolicy, ZooKind, ZooVerifier,
};
use crate::crypto::binding_exhaustive;
use crate::error::{Error, Result};
use crate::protocol::{replay_verify, run_session, ProverState, ProverStrategy, Transcript, Verdict, VerifierState};
use crate::qsim::{CMatrix, QState, C64};
use crate::simulator::{
    bound_check, make_oracle, rewind_iterations, simulate, LiveVerifier, SimParams, SimView, Verifier,
    DEFAULT_MAX_ITERS,
};
use crate::subspace::{
    build_ca_from_basis, clone_experiment, orthonormal_basis, project_a_branches, CloneStrategy, ProjectRoute,
    Subspace, SubspaceOracleHandle,
};
use crate::wi::Graph;

/// Vertices of the yes-instances the experiments draw.
pub const YES_VERTICES: usize = 8;

/// Independent stream `trial` of sub-experiment `part` under `seed`.
pub fn trial_rng(seed: u64, part: u32, trial: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream((u64::from(part) << 40) | trial);
    r
}

/// Runs `f` on trials 0..n, each with its own stream; results in trial order.
fn trials<T: Send>(
    n: u64,
    seed: u64,
    part: u32,
    f: impl Fn(u64, &mut ChaCha8Rng) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    (0..n)
        .into_par_iter()
        .map(|i| f(i, &mut trial_rng(seed, part, i)))
        .collect()
}

/// A Hamiltonian graph with a known cycle, fixed by the seed.
pub fn yes_instance(seed: u64) -> (Graph, Vec<usize>) {
    Graph::random_hamiltonian(YES_VERTICES, 0.3, &mut trial_rng(seed, u32::MAX, 0))
}

fn count<K: ToString>(h: &mut Histogram, k: K) {
    *h.entry(k.to_string()).or_insert(0) += 1;
}

fn rate(hits: usize, n: usize) -> f64 {
    hits as f64 / n.max(1) as f64
}

/// Observable fields of a transcript: verdict, b_0 and a popcount bucket
/// of the challenge.
pub fn observable(tr: &Transcript) -> String {
    match tr.challenge_bits() {
        None => format!("{}|b0=-|pc=-", tr.verdict),
        Some(b) => {
            let mid = b.len() / 2;
            let pc = b.count_ones();
            let bucket = match pc.cmp(&mid) {
                std::cmp::Ordering::Less if pc + 2 <= mid => "low".to_string(),
                std::cmp::Ordering::Greater if pc >= mid + 2 => "high".to_string(),
                _ => format!("{:+}", pc as i64 - mid as i64),
            };
            format!("{}|b0={}|pc={bucket}", tr.verdict, b.get(0) as u8)
        }
    }
}

fn random_pure<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<QState> {
    let amps = (0..1usize << n)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    QState::normalized(amps)
}

/// Equal mixture of two random pure states.
fn random_mixed<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<QState> {
    let a = random_pure(n, rng)?.density_matrix();
    let b = random_pure(n, rng)?.density_matrix();
    QState::from_density(a.add(&b).scale(C64::new(0.5, 0.0)))
}

/// Subspace of F₂ⁿ of random dimension 1..=n/2 that has an orthonormal
/// basis, with that basis.
fn orthonormal_subspace<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<(Subspace, Vec<u64>)> {
    loop {
        let k = rng.gen_range(1..=n / 2);
        let a = Subspace::sample(n, k, rng)?;
        if let Some(b) = orthonormal_basis(&a) {
            return Ok((a, b));
        }
    }
}

fn sim_params(lambda: usize, t: u32) -> SimParams {
    SimParams {
        lambda,
        t,
        max_iters: DEFAULT_MAX_ITERS,
    }
}

fn run_sim(v: &ZooVerifier, x: &Graph, params: SimParams, sid: u64, rng: &mut ChaCha8Rng) -> Result<SimView> {
    let mut oracle = make_oracle(Box::new(v.clone()), v.width())?;
    simulate(x, params, &mut oracle, v.advice(), v.initial_memory(sid), rng)
}

fn run_real(
    v: &ZooVerifier,
    x: &Graph,
    cycle: &[usize],
    lambda: usize,
    t: u32,
    cfg: &ExperimentConfig,
    sid: u64,
    rng: &mut ChaCha8Rng,
) -> Result<Transcript> {
    let strategy = ProverStrategy::Honest { cycle: cycle.to_vec() };
    let mut p = ProverState::new(sid, x.clone(), lambda, t, strategy, rng)?;
    let mut live = LiveVerifier::new(Box::new(v.clone()), sid)?;
    Ok(run_session(&mut p, &mut live, cfg.transport, sid, rng)?)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    let kind = cfg.validate()?;
    let start = Instant::now();
    let mut r = Report::new(cfg.clone());
    match kind {
        Experiment::MixedStateBound => mixed_state_bound(cfg, &mut r)?,
        Experiment::SimIterations => sim_iterations(cfg, &mut r)?,
        Experiment::Space => space(cfg, &mut r)?,
        Experiment::Completeness => completeness(cfg, &mut r)?,
        Experiment::Soundness => soundness(cfg, &mut r)?,
        Experiment::Binding => binding(cfg, &mut r)?,
        Experiment::Subspace => subspace(cfg, &mut r)?,
        Experiment::CloneNaive => clone_naive(cfg, &mut r)?,
        Experiment::Impossibility => impossibility(cfg, &mut r)?,
        Experiment::Extraction => extraction(cfg, &mut r)?,
        Experiment::ViewIndistinguishability => view_indistinguishability(cfg, &mut r)?,
        Experiment::Protocol => protocol(cfg, &mut r)?,
        Experiment::Sim => sim(cfg, &mut r)?,
        Experiment::Policy => policy(cfg, &mut r)?,
    }
    r.wall_clock_ms = start.elapsed().as_millis() as u64;
    if let Some(path) = &cfg.out {
        std::fs::write(path, r.to_json()?)?;
    }
    Ok(r)
}

fn mixed_state_bound(cfg: &ExperimentConfig, r: &mut Report) -> Result<()> {
    const SRC: &str = "simulator::bound_check";
    let (lambda, t, n) = (cfg.lambda.unwrap_or(16), cfg.t.unwrap_or(40), cfg.trials.unwrap_or(200));
    let x = Graph::petersen();
    r.param("lambda", lambda);
    r.param("verifiers", n);
    r.param("widths", cfg.width.map_or(vec![1, 2, 3], |m| vec![m]));
    let start = Instant::now();
    let reports = trials(n, cfg.seed, 0, |i, rng| {
        let m = cfg.width.unwrap_or(1 + (i % 3) as usize);
        let v = RandomVerifier::sample(m, x.clone(), lambda, t, rng)?;
        bound_check(&v, &x, lambda, t, rng)
    })?;
    r.runtime_limit("runtime_s", start.elapsed(), 60.0, SRC);
    let violations: usize = reports.iter().map(|b| b.violations).sum();
    let slack = reports.iter().map(|b| b.p_prime - b.rhs).fold(f64::INFINITY, f64::min);
    let ratio = reports.iter().map(|b| b.ratio).fold(f64::INFINITY, f64::min);
    let mut widths = Histogram::new();
    for b in &reports {
        count(&mut widths, format!("M={}", b.width));
    }
    r.histogram("width", widths);
    r.param("min_ratio", ratio);
    r.push(Metric::new("violations", violations as f64, Tolerance::AtMost { bound: 0.0 }, SRC));
    r.push(Metric::new("min_slack", slack, Tolerance::AtLeast { bound: -1e-9 }, SRC));
    Ok(())
}

fn sim_iterations(cfg: &ExperimentConfig, r: &mut Report) -> Result<()> {
    const SRC: &str = "simulator::rewind_iterations";
    let (lambda, t, n) = (cfg.lambda.unwrap_or(8), cfg.t.unwrap_or(40), cfg.trials.unwrap_or(1000));
    let m = cfg.width.unwrap_or(3);
    let x = Graph::petersen();
    let params = sim_params(lambda, t);
    let family: Vec<ZooKind> = [(0.5, 1), (0.7, 2), (0.9, 3)]
        .into_iter()
        .filter(|&(_, w)| w <= m)
        .map(|(c, w)| ZooKind::coin_with_cos2(c, w))
        .collect();
    r.param("lambda", lambda);
    r.param("width", m);
    r.param("runs", n);
    for (part, kind) in family.into_iter().enumerate() {
        let v = ZooVerifier::new(kind, m, x.clone(), lambda, t)?;
        let name = v.kind.name();
        let exact = bound_check(&v, &x, lambda, t, &mut trial_rng(cfg.seed, 100 + part as u32, 0))?;
        let (p, pp) = (exact.p, exact.p_prime);
        let runs = trials(n, cfg.seed, part as u32, |i, rng| {
            let mut oracle = make_oracle(Box::new(v.clone()), m)?;
            rewind_iterations(&x, params, &mut oracle, v.advice(), v.initial_memory(i), rng)
        })?;
        let iters: Vec<f64> = runs.iter().map(|o| o.unwrap_or(0) as f64).collect();
        let (mean, sigma) = mean_and_sigma(&iters)?;
        let looped: Vec<u64> = runs.iter().flatten().copied().collect();
        let threshold = lambda as f64 / pp;
        let tail = rate(looped.iter().filter(|&&it| it as f64 > threshold).count(), looped.len());
        let tail_bound = (-(lambda as f64)).exp();
        let expected = (1.0 - p) + p / pp;
        r.param(&format!("{name}.p"), p);
        r.param(&format!("{name}.p_prime"), pp);
        r.param(&format!("{name}.looped"), looped.len());
        r.push(
            Metric::new(
                format!("{name}.mean_iterations"),
                mean,
                Tolerance::AtMost { bound: f64::from(1u32 << (m + 1)) },
                SRC,
            )
            .with_sigma(sigma),
        );
        r.push(
            Metric::new(
                format!("{name}.mean_vs_runtime_bound"),
                mean,
                Tolerance::AtMost { bound: expected + cfg.sigmas * sigma },
                SRC,
            )
            .with_sigma(sigma),
        );
        let ts = binomial_sigma(tail_bound, looped.len() as u64);
        r.push(
            Metric::new(
                format!("{name}.tail_beyond_lambda_over_p_prime"),
                tail,
                Tolerance::AtMost { bound: tail_bound + cfg.sigmas * ts },
                SRC,
            )
            .with_sigma(ts),
        );
        let mut h = Histogram::new();
        for it in &runs {
            count(&mut h, it.map_or("main-abort".to_string(), |k| format!("{k:04}")));
        }
        r.histogram(&format!("{name}.iterations"), h);
    }
    Ok(())
}

/// Peak qubits of `view` over 2M.
fn peak_ratio(view: &SimView, width: usize) -> f64 {
    view.peak_qubits as f64 / (2 * width) as f64
}

fn space(cfg: &ExperimentConfig, r: &mut Report) -> Result<()> {
    const SRC: &str = "simulator::simulate";
    let (lambda, t, n) = (cfg.lambda.unwrap_or(8), cfg.t.unwrap_or(40), cfg.trials.unwrap_or(100));
    let x = Graph::petersen();
    let params = sim_params(lambda, t);
    let zoo = build_zoo(&x, lambda, t)?;
    r.param("lambda", lambda);
    r.param("runs_per_verifier", n);
    let (mut worst, mut over, mut total) = (0.0f64, 0usize, 0usize);
    for (part, v) in zoo.iter().enumerate() {
        let ratios = trials(n, cfg.seed, part as u32, |i, rng| {
            Ok(peak_ratio(&run_sim(v, &x, params, i, rng)?, v.width()))
        })?;
        let w = ratios.iter().copied().fold(0.0, f64::max);
        r.param(&format!("{}.max_peak_over_2m", v.kind.name()), w);
        worst = worst.max(w);
        over += ratios.iter().filter(|&&q| q > 1.0).count();
        total += ratios.len();
    }
    r.param("runs", total);
    r.push(Metric::new("runs_over_2m", over as f64, Tolerance::AtMost { bound: 0.0 }, SRC));
    r.push(Metric::new("max_peak_over_2m", worst, Tolerance::AtMost { bound: 1.0 }, SRC));
    Ok(())
}

fn completeness(cfg: &ExperimentConfig, r: &mut Report) -> Result<()> {
    const SRC: &str = "protocol::run_session";
    let (lambda, t, n) = (cfg.lambda.unwrap_or(8), cfg.t.unwrap_or(40), cfg.trials.unwrap_or(200));
    r.param("lambda", lambda);
    r.param("t", t);
    r.param("sessions", n);
    r.param("transport", cfg.transport);
    let start = Instant::now();
    let verdicts = trials(n, cfg.seed, 0, |i, rng| {
        let (x, cycle) = Graph::random_hamiltonian(YES_VERTICES, 0.3, rng);
        let mut p = ProverState::new(i, x.clone(), lambda, t, ProverStrategy::Honest { cycle }, rng)?;
        let mut v = VerifierState::new(i, x, lambda, t)?;
        Ok(run_session(&mut p, &mut v, cfg.transport, i, rng)?.verdict)
    })?;
    r.runtime_limit("runtime_s", start.elapsed(), 120.0, SRC);
    let mut h = Histogram::new();
    for v in &verdicts {
        count(&mut h, v);
    }
    r.histogram("verdict", h);
    let acc = rate(verdicts.iter().filter(|v| v.is_accept()).count(), verdicts.len());
    r.push(Metric::new("accept_rate", acc, Tolerance::AtLeast { bound: 1.0 }, SRC));
    Ok(())
}

/// Accept rate of `make`'s prover against the honest verifier on `x`.
fn cheating_rate(
    cfg: &ExperimentConfig,
    x: &Graph,
    n: u64,
    part: u32,
    make: impl Fn(u64, &mut ChaCha8Rng) -> Result<ProverState> + Sync,
    lambda: usize,
    t: u32,
) -> Result<(f64, Histogram)> {
    let verdicts = trials(n, cfg.seed, part, |i, rng| {
        let mut p = make(i, rng)?;
        let mut v = VerifierState::new(i, x.clone(), lambda, t)?;
        Ok(run_session(&mut p, &mut v, cfg.transport, i, rng)?.verdict)
    })?;
    let mut h = Histogram::new();
    for v in &verdicts {
        count(&mut h, v);
    }
    Ok((rate(verdicts.iter().filter(|v| v.is_accept()).count(), verdicts.len()), h))
}

fn soundness(cfg: &ExperimentConfig, r: &mut Report) -> Result<()> {
    const SRC: &str = "adversary::provers";
    let (lambda, t, n) = (cfg.lambda.unwrap_or(8), cfg.t.unwrap_or(40), cfg.trials.unwrap_or(10_000));
    let n_maul = (n / 10).max(1);
    let x = Graph::petersen();
    r.param("lambda", lambda);
    r.param("t", t);
    r.param("guessing_trials", n);
    r.param("mauling_trials", n_maul);
    r.param("guessing_exact", 0.5f64.powi(lambda as i32));

    let (g, hg) = cheating_rate(cfg, &x, n, 0, |i, rng| guessing_prover(i, &x, lambda, t, rng), lambda, t)?;
    let ceiling = lambda as f64 * 0.5f64.powi(lambda as i32);
    let sg = binomial_sigma(ceiling, n);
    r.histogram("guessing.verdict", hg);
    r.push(
        Metric::new("guessing.accept_rate", g, Tolerance::AtMost { bound: ceiling + cfg.sigmas * sg }, SRC)
            .with_sigma(sg),
    );

    let (m, hm) = cheating_rate(cfg, &x, n_maul, 1, |i, rng| mauling_prover(i, &x, lambda, t, rng), lambda, t)?;
    let floor = 0.5f64.powi(t as i32);
    let sm = binomial_sigma(floor, n_maul);
    r.histogram("mauling.verdict", hm);
    r.push(
        Metric::new("mauling.accept_rate", m, Tolerance::AtMost { bound: floor + cfg.sigmas * sm }, SRC)
            .with_sigma(sm),
    );
    Ok(())
}

fn binding(cfg: &ExperimentConfig, r: &mut Report) -> Result<()> {
    const SRC: &str = "crypto::commit::binding_exhaustive";
    let lambda = cfg.lambda.unwrap_or(4);
    let b = binding_exhaustive(lambda)?;
    r.param("lambda", lambda);
    r.param("receiver_msgs", b.receiver_msgs);
    r.param("equivocable", b.equivocable);
    r.push(Metric::new(
        "equivocable_fraction",
        b.fraction(),
        Tolerance::AtMost { bound: 0.5f64.powi(lambda as i32) },
        SRC,
    ));
    Ok(())
}

fn subspace(cfg: &ExperimentConfig, r: &mut Report) -> Result<()> {
    let n_max = cfg.n.unwrap_or(8);
    let n = cfg.trials.unwrap_or(50);
    let dims: Vec<usize> = (2..=n_max).step_by(2).collect();
    r.param("dims", &dims);
    r.param("trials", n);
    let pick = |i: u64| dims[i as usize % dims.len()];

    let test = trials(n, cfg.seed, 0, |i, rng| {
        let d = pick(i);
        let a = Subspace::sample(d, d / 2, rng)?;
        let mut oracle = SubspaceOracleHandle::new(a.clone());
        let state = a.prepare_state();
        let p = oracle.test_pass_probability(&state)?;
        let (pass, post) = oracle.test_state(&state, rng)?;
        let fid = if pass { post.fidelity_with_pure(&a.state_vector()) } else { 0.0 };
        Ok(((1.0 - p).abs(), (1.0 - fid).abs()))
    })?;
    let src = "subspace::oracle::test_state";
    let worst = |f: fn(&(f64, f64)) -> f64| test.iter().map(f).fold(0.0, f64::max);
    r.push(Metric::new("test.max_pass_deficit", worst(|x| x.0), Tolerance::AtMost { bound: 1e-12 }, src));
    r.push(Metric::new("test.max_fidelity_deficit", worst(|x| x.1), Tolerance::AtMost { bound: 1e-12 }, src));

    let routes = trials(n, cfg.seed, 1, |i, rng| {
        let d = pick(i);
        let (a, _) = orthonormal_subspace(d, rng)?;
        let rho = if i % 2 == 0 { random_pure(d, rng)? } else { random_mixed(d, rng)? };
        let direct = project_a_branches(&a, &rho, ProjectRoute::Direct)?;
        let via = project_a_branches(&a, &rho, ProjectRoute::ViaCa)?;
        let mut diff = 0.0f64;
        for ((p, s), (q, u)) in direct.iter().zip(via.iter()) {
            diff = diff.max((p - q).abs());
            let weighted = |s: &Option<QState>, w: f64| {
                s.as_ref().map_or(CMatrix::zeros(1 << d), |s| s.density_matrix().scale(C64::new(w, 0.0)))
            };
            diff = diff.max(weighted(s, *p).max_abs_diff(&weighted(u, *q)));
        }
        Ok(diff)
    })?;
    r.push(Metric::new(
        "project.max_route_difference",
        routes.iter().copied().fold(0.0, f64::max),
        Tolerance::AtMost { bound: 1e-9 },
        "subspace::ca::project_a_branches",
    ));

    let ca = trials(n, cfg.seed, 2, |i, rng| {
        let d = pick(i);
        let (a, basis) = orthonormal_subspace(d, rng)?;
        let circuit = build_ca_from_basis(d, &basis)?;
        let mut s = QState::zero(basis.len() + d);
        s.apply_circuit(&circuit)?;
        let target = QState::zero(basis.len()).tensor(&a.prepare_state());
        let amps = target.amplitudes().expect("pure target");
        Ok((1.0 - s.fidelity_with_pure(amps)).abs())
    })?;
    r.push(Metric::new(
        "ca.max_fidelity_deficit",
        ca.iter().copied().fold(0.0, f64::max),
        Tolerance::AtMost { bound: 1e-12 },
        "subspace::ca::build_ca_from_basis",
    ));
    Ok(())
}

fn clone_naive(cfg: &ExperimentConfig, r: &mut Report) -> Result<()> {
    const SRC: &str = "subspace::clone::clone_experiment";
    const CHUNKS: u64 = 100;
    let dims = cfg.n.map_or(vec![4, 6], |n| vec![n]);
    let n = cfg.trials.unwrap_or(10_000);
    r.param("dims", &dims);
    r.param("trials", n);
    let strategies = [CloneStrategy::MeasureAndResend, CloneStrategy::IdentityPad];
    let mut part = 0;
    for &d in &dims {
        for s in strategies {
            let per = n.div_ceil(CHUNKS);
            let chunks = trials(CHUNKS, cfg.seed, part, |_, rng| clone_experiment(s, d, per, rng))?;
            part += 1;
            let (hits, total): (u64, u64) = chunks.iter().fold((0, 0), |(h, t), c| (h + c.successes, t + c.trials));
            let predicted = s.predicted_success(d);
            let sigma = binomial_sigma(predicted, total);
            r.push(
                Metric::new(
                    format!("{s}.n{d}.success_rate"),
                    hits as f64 / total as f64,
                    Tolerance::Within { target: predicted, tol: cfg.sigmas * sigma },
                    SRC,
                )
                .with_sigma(sigma),
            );
        }
    }
    Ok(())
}

/// Outcome of one policy run against a fresh V′.
struct PolicyRun {
    verdict: Option<Verdict>,
    events: EventCounters,
    probes: usize,
    probe_hits: usize,
}

fn policy_run(
    policy: SimPolicy,
    k: usize,
    n: usize,
    x: &Graph,
    lambda: usize,
    t: u32,
    sid: u64,
    rng: &mut ChaCha8Rng,
) -> Result<PolicyRun> {
    let honest = VerifierState::new(sid, x.clone(), lambda, t)?;
    let mut v = build_contrived_verifier(k, n, &honest, rng)?;
    let advice = v.advice();
    let params = PolicyParams {
        x: x.clone(),
        lambda,
        t,
        session_id: sid,
    };
    let out = run_policy(policy, &mut v, advice, &params, rng)?;
    let log = crate::adversary::ContrivedOracle::log(&v);
    let probe_hits = out.probes.iter().filter(|&&i| log.records()[i].state_successful).count();
    Ok(PolicyRun {
        verdict: out.verdict,
        events: crate::adversary::classify_queries(log, k),
        probes: out.probes.len(),
        probe_hits,
    })
}

fn merged(runs: &[PolicyRun]) -> EventCounters {
    let mut ev = EventCounters::default();
    for r in runs {
        ev.merge(&r.events);
    }
    ev
}

fn impossibility(cfg: &ExperimentConfig, r: &mut Report) -> Result<()> {
    const SRC: &str = "adversary::events::classify_queries";
    let (k, n) = (cfg.rounds.unwrap_or(6), cfg.n.unwrap_or(8));
    let (lambda, t, runs) = (cfg.lambda.unwrap_or(8), cfg.t.unwrap_or(40), cfg.trials.unwrap_or(1000));
    const FORGE_LAMBDA: usize = 16;
    const FORGE_VERIFIERS: u64 = 100;
    const FORGE_ATTEMPTS: usize = 1000;
    let (x, _) = yes_instance(cfg.seed);
    r.param("rounds", k);
    r.param("n", n);
    r.param("lambda", lambda);
    r.param("runs", runs);

    let honest = trials(runs, cfg.seed, 0, |i, rng| policy_run(SimPolicy::StraightLine, k, n, &x, lambda, t, i, rng))?;
    let ev = merged(&honest);
    r.param("straight-line.events", &ev);
    r.push(Metric::new("straight-line.events", ev.total() as f64, Tolerance::AtMost { bound: 0.0 }, SRC));
    let acc = rate(honest.iter().filter(|p| p.verdict.as_ref().is_some_and(Verdict::is_accept)).count(), honest.len());
    r.push(Metric::new(
        "straight-line.accept_rate",
        acc,
        Tolerance::AtLeast { bound: 1.0 },
        "adversary::policy::run_policy",
    ));

    let floor = 0.5f64.powf(n as f64 / 2.0);
    let probes = [
        SimPolicy::OutOfOrder { probe: Probe::Zero },
        SimPolicy::OutOfOrder { probe: Probe::Plus },
        SimPolicy::RepeatQuery,
    ];
    for (part, p) in probes.into_iter().enumerate() {
        let out = trials(runs, cfg.seed, 1 + part as u32, |i, rng| policy_run(p, k, n, &x, lambda, t, i, rng))?;
        let (hits, total) = out.iter().fold((0, 0), |(h, m), o| (h + o.probe_hits, m + o.probes));
        let s = binomial_sigma(floor, total as u64);
        let name = policy_name(p);
        r.param(&format!("{name}.events"), merged(&out));
        r.param(&format!("{name}.probes"), total);
        r.push(
            Metric::new(
                format!("{name}.state_successful_rate"),
                rate(hits, total),
                Tolerance::AtMost { bound: floor + cfg.sigmas * s },
                "adversary::policy::run_policy",
            )
            .with_sigma(s),
        );
    }

    let forged = trials(FORGE_VERIFIERS, cfg.seed, 10, |i, rng| {
        let honest = VerifierState::new(i, x.clone(), FORGE_LAMBDA, t)?;
        let mut v = build_contrived_verifier(k.max(2), n, &honest, rng)?;
        let advice = v.advice();
        let params = PolicyParams {
            x: x.clone(),
            lambda: FORGE_LAMBDA,
            t,
            session_id: i,
        };
        let answered = run_forgeries(&mut v, advice, &params, FORGE_ATTEMPTS, rng)?;
        let ev = crate::adversary::classify_queries(crate::adversary::ContrivedOracle::log(&v), k.max(2));
        Ok((answered, ev.d))
    })?;
    let (answered, d) = forged.iter().fold((0, 0), |(a, d), f| (a + f.0, d + f.1));
    r.param("forge.lambda", FORGE_LAMBDA);
    r.param("forge.attempts", FORGE_VERIFIERS * FORGE_ATTEMPTS as u64);
    r.push(Metric::new("forge.d_events", d as f64, Tolerance::AtMost { bound: 0.0 }, SRC));
    r.push(Metric::new(
        "forge.answered",
        answered as f64,
        Tolerance::AtMost { bound: 0.0 },
        "adversary::policy::run_forgeries",
    ));
    Ok(())
}

fn policy_name(p: SimPolicy) -> &'static str {
    match p {
        SimPolicy::StraightLine => "straight-line",
        SimPolicy::OutOfOrder { probe: Probe::Zero } => "out-of-order",
        SimPolicy::OutOfOrder { probe: Probe::Plus } => "out-of-order-plus",
        SimPolicy::OutOfOrder {
            probe: Probe::RandomBasis,
        } => "out-of-order-basis",
        SimPolicy::RepeatQuery => "repeat-query",
        SimPolicy::SkipQuery => "skip-query",
        SimPolicy::ForgeTag => "forge-tag",
    }
}

fn extraction(cfg: &ExperimentConfig, r: &mut Report) -> Result<()> {
    const SRC: &str = "adversary::extract::run_extracted";
    let (k, n) = (cfg.rounds.unwrap_or(6), cfg.n.unwrap_or(6));
    let (lambda, t, runs) = (cfg.lambda.unwrap_or(8), cfg.t.unwrap_or(40), cfg.trials.unwrap_or(500));
    r.param("rounds", k);
    r.param("n", n);
    r.param("lambda", lambda);
    r.param("runs", runs);
    let extract = |part: u32, yes: bool, mode: CiphertextMode| {
        trials(runs, cfg.seed, part, |i, rng| {
            let x = if yes {
                Graph::random_hamiltonian(YES_VERTICES, 0.3, rng).0
            } else {
                Graph::petersen()
            };
            let mut live = VerifierState::new(i, x.clone(), lambda, t)?;
            let params = PolicyParams {
                x,
                lambda,
                t,
                session_id: i,
            };
            run_extracted(SimPolicy::StraightLine, k, n, &mut live, mode, &params, rng)
        })
    };
    let yes = extract(0, true, CiphertextMode::Zero)?;
    let no = extract(1, false, CiphertextMode::Zero)?;
    let real = extract(2, true, CiphertextMode::RealState)?;
    let acc = |o: &[crate::adversary::ExtractionOutcome]| rate(o.iter().filter(|e| e.accepted()).count(), o.len());
    let hist = |o: &[crate::adversary::ExtractionOutcome]| {
        let mut h = Histogram::new();
        for e in o {
            count(&mut h, e.verdict.as_ref().map_or("halted".to_string(), |v| v.to_string()));
        }
        h
    };
    let (ay, an) = (acc(&yes), acc(&no));
    r.push(Metric::new("yes.accept_rate", ay, Tolerance::AtLeast { bound: 0.95 }, SRC));
    r.push(Metric::new("no.accept_rate", an, Tolerance::AtMost { bound: 0.05 }, SRC));
    r.push(Metric::new("decision_gap", ay - an, Tolerance::AtLeast { bound: 0.9 }, SRC));
    let events: usize = yes.iter().chain(&no).map(|e| e.events.total()).sum();
    r.push(Metric::new(
        "events",
        events as f64,
        Tolerance::AtMost { bound: 0.0 },
        "adversary::events::classify_queries",
    ));
    // H₂: Enc(0) versus Enc(γ) must not move the verdict distribution
    let (hz, hr) = (hist(&yes), hist(&real));
    let (_, a, b) = align(&hz, &hr);
    let chi = chi2_test(&a, &b)?;
    r.param("h2.tv", tv_distance(&a, &b)?);
    r.push(Metric::new("h2.chi2_p", chi.p_value, Tolerance::AtLeast { bound: cfg.alpha }, SRC));
    r.histogram("yes.verdict", hz);
    r.histogram("yes-real-ciphertext.verdict", hr);
    r.histogram("no.verdict", hist(&no));
    Ok(())
}

fn view_indistinguishability(cfg: &ExperimentConfig, r: &mut Report) -> Result<()> {
    const SRC: &str = "simulator::simulate";
    let (lambda, t, n) = (cfg.lambda.unwrap_or(16), cfg.t.unwrap_or(40), cfg.trials.unwrap_or(2000));
    let (x, cycle) = yes_instance(cfg.seed);
    let params = sim_params(lambda, t);
    r.param("lambda", lambda);
    r.param("t", t);
    r.param("samples", n);
    let mut worst_peak = 0.0f64;
    for (part, v) in build_zoo(&x, lambda, t)?.iter().enumerate() {
        let name = v.kind.name();
        let real = trials(n, cfg.seed, 2 * part as u32, |i, rng| {
            Ok(observable(&run_real(v, &x, &cycle, lambda, t, cfg, i, rng)?))
        })?;
        let sim = trials(n, cfg.seed, 2 * part as u32 + 1, |i, rng| {
            let view = run_sim(v, &x, params, i, rng)?;
            Ok((observable(&view.transcript), peak_ratio(&view, v.width())))
        })?;
        worst_peak = sim.iter().map(|s| s.1).fold(worst_peak, f64::max);
        let (mut hr, mut hs) = (Histogram::new(), Histogram::new());
        for o in &real {
            count(&mut hr, o);
        }
        for (o, _) in &sim {
            count(&mut hs, o);
        }
        let (_, a, b) = align(&hr, &hs);
        let chi = chi2_test(&a, &b)?;
        r.param(&format!("{name}.tv"), tv_distance(&a, &b)?);
        r.param(&format!("{name}.chi2"), chi);
        r.push(Metric::new(
            format!("{name}.chi2_p"),
            chi.p_value,
            Tolerance::AtLeast { bound: cfg.alpha },
            SRC,
        ));
        r.histogram(&format!("{name}.real"), hr);
        r.histogram(&format!("{name}.sim"), hs);
    }
    r.push(Metric::new("sim.max_peak_over_2m", worst_peak, Tolerance::AtMost { bound: 1.0 }, SRC));
    Ok(())
}

fn protocol(cfg: &ExperimentConfig, r: &mut Report) -> Result<()> {
    const SRC: &str = "protocol::run_session";
    let (lambda, t, n) = (cfg.lambda.unwrap_or(8), cfg.t.unwrap_or(40), cfg.trials.unwrap_or(10));
    let prover = cfg.prover.clone().unwrap_or_else(|| "honest".into());
    r.param("prover", &prover);
    r.param("lambda", lambda);
    r.param("t", t);
    r.param("sessions", n);
    r.param("transport", cfg.transport);
    let out = trials(n, cfg.seed, 0, |i, rng| {
        let (x, strategy) = match prover.as_str() {
            "honest" => {
                let (x, cycle) = Graph::random_hamiltonian(YES_VERTICES, 0.3, rng);
                (x, ProverStrategy::Honest { cycle })
            }
            "guessing" => (Graph::petersen(), ProverStrategy::Guessing),
            _ => (Graph::petersen(), ProverStrategy::Mauling),
        };
        let mut p = ProverState::new(i, x.clone(), lambda, t, strategy, rng)?;
        let mut v = VerifierState::new(i, x.clone(), lambda, t)?;
        let tr = run_session(&mut p, &mut v, cfg.transport, i, rng)?;
        let replayed = replay_verify(&tr, &x, lambda, t)?;
        Ok((tr.verdict.clone(), replayed == tr.verdict))
    })?;
    let mut h = Histogram::new();
    for (v, _) in &out {
        count(&mut h, v);
    }
    r.histogram("verdict", h);
    let acc = rate(out.iter().filter(|o| o.0.is_accept()).count(), out.len());
    let tol = match prover.as_str() {
        "honest" => Tolerance::AtLeast { bound: 1.0 },
        "guessing" => {
            let c = lambda as f64 * 0.5f64.powi(lambda as i32);
            Tolerance::AtMost { bound: c + cfg.sigmas * binomial_sigma(c, n) }
        }
        _ => {
            let c = 0.5f64.powi(t as i32);
            Tolerance::AtMost { bound: c + cfg.sigmas * binomial_sigma(c, n) }
        }
    };
    r.push(Metric::new("accept_rate", acc, tol, SRC));
    r.push(Metric::new(
        "replay_agreement",
        rate(out.iter().filter(|o| o.1).count(), out.len()),
        Tolerance::AtLeast { bound: 1.0 },
        "protocol::replay_verify",
    ));
    Ok(())
}

fn sim(cfg: &ExperimentConfig, r: &mut Report) -> Result<()> {
    const SRC: &str = "simulator::simulate";
    let (lambda, t, n) = (cfg.lambda.unwrap_or(8), cfg.t.unwrap_or(40), cfg.trials.unwrap_or(20));
    let name = cfg.verifier.clone().unwrap_or_else(|| "honest".into());
    let width = cfg.width.unwrap_or(1);
    let x = Graph::petersen();
    let v = zoo_by_name(&name, width, &x, lambda, t)?;
    let exact = bound_check(&v, &x, lambda, t, &mut trial_rng(cfg.seed, 1, 0));
    r.param("verifier", v.name());
    r.param("width", width);
    r.param("lambda", lambda);
    r.param("runs", n);
    let out = trials(n, cfg.seed, 0, |i, rng| {
        let view = run_sim(&v, &x, sim_params(lambda, t), i, rng)?;
        let replayed = replay_verify(&view.transcript, &x, lambda, t)?;
        Ok((
            observable(&view.transcript),
            view.istar.map_or(0, |_| view.iteration_count) as f64,
            peak_ratio(&view, width),
            replayed == view.transcript.verdict,
        ))
    })?;
    let mut h = Histogram::new();
    for o in &out {
        count(&mut h, &o.0);
    }
    r.histogram("observable", h);
    r.push(Metric::new(
        "max_peak_over_2m",
        out.iter().map(|o| o.2).fold(0.0, f64::max),
        Tolerance::AtMost { bound: 1.0 },
        SRC,
    ));
    r.push(Metric::new(
        "replay_agreement",
        rate(out.iter().filter(|o| o.3).count(), out.len()),
        Tolerance::AtLeast { bound: 1.0 },
        "protocol::replay_verify",
    ));
    let iters: Vec<f64> = out.iter().map(|o| o.1).collect();
    let (mean, sigma) = mean_and_sigma(&iters)?;
    match exact {
        Ok(b) if b.p_prime > 0.0 => {
            r.param("p", b.p);
            r.param("p_prime", b.p_prime);
            let bound = (1.0 - b.p) + b.p / b.p_prime;
            r.push(
                Metric::new(
                    "mean_iterations",
                    mean,
                    Tolerance::AtMost { bound: bound + cfg.sigmas * sigma },
                    "simulator::rewind_iterations",
                )
                .with_sigma(sigma),
            );
        }
        // wide verifiers have no exact p′; the count is still reported
        _ => r.param("mean_iterations", mean),
    }
    Ok(())
}

fn policy(cfg: &ExperimentConfig, r: &mut Report) -> Result<()> {
    const SRC: &str = "adversary::policy::run_policy";
    let p: SimPolicy = cfg.policy.as_deref().unwrap_or("straight-line").parse()?;
    let (k, n) = (cfg.rounds.unwrap_or(6), cfg.n.unwrap_or(8));
    let (lambda, t, runs) = (cfg.lambda.unwrap_or(8), cfg.t.unwrap_or(40), cfg.trials.unwrap_or(100));
    let (x, _) = yes_instance(cfg.seed);
    r.param("policy", policy_name(p));
    r.param("rounds", k);
    r.param("n", n);
    r.param("lambda", lambda);
    r.param("runs", runs);
    let out = trials(runs, cfg.seed, 0, |i, rng| policy_run(p, k, n, &x, lambda, t, i, rng))?;
    let ev = merged(&out);
    r.param("events", &ev);
    let mut h = Histogram::new();
    for o in &out {
        count(&mut h, o.verdict.as_ref().map_or("stopped".to_string(), |v| v.to_string()));
    }
    r.histogram("verdict", h);
    r.param("accept_rate", rate(out.iter().filter(|o| o.verdict.as_ref().is_some_and(Verdict::is_accept)).count(), out.len()));
    match p {
        SimPolicy::StraightLine => {
            r.push(Metric::new("events", ev.total() as f64, Tolerance::AtMost { bound: 0.0 }, SRC));
        }
        SimPolicy::ForgeTag => {
            r.push(Metric::new("d_events", ev.d as f64, Tolerance::AtMost { bound: 0.0 }, SRC));
        }
        _ => {
            let (hits, total) = out.iter().fold((0, 0), |(h, m), o| (h + o.probe_hits, m + o.probes));
            let floor = 0.5f64.powf(n as f64 / 2.0);
            let s = binomial_sigma(floor, total as u64);
            r.push(
                Metric::new(
                    "state_successful_rate",
                    rate(hits, total),
                    Tolerance::AtMost { bound: floor + cfg.sigmas * s },
                    SRC,
                )
                .with_sigma(s),
            );
        }
    }
    Ok(())
}

/// Every acceptance experiment at its defaults.
pub fn run_acceptance(seed: u64) -> Result<Vec<Report>> {
    Experiment::ACCEPTANCE
        .iter()
        .map(|e| run_experiment(&ExperimentConfig::new(e.name(), seed)))
        .collect()
}

/// Wall-clock cost of the main operations at the given parameters.
pub fn bench(lambda: usize, t: u32, reps: u32, seed: u64) -> Result<BTreeMap<String, f64>> {
    crate::crypto::check_lambda(lambda)?;
    if t == 0 {
        return Err(Error::Config("t must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (x, cycle) = yes_instance(seed);
    let mut out = BTreeMap::new();
    let mut time = |name: &str, f: &mut dyn FnMut(&mut dyn RngCore) -> Result<()>| -> Result<()> {
        let start = Instant::now();
        for _ in 0..reps {
            f(&mut rng)?;
        }
        out.insert(name.to_string(), start.elapsed().as_secs_f64() * 1e3 / f64::from(reps.max(1)));
        Ok(())
    };
    time("session_ms", &mut |rng| {
        let mut p = ProverState::new(0, x.clone(), lambda, t, ProverStrategy::Honest { cycle: cycle.clone() }, rng)?;
        let mut v = VerifierState::new(0, x.clone(), lambda, t)?;
        run_session(&mut p, &mut v, crate::protocol::Transport::Direct, 0, rng)?;
        Ok(())
    })?;
    let coin = ZooVerifier::new(ZooKind::coin_with_cos2(0.7, 1), 3, x.clone(), lambda, t)?;
    time("simulate_quantum_coin_ms", &mut |rng| {
        let mut oracle = make_oracle(Box::new(coin.clone()), 3)?;
        simulate(&x, sim_params(lambda, t), &mut oracle, coin.advice(), coin.initial_memory(0), rng)?;
        Ok(())
    })?;
    time("bound_check_m3_ms", &mut |rng| {
        let v = RandomVerifier::sample(3, x.clone(), lambda, t, rng)?;
        bound_check(&v, &x, lambda, t, rng)?;
        Ok(())
    })?;
    Ok(out)
}
