use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spacezk::adversary::{ZooKind, ZooVerifier};
use spacezk::protocol::{
    open_alphas, replay_verify, run_session, Payload, ProverState, ProverStrategy, Transport, Verdict,
};
use spacezk::qsim::{CMatrix, QState, C64};
use spacezk::simulator::{
    bound_check, effect_from_traces, make_oracle, simulate, termination_tail, LiveVerifier, SimParams, Verifier,
};
use spacezk::wi::Graph;
use spacezk::Error;

const T: u32 = 8;

fn zoo(kind: ZooKind, m: usize, x: &Graph, lambda: usize) -> ZooVerifier {
    ZooVerifier::new(kind, m, x.clone(), lambda, T).unwrap()
}

fn params(lambda: usize) -> SimParams {
    SimParams {
        lambda,
        t: T,
        max_iters: 100_000,
    }
}

fn sim(v: ZooVerifier, x: &Graph, lambda: usize, seed: u64) -> spacezk::Result<spacezk::simulator::SimView> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (advice, st0, m) = (v.advice(), v.initial_memory(seed), v.width());
    let mut oracle = make_oracle(Box::new(v), m)?;
    simulate(x, params(lambda), &mut oracle, advice, st0, &mut rng)
}

#[test]
fn wrapped_honest_verifier_reproduces_a_live_session() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (x, cycle) = Graph::random_hamiltonian(6, 0.3, &mut rng);
    let mut live = LiveVerifier::new(Box::new(zoo(ZooKind::Honest, 1, &x, 8)), 5).unwrap();
    let mut p = ProverState::new(5, x.clone(), 8, T, ProverStrategy::Honest { cycle }, &mut rng).unwrap();
    let tr = run_session(&mut p, &mut live, Transport::Direct, 5, &mut rng).unwrap();
    assert_eq!(tr.verdict, Verdict::Accept);
}

#[test]
fn width_mismatch_is_a_dimension_error() {
    let x = Graph::petersen();
    let v = zoo(ZooKind::Honest, 2, &x, 8);
    assert!(matches!(make_oracle(Box::new(v), 3), Err(Error::Dimension(_))));
}

#[test]
fn abort_iff_watched_bit_is_zero() {
    let x = Graph::petersen();
    let kind = ZooKind::BitConditional {
        watch: 0,
        abort_on: false,
    };
    for seed in 0..40 {
        let view = sim(zoo(kind.clone(), 1, &x, 8), &x, 8, seed).unwrap();
        let b0 = view.transcript.challenge_bits().unwrap().get(0);
        assert_eq!(view.transcript.verdict == (Verdict::Abort { step: 4 }), !b0, "seed {seed}");
    }
}

#[test]
fn always_abort_ends_sim_after_step_one() {
    let x = Graph::petersen();
    let view = sim(zoo(ZooKind::AlwaysAbort, 1, &x, 8), &x, 8, 3).unwrap();
    assert_eq!(view.transcript.verdict, Verdict::Abort { step: 4 });
    assert_eq!(view.iteration_count, 0);
}

#[test]
fn never_abort_loop_runs_once_and_sim_convinces_on_a_no_instance() {
    let x = Graph::petersen();
    for seed in 0..5 {
        let view = sim(zoo(ZooKind::NeverAbort, 2, &x, 16), &x, 16, seed).unwrap();
        assert_eq!(view.iteration_count, 1);
        assert_eq!(view.transcript.verdict, Verdict::Accept);
        assert!(view.peak_qubits <= 4);
        view.transcript.check_structure().unwrap();
        assert_eq!(replay_verify(&view.transcript, &x, 16, T).unwrap(), Verdict::Accept);
    }
}

#[test]
fn output_transcript_keeps_the_main_thread() {
    let x = Graph::petersen();
    for seed in 0..10 {
        let view = sim(zoo(ZooKind::coin_with_cos2(0.7, 1), 3, &x, 8), &x, 8, seed).unwrap();
        let msgs = &view.transcript.messages;
        let (Payload::CStar { rmsg, .. }, Payload::AlphaCommitments { coms }) = (&msgs[1].payload, &msgs[2].payload)
        else {
            panic!("unexpected opening messages");
        };
        let b = view.transcript.challenge_bits().unwrap();
        if let Some(m) = msgs.get(4).filter(|m| !m.payload.is_terminal()) {
            let Payload::FirstOpenings { openings, .. } = &m.payload else {
                panic!("round 4 is not the first openings");
            };
            assert!(open_alphas(rmsg, coms, b, openings, false).is_some());
        }
        assert!(view.peak_qubits <= 6);
    }
}

#[test]
fn iteration_budget_is_reported() {
    // λ = 1: the only b′ ≠ b is b_0 = 1, which always aborts
    let x = Graph::petersen();
    let kind = ZooKind::BitConditional {
        watch: 0,
        abort_on: true,
    };
    let v = zoo(kind, 1, &x, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (advice, st0) = (v.advice(), v.initial_memory(0));
    let mut oracle = make_oracle(Box::new(v), 1).unwrap();
    let p = SimParams {
        lambda: 1,
        t: T,
        max_iters: 50,
    };
    let mut saw_budget = false;
    for _ in 0..8 {
        match simulate(&x, p, &mut oracle, advice.clone(), st0.clone(), &mut rng) {
            Err(Error::IterationBudgetExceeded { max_iters: 50 }) => saw_budget = true,
            Ok(view) => assert_eq!(view.transcript.verdict, Verdict::Abort { step: 4 }),
            Err(e) => panic!("{e}"),
        }
    }
    assert!(saw_budget);
}

#[test]
fn effect_is_recovered_from_traces() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let u = CMatrix::random_unitary(4, &mut rng);
    // Λ = U diag(0.1, 0.4, 0.9, 1) U†
    let mut d = CMatrix::zeros(4);
    for (i, v) in [0.1, 0.4, 0.9, 1.0].into_iter().enumerate() {
        d.set(i, i, C64::new(v, 0.0));
    }
    let lam = u.mul(&d).mul(&u.dagger());
    let got = effect_from_traces(2, |op| Ok(lam.trace_product(&op.density_matrix()).re)).unwrap();
    assert!(got.max_abs_diff(&lam) < 1e-12);
}

#[test]
fn bound_check_matches_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = Graph::petersen();
    let lambda = 16;
    let cases = [
        (ZooKind::NeverAbort, 2),
        (ZooKind::AlwaysAbort, 1),
        (
            ZooKind::BitConditional {
                watch: 0,
                abort_on: true,
            },
            1,
        ),
        (ZooKind::coin_with_cos2(0.7, 1), 3),
        (ZooKind::coin_with_cos2(0.4, 2), 2),
        (ZooKind::DelayedAbort, 1),
    ];
    for (kind, m) in cases {
        let v = zoo(kind, m, &x, lambda);
        let r = bound_check(&v, &x, lambda, T, &mut rng).unwrap();
        assert!((r.p - v.predicted_p()).abs() < 1e-9, "{}: p = {}", r.verifier, r.p);
        assert!((r.p_prime - v.predicted_p_prime()).abs() < 1e-9, "{}: p′ = {}", r.verifier, r.p_prime);
        assert_eq!(r.violations, 0);
    }
}

#[test]
fn bound_check_refuses_wide_verifiers() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let x = Graph::petersen();
    let v = zoo(ZooKind::Honest, 6, &x, 8);
    assert!(matches!(bound_check(&v, &x, 8, T, &mut rng), Err(Error::Mode(_))));
}

#[test]
fn termination_tail_is_geometric() {
    let x = Graph::petersen();
    let make = || -> Box<dyn Verifier> {
        Box::new(zoo(
            ZooKind::BitConditional {
                watch: 0,
                abort_on: true,
            },
            1,
            &Graph::petersen(),
            8,
        ))
    };
    let r = termination_tail(&make, &x, 8, T, 400, 7).unwrap();
    assert!((r.p_prime - (0.5 - 0.5 / 256.0)).abs() < 1e-12);
    let sigma = (r.bound * (1.0 - r.bound) / r.looped as f64).sqrt();
    assert!(r.tail <= r.bound + 3.0 * sigma, "tail {} over {} runs", r.tail, r.looped);
    // geometric mean 1/p′ ≈ 2
    assert!((r.mean_iterations - 1.0 / r.p_prime).abs() < 0.3);
}

#[test]
fn delayed_abort_lands_on_step_six() {
    let x = Graph::petersen();
    let mut seen = [false; 2];
    for seed in 0..20 {
        let view = sim(zoo(ZooKind::DelayedAbort, 1, &x, 8), &x, 8, seed).unwrap();
        match view.transcript.verdict {
            Verdict::Abort { step: 6 } => seen[0] = true,
            Verdict::Accept => seen[1] = true,
            ref v => panic!("unexpected {v}"),
        }
    }
    assert_eq!(seen, [true, true]);
}

#[test]
fn pure_and_mixed_advice_agree() {
    let v = zoo(ZooKind::coin_with_cos2(0.25, 2), 2, &Graph::petersen(), 8);
    let a = v.advice();
    assert!(a.is_pure());
    let mixed: QState = a.to_mixed();
    assert!((mixed.trace() - 1.0).abs() < 1e-12);
}
