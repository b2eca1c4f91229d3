use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spacezk::adversary::{
    build_contrived_verifier, build_zoo, classify_queries, guessing_prover, mauling_prover, run_extracted,
    run_policy, CiphertextMode, ContrivedOracle, PolicyParams, Probe, QueryLog, SimPolicy, VAnswer, VQuery, ZooKind,
    ZooVerifier,
};
use spacezk::protocol::{run_session, PartyStep, ProverState, ProverStrategy, Transport, Verdict, VerifierState};
use spacezk::simulator::{LiveVerifier, CHANNELS};
use spacezk::subspace::{project_a_branches, ProjectRoute};
use spacezk::wi::Graph;
use spacezk::Bits;

const T: u32 = 40;

fn three_sigma(p: f64, n: usize) -> f64 {
    3.0 * (p * (1.0 - p) / n as f64).sqrt()
}

fn params(x: &Graph, lambda: usize, sid: u64) -> PolicyParams {
    PolicyParams {
        x: x.clone(),
        lambda,
        t: T,
        session_id: sid,
    }
}

#[test]
fn zoo_covers_the_named_strategies() {
    let zoo = build_zoo(&Graph::petersen(), 8, T).unwrap();
    let names: Vec<String> = zoo.iter().map(|v| v.kind.name()).collect();
    for want in ["honest", "always-abort", "never-abort", "bit-conditional", "quantum-coin", "delayed-abort"] {
        assert!(names.iter().any(|n| n.starts_with(want)), "{want} missing from {names:?}");
    }
    assert!(zoo.iter().all(|v| spacezk::simulator::Verifier::width(v) <= 3));
}

#[test]
fn quantum_coin_non_abort_rate_follows_the_born_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (x, cycle) = Graph::random_hamiltonian(5, 0.2, &mut rng);
    let runs = 2000;
    let mut kept = 0;
    for sid in 0..runs {
        let v = ZooVerifier::new(ZooKind::coin_with_cos2(0.7, 1), 1, x.clone(), 4, 4).unwrap();
        let mut live = LiveVerifier::new(Box::new(v), sid).unwrap();
        let mut p = ProverState::new(sid, x.clone(), 4, 4, ProverStrategy::Honest { cycle: cycle.clone() }, &mut rng)
            .unwrap();
        let tr = run_session(&mut p, &mut live, Transport::Direct, sid, &mut rng).unwrap();
        if tr.verdict != (Verdict::Abort { step: 4 }) {
            assert_eq!(tr.verdict, Verdict::Accept);
            kept += 1;
        }
    }
    let rate = kept as f64 / runs as f64;
    assert!((rate - 0.7).abs() <= 0.03, "non-abort rate {rate}");
}

#[test]
fn guessing_prover_wins_at_the_exact_rate() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let x = Graph::petersen();
    let (lambda, runs) = (4, 2000);
    let mut wins = 0;
    for sid in 0..runs {
        let mut p = guessing_prover(sid, &x, lambda, T, &mut rng).unwrap();
        let mut v = VerifierState::new(sid, x.clone(), lambda, T).unwrap();
        let tr = run_session(&mut p, &mut v, Transport::Direct, sid, &mut rng).unwrap();
        wins += tr.verdict.is_accept() as usize;
    }
    // exact success 2^{−λ}; the WI soundness error at t = 40 is negligible
    let target = 0.5f64.powi(lambda as i32);
    let rate = wins as f64 / runs as f64;
    assert!((rate - target).abs() <= three_sigma(target, runs as usize), "rate {rate}");
    assert!(rate <= lambda as f64 * target);
}

#[test]
fn mauling_prover_never_convinces() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let x = Graph::petersen();
    for sid in 0..30 {
        let mut p = mauling_prover(sid, &x, 8, T, &mut rng).unwrap();
        let mut v = VerifierState::new(sid, x.clone(), 8, T).unwrap();
        let tr = run_session(&mut p, &mut v, Transport::Direct, sid, &mut rng).unwrap();
        assert_eq!(tr.verdict, Verdict::Reject { step: 7 });
    }
}

#[test]
fn honest_in_order_driving_has_no_events() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let (x, _) = Graph::random_hamiltonian(6, 0.3, &mut rng);
    for sid in 0..20 {
        let honest = VerifierState::new(sid, x.clone(), 8, T).unwrap();
        let mut vp = build_contrived_verifier(CHANNELS, 6, &honest, &mut rng).unwrap();
        let advice = vp.advice();
        let out = run_policy(SimPolicy::StraightLine, &mut vp, advice, &params(&x, 8, sid), &mut rng).unwrap();
        assert_eq!(out.verdict, Some(Verdict::Accept));
        assert!(vp.log().records().iter().all(|r| r.non_abort));
        assert_eq!(vp.log().len(), CHANNELS);
        let fid = out.final_y.unwrap().fidelity_with_pure(&vp.subspace(CHANNELS).state_vector());
        assert!((fid - 1.0).abs() < 1e-12);
        assert_eq!(classify_queries(vp.log(), CHANNELS).total(), 0);
    }
}

#[test]
fn zero_state_passes_a_subspace_check_with_probability_two_to_minus_half_n() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let n = 8;
    let honest = VerifierState::new(0, Graph::petersen(), 8, T).unwrap();
    let vp = build_contrived_verifier(CHANNELS, n, &honest, &mut rng).unwrap();
    let [(p0, _), _] = project_a_branches(vp.subspace(1), &Probe::Zero.state(n, &mut rng), ProjectRoute::Direct).unwrap();
    assert!((p0 - 0.5f64.powi(n as i32 / 2)).abs() < 1e-12);
    let [(p0, _), _] = project_a_branches(vp.subspace(2), &Probe::Plus.state(n, &mut rng), ProjectRoute::Direct).unwrap();
    assert!((p0 - 0.5f64.powi(n as i32 / 2)).abs() < 1e-12);
}

#[test]
fn out_of_order_probe_rate_is_at_the_overlap_floor() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let x = Graph::petersen();
    let (n, runs) = (6, 1500);
    let mut hits = 0;
    let mut j_events = 0;
    for sid in 0..runs {
        let honest = VerifierState::new(sid, x.clone(), 4, T).unwrap();
        let mut vp = build_contrived_verifier(CHANNELS, n, &honest, &mut rng).unwrap();
        let advice = vp.advice();
        let policy = SimPolicy::OutOfOrder { probe: Probe::Zero };
        let out = run_policy(policy, &mut vp, advice, &params(&x, 4, sid), &mut rng).unwrap();
        let probe = &vp.log().records()[out.probes[0]];
        hits += probe.state_successful as usize;
        j_events += classify_queries(vp.log(), CHANNELS).j.iter().sum::<usize>();
    }
    let target = 0.5f64.powi(n as i32 / 2);
    let rate = hits as f64 / runs as f64;
    assert!((rate - target).abs() <= three_sigma(target, runs as usize), "rate {rate}");
    // every successful out-of-turn probe is a J event
    assert_eq!(j_events, hits);
}

#[test]
fn replayed_ciphertext_is_refused() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let x = Graph::petersen();
    let honest = VerifierState::new(3, x.clone(), 4, T).unwrap();
    let mut vp = build_contrived_verifier(CHANNELS, 6, &honest, &mut rng).unwrap();
    let mut p = ProverState::new(3, x, 4, T, ProverStrategy::Guessing, &mut rng).unwrap();
    let q1 = VQuery {
        x: None,
        y: vp.advice(),
        z: vec![],
        t: Bits::new(),
    };
    let VAnswer::Reply { x: PartyStep::Send(hello), y, z: z1, t: t1 } = vp.query(1, q1, &mut rng).unwrap() else {
        panic!("first query refused");
    };
    let PartyStep::Send(cstar) = p.next(&hello, &mut rng).unwrap() else {
        panic!("prover stopped");
    };
    let q2 = VQuery {
        x: Some(cstar),
        y,
        z: z1.clone(),
        t: t1.clone(),
    };
    let VAnswer::Reply { x: PartyStep::Send(coms), y, .. } = vp.query(2, q2, &mut rng).unwrap() else {
        panic!("second query refused");
    };
    let PartyStep::Send(challenge) = p.next(&coms, &mut rng).unwrap() else {
        panic!("prover stopped");
    };
    // Φ_3 with the state from Φ_1: the tag is genuine but the honest step is stale
    let q3 = VQuery {
        x: Some(challenge),
        y,
        z: z1,
        t: t1,
    };
    assert!(vp.query(3, q3, &mut rng).unwrap().is_abort());
    let last = vp.log().records().last().unwrap();
    assert!(last.state_successful && !last.non_abort);
    assert_eq!(classify_queries(vp.log(), CHANNELS).d, 0);
}

#[test]
fn forged_tags_never_pass() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let x = Graph::petersen();
    for sid in 0..500 {
        let honest = VerifierState::new(sid, x.clone(), 16, T).unwrap();
        let mut vp = build_contrived_verifier(CHANNELS, 6, &honest, &mut rng).unwrap();
        let advice = vp.advice();
        let out = run_policy(SimPolicy::ForgeTag, &mut vp, advice, &params(&x, 16, sid), &mut rng).unwrap();
        assert_eq!(out.probes.len(), 1);
        assert!(!vp.log().records()[out.probes[0]].non_abort);
        assert_eq!(classify_queries(vp.log(), CHANNELS).d, 0);
    }
}

#[test]
fn classification_follows_the_definitions() {
    let mut log = QueryLog::default();
    log.push(1, true, b"", Some(b"c1".to_vec()));
    log.push(2, true, b"c1", None);
    log.push(2, true, b"c1", None);
    let ev = classify_queries(&log, 3);
    assert_eq!(ev.b[2], 1);
    assert_eq!(ev.total(), 1);

    let mut log = QueryLog::default();
    log.push(1, true, b"", Some(b"c1".to_vec()));
    log.push(3, true, b"zz", None);
    log.push(2, true, b"c1", Some(b"c2".to_vec()));
    let ev = classify_queries(&log, 3);
    assert!(ev.j[3] >= 1);
    assert_eq!(ev.c[2][3], 1);

    let mut log = QueryLog::default();
    log.push(1, true, b"", Some(b"c1".to_vec()));
    log.push(2, true, b"forged", Some(b"c2".to_vec()));
    log.push(3, true, b"c2", Some(b"c3".to_vec()));
    let ev = classify_queries(&log, 3);
    assert_eq!((ev.d, ev.e), (1, 0));

    let mut log = QueryLog::default();
    log.push(1, true, b"", Some(b"c1".to_vec()));
    log.push(3, true, b"x", Some(b"c3".to_vec()));
    let ev = classify_queries(&log, 3);
    assert_eq!(ev.e, 1);
}

#[test]
#[should_panic(expected = "state-successful")]
fn non_abort_without_state_success_is_rejected() {
    QueryLog::default().push(1, false, b"", Some(vec![]));
}

#[test]
fn extracted_prover_decides_membership() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let (yes, _) = Graph::random_hamiltonian(6, 0.3, &mut rng);
    let no = Graph::petersen();
    for (x, want) in [(&yes, true), (&no, false)] {
        for sid in 0..10 {
            let mut v = VerifierState::new(sid, x.clone(), 8, T).unwrap();
            let out = run_extracted(
                SimPolicy::StraightLine,
                CHANNELS,
                6,
                &mut v,
                CiphertextMode::Zero,
                &params(x, 8, sid),
                &mut rng,
            )
            .unwrap();
            assert_eq!(out.accepted(), want);
            assert!(out.halted.is_none());
            assert_eq!(out.events.total(), 0);
        }
    }
}

#[test]
fn extracted_prover_refuses_out_of_turn_queries() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let x = Graph::petersen();
    for sid in 0..20 {
        let mut v = VerifierState::new(sid, x.clone(), 8, T).unwrap();
        let policy = SimPolicy::OutOfOrder { probe: Probe::Zero };
        let out = run_extracted(policy, CHANNELS, 6, &mut v, CiphertextMode::RealState, &params(&x, 8, sid), &mut rng)
            .unwrap();
        assert!(out.policy.aborted_at.is_some());
        assert!(out.verdict.is_none());
    }
}
