use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spacezk::crypto::{commit_bits, commit_shared, ReceiverMsg};
use spacezk::wi::compound::encode_trapdoor_message;
use spacezk::wi::mpc::{mpc_commit, mpc_verify, reps_for_soundness, MpcChallenge};
use spacezk::wi::{
    build_compound_circuit, index_bits, reduce_to_hamiltonicity, wi_prove, wi_verify, BlumProver,
    BoolCircuit, CompoundStatement, CompoundWitness, GateOp, Graph, IdealScheme, InputLayout,
};
use spacezk::wi::blum::{cheating_transcript, BlumResponse};
use spacezk::Bits;

const INPUTS: usize = 2;
const SEARCH_LIMIT: usize = 64;

/// Random circuits with at most six gates over two inputs.
fn small_circuit() -> impl Strategy<Value = BoolCircuit> {
    prop::collection::vec((0u8..4, any::<u32>(), any::<u32>(), any::<bool>()), 1..=6).prop_map(|raw| {
        let mut gates = Vec::new();
        for (g, (kind, a, b, c)) in raw.into_iter().enumerate() {
            let wires = (INPUTS + g) as u32;
            let (a, b) = (a % wires, b % wires);
            gates.push(match kind {
                0 => GateOp::And(a, b),
                1 => GateOp::Xor(a, b),
                2 => GateOp::Not(a),
                _ => GateOp::Const(c),
            });
        }
        let out = (INPUTS + gates.len() - 1) as u32;
        BoolCircuit::new(vec!["a".into(), "b".into()], gates, out).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn reduction_is_complete_and_sound(c in small_circuit()) {
        let mut satisfiable = false;
        for x in 0..1u64 << INPUTS {
            let a = Bits::from_u64(x, INPUTS);
            let (g, w) = reduce_to_hamiltonicity(&c, Some(&a));
            let sat = c.eval(&a).unwrap();
            satisfiable |= sat;
            prop_assert_eq!(w.is_some(), sat);
            if let Some(cycle) = w {
                prop_assert!(g.is_hamiltonian_cycle(&cycle));
            }
        }
        let (g, _) = reduce_to_hamiltonicity(&c, None);
        // the graph depends on the circuit only
        prop_assert_eq!(&g, &reduce_to_hamiltonicity(&c, Some(&Bits::zeros(INPUTS))).0);
        // exhaustive search is only tractable on the smaller gadget graphs
        if !satisfiable && g.num_vertices() <= SEARCH_LIMIT {
            prop_assert!(g.find_hamiltonian_cycle().is_none());
        }
    }
}

#[test]
fn unsatisfiable_gadgets_have_no_cycle() {
    let cases = [
        vec![GateOp::Const(false)],
        vec![GateOp::Not(0), GateOp::And(0, 2)],
        vec![GateOp::Xor(0, 0)],
        vec![GateOp::Xor(1, 1)],
        vec![GateOp::Not(1), GateOp::And(2, 1)],
    ];
    for gates in cases {
        let out = (INPUTS + gates.len() - 1) as u32;
        let c = BoolCircuit::new(vec!["a".into(), "b".into()], gates.clone(), out).unwrap();
        assert!((0..4).all(|x| !c.eval(&Bits::from_u64(x, INPUTS)).unwrap()));
        let (g, w) = reduce_to_hamiltonicity(&c, None);
        assert!(w.is_none());
        assert!(g.num_vertices() <= SEARCH_LIMIT, "{gates:?} has {} vertices", g.num_vertices());
        assert!(g.find_hamiltonian_cycle().is_none(), "{gates:?}");
    }
}

/// Every Hamiltonian cycle of K4 starting at vertex 0.
fn k4_cycles() -> Vec<Vec<usize>> {
    vec![vec![0, 1, 2, 3], vec![0, 2, 1, 3], vec![0, 1, 3, 2]]
}

/// Runs one t = 1 repetition with challenge `e` on coins `seed`.
fn view(cycle: &[usize], seed: u64, e: bool) -> BlumResponse<bool> {
    let mut p = BlumProver::<IdealScheme>::new(Graph::complete(4), cycle.to_vec()).unwrap();
    p.commit(&IdealScheme, 1, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
    p.respond(&Bits::from_bools(&[e])).unwrap().remove(0)
}

#[test]
fn blum_views_are_identical_across_witnesses() {
    // IdealScheme consumes no randomness, so the seed fixes π alone; collect
    // one seed per permutation and compare the view multisets over all 24.
    let mut by_pi: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
    let mut seed = 0;
    while by_pi.len() < 24 {
        let BlumResponse::Reveal { pi, .. } = view(&[0, 1, 2, 3], seed, false) else {
            panic!("challenge 0 reveals π");
        };
        by_pi.entry(pi).or_insert(seed);
        seed += 1;
    }
    let dist = |cycle: &[usize], e: bool| {
        let mut m: BTreeMap<String, u32> = BTreeMap::new();
        for &s in by_pi.values() {
            *m.entry(format!("{:?}", view(cycle, s, e))).or_default() += 1;
        }
        m
    };
    let cycles = k4_cycles();
    for e in [false, true] {
        let reference = dist(&cycles[0], e);
        for c in &cycles[1..] {
            assert_eq!(dist(c, e), reference, "challenge {e}, witness {c:?}");
        }
    }
}

#[test]
fn honest_blum_accepts_and_cheating_is_capped() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let k4 = Graph::complete(4);
    let mut p = BlumProver::new(k4.clone(), vec![0, 1, 2, 3]).unwrap();
    for t in [1, 4, 16] {
        let tr = wi_prove(&IdealScheme, &mut p, t, &mut rng).unwrap();
        assert!(wi_verify(&IdealScheme, &k4, &tr).unwrap());
    }
    let petersen = Graph::petersen();
    let trials = 4000;
    for t in [1usize, 3] {
        let wins = (0..trials)
            .filter(|_| {
                let tr = cheating_transcript(&IdealScheme, &petersen, t, &mut rng).unwrap();
                wi_verify(&IdealScheme, &petersen, &tr).unwrap_or(false)
            })
            .count();
        let bound = 0.5f64.powi(t as i32);
        let sigma = (bound * (1.0 - bound) / trials as f64).sqrt();
        let rate = wins as f64 / trials as f64;
        assert!(rate <= bound + 3.0 * sigma, "t = {t}: {rate} over {bound}");
        // the guess-the-challenge cheat attains the bound
        assert!(rate >= bound - 3.0 * sigma, "t = {t}: {rate} under {bound}");
    }
}

/// A statement whose only witness is the trapdoor (i*, β_{i*}).
fn trapdoor_statement(lambda: usize, istar: usize, rng: &mut ChaCha8Rng) -> (CompoundStatement, CompoundWitness) {
    let rmsg_star = ReceiverMsg::sample(lambda, rng).unwrap();
    let rmsg_2star = ReceiverMsg::sample(lambda, rng).unwrap();
    let rstar = Bits::random(lambda, rng);
    let rseeds = Bits::random(lambda * lambda, rng);
    let alphas: Vec<[Bits; 2]> = (0..lambda)
        .map(|_| [Bits::random(lambda, rng), Bits::random(lambda, rng)])
        .collect();
    let beta = alphas[istar][0].xor(&alphas[istar][1]);
    let st = CompoundStatement {
        graph: Graph::petersen(),
        lambda,
        c_star: commit_bits(&rmsg_star, &rstar, &rseeds).unwrap(),
        c_2star: commit_shared(&rmsg_2star, &encode_trapdoor_message(lambda, istar, &beta), &rstar).unwrap(),
        rmsg_star,
        rmsg_2star,
        alphas,
    };
    (st, CompoundWitness::Trapdoor { rstar, rseeds, istar })
}

#[test]
fn trapdoor_witness_satisfies_the_compound_circuit() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let lambda = 4;
    let (st, w) = trapdoor_statement(lambda, 2, &mut rng);
    let c = build_compound_circuit(&st).unwrap();
    let layout = InputLayout {
        vertices: 10,
        lambda,
    };
    assert_eq!(c.num_inputs(), layout.total());
    let input = layout.encode(&w).unwrap();
    assert!(c.eval(&input).unwrap());

    // the wrong index opens c** to a different message
    let CompoundWitness::Trapdoor { rstar, rseeds, .. } = w.clone() else { unreachable!() };
    for i in (0..lambda).filter(|&i| i != 2 && st.beta(i) != st.beta(2)) {
        let wrong = CompoundWitness::Trapdoor { rstar: rstar.clone(), rseeds: rseeds.clone(), istar: i };
        assert!(!c.eval(&layout.encode(&wrong).unwrap()).unwrap(), "i* = {i}");
    }
    assert!(!c.eval(&Bits::zeros(layout.total())).unwrap());
    assert_eq!(index_bits(lambda), 2);

    // and the MPC-in-the-head proof over it accepts
    let rmsg = ReceiverMsg::sample(lambda, &mut rng).unwrap();
    let reps = reps_for_soundness(8);
    let (com, state) = mpc_commit(&c, &input, &rmsg, reps, &mut rng).unwrap();
    let ch = MpcChallenge::sample(reps, &mut rng);
    let resp = state.respond(&ch).unwrap();
    assert!(mpc_verify(&c, &rmsg, &com, &ch, &resp).unwrap());
}

#[test]
fn cycle_witness_satisfies_the_compound_circuit() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let (g, cycle) = Graph::random_hamiltonian(6, 0.3, &mut rng);
    let (mut st, _) = trapdoor_statement(4, 1, &mut rng);
    st.graph = g;
    let c = build_compound_circuit(&st).unwrap();
    let layout = InputLayout { vertices: 6, lambda: 4 };
    assert!(c.eval(&layout.encode(&CompoundWitness::Cycle(cycle.clone())).unwrap()).unwrap());
    let mut broken = cycle;
    broken.swap(0, 1);
    let (a, b) = (broken[0], broken[1]);
    if !st.graph.is_hamiltonian_cycle(&broken) {
        assert!(!c.eval(&layout.encode(&CompoundWitness::Cycle(broken)).unwrap()).unwrap(), "{a}↔{b}");
    }
}

#[test]
fn soundness_repetitions_cover_the_target() {
    for t in [1, 8, 40] {
        let reps = reps_for_soundness(t);
        assert!((2.0f64 / 3.0).powi(reps as i32) <= 0.5f64.powi(t as i32));
        assert!((2.0f64 / 3.0).powi(reps as i32 - 1) > 0.5f64.powi(t as i32));
    }
}
