use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spacezk::qsim::{dump_qst1, load_qst1, measure_prefix_forced, CMatrix, Circuit, Gate, QState, C64};
use spacezk::Bits;

fn gate_strategy(n: usize) -> impl Strategy<Value = Gate> {
    let q = 0..n;
    prop_oneof![
        q.clone().prop_map(Gate::H),
        q.clone().prop_map(Gate::X),
        q.clone().prop_map(Gate::T),
        (q.clone(), -3.0f64..3.0).prop_map(|(q, th)| Gate::ry(q, th)),
        (q.clone(), q.clone())
            .prop_filter("distinct", |(a, b)| a != b)
            .prop_map(|(control, target)| Gate::Cnot { control, target }),
    ]
}

fn circuit(n: usize) -> impl Strategy<Value = Circuit> {
    prop::collection::vec(gate_strategy(n), 0..12).prop_map(move |gs| Circuit::from_gates(n, gs).unwrap())
}

fn random_state(n: usize, seed: u64) -> QState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = CMatrix::random_unitary(1 << n, &mut rng);
    let mut s = QState::zero(n);
    s.apply_matrix(&u).unwrap();
    s
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn circuits_are_unitary(c in circuit(3)) {
        prop_assert!(c.matrix().is_unitary(1e-10));
    }

    #[test]
    fn circuit_then_dagger_is_identity(c in circuit(3), seed in any::<u64>()) {
        let start = random_state(3, seed);
        let mut s = start.clone();
        s.apply_circuit(&c).unwrap();
        s.apply_circuit(&c.dagger()).unwrap();
        prop_assert!((s.fidelity_with_pure(start.amplitudes().unwrap()) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn pure_and_density_evolution_agree(c in circuit(3), seed in any::<u64>()) {
        let pure = random_state(3, seed);
        let mut mixed = pure.to_mixed();
        let mut p = pure.clone();
        p.apply_circuit(&c).unwrap();
        mixed.apply_circuit(&c).unwrap();
        prop_assert!(p.density_matrix().max_abs_diff(&mixed.density_matrix()) < 1e-10);
    }

    #[test]
    fn prefix_outcomes_sum_to_one(seed in any::<u64>(), l in 0usize..=3) {
        let s = random_state(3, seed).to_mixed();
        let mut total = 0.0;
        for o in 0..1u64 << l {
            let (p, post) = measure_prefix_forced(s.clone(), &Bits::from_u64(o, l)).unwrap();
            if p > 1e-12 {
                prop_assert!((post.trace() - 1.0).abs() < 1e-10);
            }
            total += p;
        }
        prop_assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn qst1_round_trips_pure_states(seed in any::<u64>()) {
        let s = random_state(2, seed);
        let back = load_qst1(&dump_qst1(&s).unwrap()).unwrap();
        prop_assert!(back.is_pure());
        prop_assert!(back.density_matrix().max_abs_diff(&s.density_matrix()) < 1e-15);
        prop_assert!(dump_qst1(&s.to_mixed()).is_err());
    }

    #[test]
    fn partial_trace_keeps_unit_trace(seed in any::<u64>(), k in 0usize..=3) {
        let s = random_state(3, seed);
        let r = s.trace_out_prefix(k).unwrap();
        prop_assert_eq!(r.num_qubits(), 3 - k);
        prop_assert!((r.trace() - 1.0).abs() < 1e-10);
        prop_assert!(r.density_matrix().is_hermitian(1e-12));
    }
}

#[test]
fn bell_pair_is_maximally_entangled() {
    let mut s = QState::zero(2);
    s.apply_circuit(&Circuit::from_gates(2, vec![Gate::H(0), Gate::Cnot { control: 0, target: 1 }]).unwrap())
        .unwrap();
    let half = s.trace_out_prefix(1).unwrap().density_matrix();
    let expect = CMatrix::identity(2).scale(C64::new(0.5, 0.0));
    assert!(half.max_abs_diff(&expect) < 1e-15);
}
