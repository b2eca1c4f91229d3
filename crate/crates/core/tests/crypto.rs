use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spacezk::crypto::{
    binding_exhaustive, commit_random, commit_shared, dec, enc, prg_expand, recover_message, recover_message_shared,
    tag, tag_verify, verify_open, verify_open_shared, Opening, ReceiverMsg, SymKey,
};
use spacezk::Bits;

fn bits(len: usize) -> impl Strategy<Value = Bits> {
    prop::collection::vec(any::<bool>(), len).prop_map(|v| Bits::from_bools(&v))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn commitments_open_and_recover(seed in any::<u64>(), msg in bits(12), lambda in 4usize..=16) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rmsg = ReceiverMsg::sample(lambda, &mut rng).unwrap();
        let (c, open) = commit_random(&rmsg, &msg, &mut rng).unwrap();
        prop_assert!(verify_open(&rmsg, &c, &open).unwrap());
        prop_assert_eq!(recover_message(&rmsg, &c, &open.randomness).unwrap(), Some(msg.clone()));
        let mut wrong = msg.clone();
        wrong.set(0, !msg.get(0));
        let lie = Opening { message: wrong, randomness: open.randomness.clone() };
        prop_assert!(!verify_open(&rmsg, &c, &lie).unwrap());
    }

    #[test]
    fn shared_seed_commitments_recover(seed in any::<u64>(), msg in bits(10), lambda in 4usize..=16) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rmsg = ReceiverMsg::sample(lambda, &mut rng).unwrap();
        let s = Bits::random(lambda, &mut rng);
        let c = commit_shared(&rmsg, &msg, &s).unwrap();
        let open = Opening { message: msg.clone(), randomness: s.clone() };
        prop_assert!(verify_open_shared(&rmsg, &c, &open).unwrap());
        prop_assert_eq!(recover_message_shared(&rmsg, &c, &s).unwrap(), Some(msg));
    }

    #[test]
    fn encryption_round_trips(seed in any::<u64>(), m in prop::collection::vec(any::<u8>(), 0..200)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = SymKey::generate(16, &mut rng).unwrap();
        let ct = enc(&k, &m, &mut rng);
        prop_assert_eq!(dec(&k, &ct).unwrap(), m);
    }

    #[test]
    fn tags_verify_and_reject_edits(seed in any::<u64>(), m in prop::collection::vec(any::<u8>(), 1..100), pos in any::<usize>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = SymKey::generate(16, &mut rng).unwrap();
        let t = tag(&k, &m);
        prop_assert!(tag_verify(&k, &m, &t));
        let mut edited = m.clone();
        let bit = pos % (8 * m.len());
        edited[bit / 8] ^= 1 << (bit % 8);
        // a 32-bit tag collides with probability 2^-32
        prop_assert!(!tag_verify(&k, &edited, &t));
    }

    #[test]
    fn prg_is_a_prefix_stable_function(s in any::<u64>(), len in 1usize..200) {
        let seed = Bits::from_u64(s & 0xffff, 16);
        let long = prg_expand(&seed, 256);
        prop_assert_eq!(prg_expand(&seed, len), long.slice(0, len));
    }
}

/// Equivocable r are exactly the differences G(s₁) ⊕ G(s₂).
fn difference_set_fraction(lambda: usize) -> f64 {
    let outs: Vec<u64> = (0..1u64 << lambda)
        .map(|s| prg_expand(&Bits::from_u64(s, lambda), 3 * lambda).to_u64())
        .collect();
    let diffs: BTreeSet<u64> = outs.iter().flat_map(|a| outs.iter().map(move |b| a ^ b)).collect();
    diffs.len() as f64 / (1u64 << (3 * lambda)) as f64
}

#[test]
fn exhaustive_binding_matches_the_difference_set() {
    for lambda in 1..=4 {
        let b = binding_exhaustive(lambda).unwrap();
        assert_eq!(b.receiver_msgs, 1 << (3 * lambda));
        assert!((b.fraction() - difference_set_fraction(lambda)).abs() < 1e-15, "λ = {lambda}");
        // |D| ≤ 2^{2λ} − 2^λ + 1 nonzero-or-zero differences
        assert!(b.fraction() <= ((1u64 << (2 * lambda)) as f64) / (1u64 << (3 * lambda)) as f64);
    }
}

#[test]
fn exhaustive_binding_refuses_large_lambda() {
    assert!(binding_exhaustive(6).is_err());
}
