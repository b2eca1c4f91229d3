use rand::Rng;

use super::gate::UnitaryDescriptor;
use super::state::{
    apply_unitary, measure_prefix, measure_prefix_forced, outcome_bits, project_prefix, QState,
};
use crate::bits::Bits;
use crate::error::{Error, Result};

pub const DEFAULT_MAX_BLOCKS: usize = 10_000;

/// (c, ⟨U⟩, ℓ, ψ).
#[derive(Debug, Clone, PartialEq)]
pub struct HybridState {
    pub classical: Vec<u8>,
    pub unitary: UnitaryDescriptor,
    pub measure_count: usize,
    pub quantum: QState,
}

impl HybridState {
    pub fn new(
        classical: Vec<u8>,
        unitary: UnitaryDescriptor,
        measure_count: usize,
        quantum: QState,
    ) -> Result<Self> {
        let hs = HybridState {
            classical,
            unitary,
            measure_count,
            quantum,
        };
        hs.check()?;
        Ok(hs)
    }

    fn check(&self) -> Result<()> {
        let n = self.quantum.num_qubits();
        if self.measure_count > n {
            return Err(Error::Dimension(format!(
                "measure count {} exceeds {n} qubits",
                self.measure_count
            )));
        }
        if let UnitaryDescriptor::Circuit(c) = &self.unitary {
            if c.arity() != n {
                return Err(Error::Dimension(format!(
                    "{}-qubit circuit for a {n}-qubit register",
                    c.arity()
                )));
            }
        }
        Ok(())
    }
}

/// Output of the classical post-processing f(c, ⟨U⟩, ℓ, o).
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub classical: Vec<u8>,
    pub unitary: UnitaryDescriptor,
    pub measure_count: usize,
}

/// Classical post-processing. Must be a pure function of its inputs.
pub type PostProcess<'a> =
    dyn Fn(&[u8], &UnitaryDescriptor, usize, &Bits) -> Result<Step> + 'a;

enum Choice<'r, R: ?Sized> {
    Sample(&'r mut R),
    Forced(&'r Bits),
    Linear(&'r Bits),
}

fn block<R: Rng + ?Sized>(
    hs: HybridState,
    f: &PostProcess<'_>,
    choice: Choice<'_, R>,
) -> Result<(HybridState, Bits)> {
    if hs.unitary.is_bottom() {
        return Err(Error::Dimension("block started on a halted state".into()));
    }
    hs.check()?;
    let n = hs.quantum.num_qubits();
    let l = hs.measure_count;
    let q = apply_unitary(hs.quantum, &hs.unitary)?;
    let (o, mut q) = match choice {
        Choice::Sample(rng) => measure_prefix(q, l, rng)?,
        Choice::Forced(o) => {
            check_len(o, l)?;
            (o.clone(), measure_prefix_forced(q, o)?.1)
        }
        Choice::Linear(o) => {
            check_len(o, l)?;
            (o.clone(), project_prefix(q, o)?)
        }
    };
    let step = f(&hs.classical, &hs.unitary, l, &o)?;
    if step.measure_count > n {
        return Err(Error::Postprocess(format!(
            "measure count {} exceeds {n} qubits",
            step.measure_count
        )));
    }
    if let UnitaryDescriptor::Circuit(c) = &step.unitary {
        if c.arity() != n {
            return Err(Error::Postprocess(format!(
                "{}-qubit circuit for a {n}-qubit register",
                c.arity()
            )));
        }
    }
    q.reset_prefix(&o);
    Ok((
        HybridState {
            classical: step.classical,
            unitary: step.unitary,
            measure_count: step.measure_count,
            quantum: q,
        },
        o,
    ))
}

fn check_len(o: &Bits, l: usize) -> Result<()> {
    if o.len() != l {
        return Err(Error::Dimension(format!(
            "forced outcome of {} bits for a {l}-qubit measurement",
            o.len()
        )));
    }
    Ok(())
}

/// One block: apply ⟨U⟩, measure the first ℓ qubits, post-process, reset.
pub fn run_block<R: Rng + ?Sized>(
    hs: HybridState,
    f: &PostProcess<'_>,
    rng: &mut R,
) -> Result<HybridState> {
    Ok(block(hs, f, Choice::Sample(rng))?.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelOutcome {
    pub classical: Vec<u8>,
    pub measure_count: usize,
    pub quantum: QState,
    pub blocks_executed: usize,
    pub outcomes: Vec<Bits>,
}

/// Iterates blocks until ⟨U⟩ = BOTTOM.
pub fn run_channel<R: Rng + ?Sized>(
    hs0: HybridState,
    f: &PostProcess<'_>,
    rng: &mut R,
    max_blocks: usize,
) -> Result<ChannelOutcome> {
    let mut hs = hs0;
    let mut outcomes = Vec::new();
    while !hs.unitary.is_bottom() {
        if outcomes.len() == max_blocks {
            return Err(Error::NonTermination { max_blocks });
        }
        let (next, o) = block(hs, f, Choice::Sample(&mut *rng))?;
        hs = next;
        outcomes.push(o);
    }
    Ok(finish(hs, outcomes))
}

/// Re-runs a channel along a recorded outcome sequence.
pub fn replay_channel(
    hs0: HybridState,
    f: &PostProcess<'_>,
    outcomes: &[Bits],
) -> Result<ChannelOutcome> {
    let mut hs = hs0;
    let mut taken = Vec::new();
    while !hs.unitary.is_bottom() {
        let o = outcomes.get(taken.len()).ok_or(Error::NonTermination {
            max_blocks: outcomes.len(),
        })?;
        let (next, o) = block::<rand::rngs::mock::StepRng>(hs, f, Choice::Forced(o))?;
        hs = next;
        taken.push(o);
    }
    Ok(finish(hs, taken))
}

fn finish(hs: HybridState, outcomes: Vec<Bits>) -> ChannelOutcome {
    ChannelOutcome {
        classical: hs.classical,
        measure_count: hs.measure_count,
        quantum: hs.quantum,
        blocks_executed: outcomes.len(),
        outcomes,
    }
}

/// One leaf of the exhaustive outcome tree. `quantum` is unnormalised and
/// its trace is the branch weight.
#[derive(Debug, Clone)]
pub struct Branch {
    pub classical: Vec<u8>,
    pub outcomes: Vec<Bits>,
    pub quantum: QState,
}

impl Branch {
    pub fn weight(&self) -> f64 {
        self.quantum.trace()
    }
}

/// Enumerates every outcome sequence of a channel on a density operator.
/// Linear in the input operator, so it also accepts non-physical operator
/// basis elements.
pub fn channel_branches(
    hs0: HybridState,
    f: &PostProcess<'_>,
    max_blocks: usize,
) -> Result<Vec<Branch>> {
    let mut hs0 = hs0;
    hs0.quantum = hs0.quantum.to_mixed();
    let mut done = Vec::new();
    let mut frontier = vec![(hs0, Vec::<Bits>::new())];
    while let Some((hs, trail)) = frontier.pop() {
        if hs.unitary.is_bottom() {
            done.push(Branch {
                classical: hs.classical,
                outcomes: trail,
                quantum: hs.quantum,
            });
            continue;
        }
        if trail.len() == max_blocks {
            return Err(Error::NonTermination { max_blocks });
        }
        let l = hs.measure_count;
        for o in 0..(1usize << l) {
            let ob = outcome_bits(o, l);
            let (next, ob) =
                block::<rand::rngs::mock::StepRng>(hs.clone(), f, Choice::Linear(&ob))?;
            let mut t = trail.clone();
            t.push(ob);
            frontier.push((next, t));
        }
    }
    Ok(done)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::gate::{Circuit, Gate};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn h0(n: usize) -> UnitaryDescriptor {
        Circuit::new(n).with(Gate::H(0)).unwrap().into()
    }

    #[test]
    fn measured_bit_lands_in_classical_and_qubit_is_reset() {
        let f = |c: &[u8], _: &UnitaryDescriptor, _: usize, o: &Bits| {
            let mut c = c.to_vec();
            c.push(o.get(0) as u8);
            Ok(Step {
                classical: c,
                unitary: UnitaryDescriptor::Bottom,
                measure_count: 0,
            })
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let hs = HybridState::new(vec![7], h0(1), 1, QState::zero(1)).unwrap();
            let out = run_block(hs, &f, &mut rng).unwrap();
            assert_eq!(out.classical.len(), 2);
            assert!(out.classical[1] <= 1);
            assert!((out.quantum.fidelity_with_pure(QState::zero(1).amplitudes().unwrap()) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn oversized_measure_count_is_a_postprocess_error() {
        let f = |_: &[u8], u: &UnitaryDescriptor, _: usize, _: &Bits| {
            Ok(Step {
                classical: vec![],
                unitary: u.clone(),
                measure_count: 3,
            })
        };
        let hs = HybridState::new(vec![], UnitaryDescriptor::identity(2), 0, QState::zero(2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(run_block(hs, &f, &mut rng), Err(Error::Postprocess(_))));
    }

    #[test]
    fn nontermination_is_reported() {
        let f = |c: &[u8], u: &UnitaryDescriptor, l: usize, _: &Bits| {
            Ok(Step {
                classical: c.to_vec(),
                unitary: u.clone(),
                measure_count: l,
            })
        };
        let hs = HybridState::new(vec![], UnitaryDescriptor::identity(1), 0, QState::zero(1)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            run_channel(hs, &f, &mut rng, 5).unwrap_err(),
            Error::NonTermination { max_blocks: 5 }
        );
    }

    #[test]
    fn branches_sum_to_unit_weight_and_replay_matches() {
        // two H-measure blocks, then halt
        let f = |c: &[u8], u: &UnitaryDescriptor, l: usize, o: &Bits| {
            let mut c = c.to_vec();
            c.push(o.get(0) as u8);
            let unitary = if c.len() == 2 { UnitaryDescriptor::Bottom } else { u.clone() };
            Ok(Step {
                classical: c,
                unitary,
                measure_count: l,
            })
        };
        let hs = HybridState::new(vec![], h0(2), 1, QState::zero(2)).unwrap();
        let br = channel_branches(hs.clone(), &f, 10).unwrap();
        assert_eq!(br.len(), 4);
        let total: f64 = br.iter().map(Branch::weight).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let live = run_channel(hs.clone(), &f, &mut rng, 10).unwrap();
        let again = replay_channel(hs, &f, &live.outcomes).unwrap();
        assert_eq!(live.classical, again.classical);
        assert_eq!(live.blocks_executed, 2);
    }
}
