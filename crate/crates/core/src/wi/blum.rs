//! Blum's Hamiltonicity proof, t parallel repetitions, over a pluggable bit
//! commitment. Rounds: receiver message, commitments to π(G), challenge
//! bits, responses.

use std::fmt::Debug;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use super::graph::Graph;
use crate::bits::Bits;
use crate::crypto::commit::{commit_bit, verify_open, Commitment, Opening, ReceiverMsg};
use crate::error::{Error, Result};

pub trait BitCommitScheme {
    type Com: Clone + Debug + PartialEq + Serialize;
    type Open: Clone + Debug + PartialEq + Serialize;
    fn commit<R: Rng + ?Sized>(&self, bit: bool, rng: &mut R) -> Result<(Self::Com, Self::Open)>;
    fn verify(&self, com: &Self::Com, bit: bool, open: &Self::Open) -> bool;
}

/// Naor commitments under the verifier's receiver message.
#[derive(Debug, Clone)]
pub struct NaorScheme {
    pub rmsg: ReceiverMsg,
}

impl BitCommitScheme for NaorScheme {
    type Com = Commitment;
    type Open = Bits;

    fn commit<R: Rng + ?Sized>(&self, bit: bool, rng: &mut R) -> Result<(Commitment, Bits)> {
        let seed = Bits::random(self.rmsg.lambda(), rng);
        Ok((commit_bit(&self.rmsg, bit, &seed)?, seed))
    }

    fn verify(&self, com: &Commitment, bit: bool, open: &Bits) -> bool {
        let o = Opening {
            message: Bits::from_bools(&[bit]),
            randomness: open.clone(),
        };
        verify_open(&self.rmsg, com, &o).unwrap_or(false)
    }
}

/// Information-theoretic test double: the commitment carries nothing and
/// the functionality remembers the bit.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdealScheme;

impl BitCommitScheme for IdealScheme {
    type Com = ();
    type Open = bool;

    fn commit<R: Rng + ?Sized>(&self, bit: bool, _rng: &mut R) -> Result<((), bool)> {
        Ok(((), bit))
    }

    fn verify(&self, _com: &(), bit: bool, open: &bool) -> bool {
        *open == bit
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum BlumResponse<O> {
    /// e = 0: the permutation and every matrix opening.
    Reveal { pi: Vec<usize>, openings: Vec<O> },
    /// e = 1: the permuted cycle and the openings of its n edges.
    Cycle { cycle: Vec<usize>, openings: Vec<O> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WiTranscript<C, O> {
    pub t: usize,
    /// Per repetition, the n×n committed adjacency matrix, row-major.
    pub commitments: Vec<Vec<C>>,
    pub challenge: Bits,
    pub responses: Vec<BlumResponse<O>>,
}

pub struct BlumProver<S: BitCommitScheme> {
    graph: Graph,
    cycle: Vec<usize>,
    perms: Vec<Vec<usize>>,
    openings: Vec<Vec<S::Open>>,
}

impl<S: BitCommitScheme> BlumProver<S> {
    pub fn new(graph: Graph, cycle: Vec<usize>) -> Result<Self> {
        if !graph.is_hamiltonian_cycle(&cycle) {
            return Err(Error::Config("prover needs a Hamiltonian cycle".into()));
        }
        Ok(BlumProver {
            graph,
            cycle,
            perms: vec![],
            openings: vec![],
        })
    }

    /// Round 2: commit to π_j(G) for every repetition.
    pub fn commit<R: Rng + ?Sized>(&mut self, scheme: &S, t: usize, rng: &mut R) -> Result<Vec<Vec<S::Com>>> {
        if t == 0 {
            return Err(Error::Config("t must be at least 1".into()));
        }
        let n = self.graph.num_vertices();
        let mut coms = Vec::with_capacity(t);
        self.perms.clear();
        self.openings.clear();
        for _ in 0..t {
            let mut pi: Vec<usize> = (0..n).collect();
            pi.shuffle(rng);
            let h = self.graph.permute(&pi);
            let mut row_c = Vec::with_capacity(n * n);
            let mut row_o = Vec::with_capacity(n * n);
            for a in 0..n {
                for b in 0..n {
                    let (c, o) = scheme.commit(h.has_edge(a, b), rng)?;
                    row_c.push(c);
                    row_o.push(o);
                }
            }
            coms.push(row_c);
            self.perms.push(pi);
            self.openings.push(row_o);
        }
        Ok(coms)
    }

    /// Round 4.
    pub fn respond(&self, challenge: &Bits) -> Result<Vec<BlumResponse<S::Open>>> {
        if challenge.len() != self.perms.len() {
            return Err(Error::Protocol {
                round: 3,
                reason: format!("{} challenge bits for t={}", challenge.len(), self.perms.len()),
            });
        }
        let n = self.graph.num_vertices();
        let cycle = &self.cycle;
        Ok((0..self.perms.len())
            .map(|j| {
                let pi = &self.perms[j];
                if challenge.get(j) {
                    let moved: Vec<usize> = cycle.iter().map(|&v| pi[v]).collect();
                    let openings = (0..n)
                        .map(|i| self.openings[j][moved[i] * n + moved[(i + 1) % n]].clone())
                        .collect();
                    BlumResponse::Cycle { cycle: moved, openings }
                } else {
                    BlumResponse::Reveal {
                        pi: pi.clone(),
                        openings: self.openings[j].clone(),
                    }
                }
            })
            .collect())
    }
}

fn is_permutation(p: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    p.len() == n && p.iter().all(|&v| v < n && !std::mem::replace(&mut seen[v], true))
}

/// Verifies a complete transcript; the verdict depends on nothing else.
pub fn wi_verify<S: BitCommitScheme>(scheme: &S, graph: &Graph, tr: &WiTranscript<S::Com, S::Open>) -> Result<bool> {
    let n = graph.num_vertices();
    if tr.t == 0 || tr.commitments.len() != tr.t || tr.challenge.len() != tr.t || tr.responses.len() != tr.t {
        return Err(Error::Protocol {
            round: 2,
            reason: "repetition count mismatch".into(),
        });
    }
    for j in 0..tr.t {
        let coms = &tr.commitments[j];
        if coms.len() != n * n {
            return Err(Error::Protocol {
                round: 2,
                reason: format!("repetition {j} commits {} entries", coms.len()),
            });
        }
        let ok = match (&tr.responses[j], tr.challenge.get(j)) {
            (BlumResponse::Reveal { pi, openings }, false) => {
                if openings.len() != n * n {
                    return Err(Error::Protocol {
                        round: 4,
                        reason: format!("repetition {j} opens {} entries", openings.len()),
                    });
                }
                is_permutation(pi, n) && {
                    let h = graph.permute(pi);
                    (0..n * n).all(|i| scheme.verify(&coms[i], h.has_edge(i / n, i % n), &openings[i]))
                }
            }
            (BlumResponse::Cycle { cycle, openings }, true) => {
                if openings.len() != n {
                    return Err(Error::Protocol {
                        round: 4,
                        reason: format!("repetition {j} opens {} cycle edges", openings.len()),
                    });
                }
                is_permutation(cycle, n)
                    && (0..n).all(|i| scheme.verify(&coms[cycle[i] * n + cycle[(i + 1) % n]], true, &openings[i]))
            }
            _ => {
                return Err(Error::Protocol {
                    round: 4,
                    reason: format!("repetition {j} answers the wrong challenge"),
                })
            }
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// In-process run of the four rounds.
pub fn wi_prove<S: BitCommitScheme, R: Rng + ?Sized>(
    scheme: &S,
    prover: &mut BlumProver<S>,
    t: usize,
    rng: &mut R,
) -> Result<WiTranscript<S::Com, S::Open>> {
    let commitments = prover.commit(scheme, t, rng)?;
    let challenge = Bits::random(t, rng);
    let responses = prover.respond(&challenge)?;
    Ok(WiTranscript {
        t,
        commitments,
        challenge,
        responses,
    })
}

/// Prover without a witness: per repetition it guesses the challenge and
/// commits to π(G) (for 0) or to a planted n-cycle (for 1).
pub fn cheating_transcript<S: BitCommitScheme, R: Rng + ?Sized>(
    scheme: &S,
    graph: &Graph,
    t: usize,
    rng: &mut R,
) -> Result<WiTranscript<S::Com, S::Open>> {
    let n = graph.num_vertices();
    let mut commitments = Vec::with_capacity(t);
    let mut plans = Vec::with_capacity(t);
    for _ in 0..t {
        let guess: bool = rng.gen();
        let mut pi: Vec<usize> = (0..n).collect();
        pi.shuffle(rng);
        let h = if guess { Graph::cycle(n).permute(&pi) } else { graph.permute(&pi) };
        let mut cs = Vec::with_capacity(n * n);
        let mut os = Vec::with_capacity(n * n);
        for i in 0..n * n {
            let (c, o) = scheme.commit(h.has_edge(i / n, i % n), rng)?;
            cs.push(c);
            os.push(o);
        }
        commitments.push(cs);
        plans.push((pi, os));
    }
    let challenge = Bits::random(t, rng);
    let responses = plans
        .into_iter()
        .enumerate()
        .map(|(j, (pi, os))| {
            if challenge.get(j) {
                // the planted cycle 0→1→…→n−1 sits at π of those vertices
                let cycle: Vec<usize> = (0..n).map(|v| pi[v]).collect();
                let openings = (0..n).map(|i| os[cycle[i] * n + cycle[(i + 1) % n]].clone()).collect();
                BlumResponse::Cycle { cycle, openings }
            } else {
                BlumResponse::Reveal { pi, openings: os }
            }
        })
        .collect();
    Ok(WiTranscript {
        t,
        commitments,
        challenge,
        responses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn honest_k4_accepts_with_naor() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = Graph::complete(4);
        let scheme = NaorScheme {
            rmsg: ReceiverMsg::sample(8, &mut rng).unwrap(),
        };
        let mut p = BlumProver::new(g.clone(), vec![0, 1, 2, 3]).unwrap();
        let tr = wi_prove(&scheme, &mut p, 8, &mut rng).unwrap();
        assert!(wi_verify(&scheme, &g, &tr).unwrap());
    }

    #[test]
    fn wrong_answer_shape_is_a_protocol_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = Graph::complete(4);
        let mut p = BlumProver::new(g.clone(), vec![0, 1, 2, 3]).unwrap();
        let mut tr = wi_prove(&IdealScheme, &mut p, 2, &mut rng).unwrap();
        let flipped = !tr.challenge.get(0);
        tr.challenge.set(0, flipped);
        assert!(matches!(wi_verify(&IdealScheme, &g, &tr), Err(Error::Protocol { round: 4, .. })));
    }
}
