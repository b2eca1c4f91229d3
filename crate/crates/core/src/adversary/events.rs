//! Structural events over a query log. None of them occurs for a
//! straight-line simulator; each one needs either a cloned subspace state
//! or a forged tag.

use serde::{Deserialize, Serialize};

use super::contrived::QueryLog;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventCounters {
    /// `j[i]`: state-successful Φ_i with no earlier non-abort Φ_{i−1}.
    pub j: Vec<usize>,
    /// `b[i]`: state-successful Φ_i after an earlier state-successful Φ_i.
    pub b: Vec<usize>,
    /// `c[i][j]`, i < j: state-successful Φ_i after a state-successful Φ_j.
    pub c: Vec<Vec<usize>>,
    /// Non-abort Φ_i whose Z input matches no earlier non-abort Φ_{i−1} output.
    pub d: usize,
    /// 1 when Φ_k had a non-abort query while some Φ_i, i < k, had none.
    pub e: usize,
}

impl EventCounters {
    pub fn total(&self) -> usize {
        self.j.iter().sum::<usize>()
            + self.b.iter().sum::<usize>()
            + self.c.iter().flatten().sum::<usize>()
            + self.d
            + self.e
    }

    pub fn c_total(&self) -> usize {
        self.c.iter().flatten().sum()
    }

    /// Adds another run's counters; both must cover the same k.
    pub fn merge(&mut self, other: &EventCounters) {
        if self.j.is_empty() {
            *self = other.clone();
            return;
        }
        for (a, b) in self.j.iter_mut().zip(&other.j) {
            *a += b;
        }
        for (a, b) in self.b.iter_mut().zip(&other.b) {
            *a += b;
        }
        for (ra, rb) in self.c.iter_mut().zip(&other.c) {
            for (a, b) in ra.iter_mut().zip(rb) {
                *a += b;
            }
        }
        self.d += other.d;
        self.e += other.e;
    }
}

/// Events of a log over channels 1..=k, in timestamp order.
pub fn classify_queries(log: &QueryLog, k: usize) -> EventCounters {
    let mut ev = EventCounters {
        j: vec![0; k + 1],
        b: vec![0; k + 1],
        c: vec![vec![0; k + 1]; k + 1],
        d: 0,
        e: 0,
    };
    let mut successful = vec![0usize; k + 1];
    let mut outputs: Vec<Vec<&[u8]>> = vec![vec![]; k + 1];
    let mut records: Vec<_> = log.records().iter().collect();
    records.sort_by_key(|r| r.timestamp);
    for r in records {
        let i = r.channel;
        if i == 0 || i > k {
            continue;
        }
        if r.state_successful {
            if i > 1 && outputs[i - 1].is_empty() {
                ev.j[i] += 1;
            }
            if successful[i] > 0 {
                ev.b[i] += 1;
            }
            for later in i + 1..=k {
                if successful[later] > 0 {
                    ev.c[i][later] += 1;
                }
            }
            successful[i] += 1;
        }
        if let (true, Some(out)) = (r.non_abort, r.z_out.as_deref()) {
            if i > 1 && !outputs[i - 1].contains(&r.z_in.as_slice()) {
                ev.d += 1;
            }
            outputs[i].push(out);
        }
    }
    if !outputs[k].is_empty() && (1..k).any(|i| outputs[i].is_empty()) {
        ev.e = 1;
    }
    ev
}
