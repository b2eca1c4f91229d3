//! Circuit-SAT → 3-SAT (Tseitin, one variable per wire) → directed
//! Hamiltonian cycle (variable rows traversed left-to-right for true,
//! right-to-left for false, with one detour node per clause).

use super::circuit::{BoolCircuit, GateOp};
use super::graph::Graph;
use crate::bits::Bits;

/// (variable, polarity)
type Literal = (usize, bool);

fn tseitin(c: &BoolCircuit) -> Vec<Vec<Literal>> {
    let n = c.num_inputs();
    let mut clauses = Vec::new();
    for (g, op) in c.gates().iter().enumerate() {
        let o = n + g;
        match *op {
            GateOp::And(a, b) => {
                let (a, b) = (a as usize, b as usize);
                clauses.push(vec![(o, false), (a, true)]);
                clauses.push(vec![(o, false), (b, true)]);
                clauses.push(vec![(o, true), (a, false), (b, false)]);
            }
            GateOp::Xor(a, b) => {
                let (a, b) = (a as usize, b as usize);
                clauses.push(vec![(o, false), (a, true), (b, true)]);
                clauses.push(vec![(o, false), (a, false), (b, false)]);
                clauses.push(vec![(o, true), (a, false), (b, true)]);
                clauses.push(vec![(o, true), (a, true), (b, false)]);
            }
            GateOp::Not(a) => {
                let a = a as usize;
                clauses.push(vec![(o, true), (a, true)]);
                clauses.push(vec![(o, false), (a, false)]);
            }
            GateOp::Const(v) => clauses.push(vec![(o, v)]),
        }
    }
    clauses.push(vec![(c.output() as usize, true)]);
    clauses
}

struct Layout {
    /// start vertex of each variable gadget; row nodes follow, then the end
    s: Vec<usize>,
    row_len: Vec<usize>,
    /// (clause, literal polarity) per occurrence, per variable
    occ: Vec<Vec<(usize, bool)>>,
    clause_base: usize,
    total: usize,
}

impl Layout {
    fn row(&self, v: usize, k: usize) -> usize {
        self.s[v] + 1 + k
    }
    fn t(&self, v: usize) -> usize {
        self.s[v] + 1 + self.row_len[v]
    }
}

fn layout(vars: usize, clauses: &[Vec<Literal>]) -> Layout {
    let mut occ = vec![Vec::new(); vars];
    for (ci, cl) in clauses.iter().enumerate() {
        for &(v, pos) in cl {
            occ[v].push((ci, pos));
        }
    }
    let mut s = Vec::with_capacity(vars);
    let mut row_len = Vec::with_capacity(vars);
    let mut next = 0;
    for o in &occ {
        s.push(next);
        let len = 3 * o.len() + 1;
        row_len.push(len);
        next += len + 2;
    }
    Layout {
        s,
        row_len,
        occ,
        clause_base: next,
        total: next + clauses.len(),
    }
}

/// Deterministic reduction. With a satisfying assignment the returned cycle
/// is a Hamiltonian cycle of the graph; otherwise the witness is `None`.
pub fn reduce_to_hamiltonicity(c: &BoolCircuit, assignment: Option<&Bits>) -> (Graph, Option<Vec<usize>>) {
    let vars = c.num_wires();
    let clauses = tseitin(c);
    let lay = layout(vars, &clauses);
    let mut g = Graph::new(lay.total, true);
    let mut add = |a: usize, b: usize| g.add_edge(a, b).expect("layout in range");
    for v in 0..vars {
        let (left, right) = (lay.row(v, 0), lay.row(v, lay.row_len[v] - 1));
        add(lay.s[v], left);
        if right != left {
            add(lay.s[v], right);
        }
        add(left, lay.t(v));
        if right != left {
            add(right, lay.t(v));
        }
        for k in 0..lay.row_len[v] - 1 {
            add(lay.row(v, k), lay.row(v, k + 1));
            add(lay.row(v, k + 1), lay.row(v, k));
        }
        add(lay.t(v), lay.s[(v + 1) % vars]);
        for (j, &(ci, pos)) in lay.occ[v].iter().enumerate() {
            let (a, b) = (lay.row(v, 3 * j + 1), lay.row(v, 3 * j + 2));
            let cn = lay.clause_base + ci;
            if pos {
                add(a, cn);
                add(cn, b);
            } else {
                add(b, cn);
                add(cn, a);
            }
        }
    }
    let witness = assignment.and_then(|x| {
        let values = c.eval_wires(x).ok()?;
        if !values[c.output() as usize] {
            return None;
        }
        Some(cycle_for(&lay, &clauses, &values))
    });
    (g, witness)
}

fn cycle_for(lay: &Layout, clauses: &[Vec<Literal>], values: &[bool]) -> Vec<usize> {
    // each clause detours from its first satisfied occurrence
    let mut detour: Vec<Vec<Option<usize>>> = lay.occ.iter().map(|o| vec![None; o.len()]).collect();
    for (ci, cl) in clauses.iter().enumerate() {
        let &(v, pos) = cl
            .iter()
            .find(|&&(v, pos)| values[v] == pos)
            .expect("satisfying assignment satisfies every clause");
        let j = lay.occ[v]
            .iter()
            .position(|&(c2, p2)| c2 == ci && p2 == pos)
            .expect("occurrence recorded");
        detour[v][j].get_or_insert(lay.clause_base + ci);
    }
    let mut cycle = Vec::with_capacity(lay.total);
    for v in 0..lay.s.len() {
        cycle.push(lay.s[v]);
        let len = lay.row_len[v];
        let order: Vec<usize> = if values[v] {
            (0..len).collect()
        } else {
            (0..len).rev().collect()
        };
        for &k in &order {
            cycle.push(lay.row(v, k));
            // k is the first node of an occurrence pair in travel direction
            let pair_start = if values[v] { k % 3 == 1 } else { k % 3 == 2 };
            if pair_start && k > 0 {
                if let Some(cn) = detour[v][(k - 1) / 3] {
                    cycle.push(cn);
                }
            }
        }
        cycle.push(lay.t(v));
    }
    cycle
}

#[cfg(test)]
mod tests {
    use super::super::circuit::{Builder, Lit};
    use super::*;

    #[test]
    fn constant_true_gadget_is_hamiltonian() {
        let c = Builder::new().finish(Lit::Const(true));
        let (g, w) = reduce_to_hamiltonicity(&c, Some(&Bits::new()));
        // one variable with two unit clauses: s, t, 7 row nodes, 2 clause nodes
        assert_eq!(g.num_vertices(), 11);
        assert!(g.is_hamiltonian_cycle(&w.unwrap()));
    }

    #[test]
    fn contradiction_has_no_cycle() {
        let c = BoolCircuit::new(vec!["x".into()], vec![GateOp::Not(0), GateOp::And(0, 1)], 2).unwrap();
        let (g, w) = reduce_to_hamiltonicity(&c, Some(&Bits::from_u64(1, 1)));
        assert!(w.is_none());
        assert!(g.find_hamiltonian_cycle().is_none());
    }
}
