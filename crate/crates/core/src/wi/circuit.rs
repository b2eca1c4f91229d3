use rustc_hash::FxHashMap;

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{Error, Result};

/// Gate operands are wire indices. Wires `0..num_inputs` are inputs; gate g
/// drives wire `num_inputs + g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateOp {
    And(u32, u32),
    Xor(u32, u32),
    Not(u32),
    Const(bool),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoolCircuit {
    labels: Vec<String>,
    gates: Vec<GateOp>,
    output: u32,
    and_count: usize,
}

impl BoolCircuit {
    pub fn new(labels: Vec<String>, gates: Vec<GateOp>, output: u32) -> Result<Self> {
        let n = labels.len();
        for (g, op) in gates.iter().enumerate() {
            let wire = n + g;
            let ok = match *op {
                GateOp::And(a, b) | GateOp::Xor(a, b) => (a as usize) < wire && (b as usize) < wire,
                GateOp::Not(a) => (a as usize) < wire,
                GateOp::Const(_) => true,
            };
            if !ok {
                return Err(Error::Format(format!("gate {g} reads a wire it does not precede")));
            }
        }
        if output as usize >= n + gates.len() {
            return Err(Error::Format(format!("output wire {output} undriven")));
        }
        let and_count = gates.iter().filter(|g| matches!(g, GateOp::And(..))).count();
        Ok(BoolCircuit {
            labels,
            gates,
            output,
            and_count,
        })
    }

    pub fn num_inputs(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn gates(&self) -> &[GateOp] {
        &self.gates
    }

    pub fn output(&self) -> u32 {
        self.output
    }

    pub fn num_wires(&self) -> usize {
        self.labels.len() + self.gates.len()
    }

    pub fn and_count(&self) -> usize {
        self.and_count
    }

    /// Every wire value, inputs first.
    pub fn eval_wires(&self, inputs: &Bits) -> Result<Vec<bool>> {
        if inputs.len() != self.num_inputs() {
            return Err(Error::Dimension(format!(
                "{} input bits for {} inputs",
                inputs.len(),
                self.num_inputs()
            )));
        }
        let mut w: Vec<bool> = inputs.iter().collect();
        w.reserve(self.gates.len());
        for op in &self.gates {
            let v = match *op {
                GateOp::And(a, b) => w[a as usize] & w[b as usize],
                GateOp::Xor(a, b) => w[a as usize] ^ w[b as usize],
                GateOp::Not(a) => !w[a as usize],
                GateOp::Const(c) => c,
            };
            w.push(v);
        }
        Ok(w)
    }

    pub fn eval(&self, inputs: &Bits) -> Result<bool> {
        Ok(self.eval_wires(inputs)?[self.output as usize])
    }
}

/// A builder value: a folded constant or a wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lit {
    Const(bool),
    Wire(u32),
}

/// Circuit builder with constant folding and structural hashing, so public
/// constants cost no gates and repeated subterms are shared.
#[derive(Debug, Default)]
pub struct Builder {
    labels: Vec<String>,
    gates: Vec<GateOp>,
    memo: FxHashMap<GateOp, u32>,
    sealed_inputs: bool,
}

impl Builder {
    pub fn new() -> Self {
        Builder::default()
    }

    /// Inputs must all be declared before the first gate.
    pub fn input(&mut self, label: impl Into<String>) -> Lit {
        assert!(!self.sealed_inputs, "inputs declared after gates");
        self.labels.push(label.into());
        Lit::Wire(self.labels.len() as u32 - 1)
    }

    pub fn inputs(&mut self, prefix: &str, count: usize) -> Vec<Lit> {
        (0..count).map(|i| self.input(format!("{prefix}[{i}]"))).collect()
    }

    fn gate(&mut self, op: GateOp) -> Lit {
        self.sealed_inputs = true;
        let op = match op {
            GateOp::And(a, b) | GateOp::Xor(a, b) if a > b => match op {
                GateOp::And(..) => GateOp::And(b, a),
                _ => GateOp::Xor(b, a),
            },
            o => o,
        };
        let next = (self.labels.len() + self.gates.len()) as u32;
        let w = *self.memo.entry(op).or_insert(next);
        if w == next {
            self.gates.push(op);
        }
        Lit::Wire(w)
    }

    pub fn not(&mut self, a: Lit) -> Lit {
        match a {
            Lit::Const(c) => Lit::Const(!c),
            Lit::Wire(w) => {
                let g = w as usize;
                if g >= self.labels.len() {
                    if let GateOp::Not(inner) = self.gates[g - self.labels.len()] {
                        return Lit::Wire(inner);
                    }
                }
                self.gate(GateOp::Not(w))
            }
        }
    }

    pub fn xor(&mut self, a: Lit, b: Lit) -> Lit {
        match (a, b) {
            (Lit::Const(x), Lit::Const(y)) => Lit::Const(x ^ y),
            (Lit::Const(false), w) | (w, Lit::Const(false)) => w,
            (Lit::Const(true), w) | (w, Lit::Const(true)) => self.not(w),
            (Lit::Wire(x), Lit::Wire(y)) if x == y => Lit::Const(false),
            (Lit::Wire(x), Lit::Wire(y)) => self.gate(GateOp::Xor(x, y)),
        }
    }

    pub fn and(&mut self, a: Lit, b: Lit) -> Lit {
        match (a, b) {
            (Lit::Const(x), Lit::Const(y)) => Lit::Const(x & y),
            (Lit::Const(false), _) | (_, Lit::Const(false)) => Lit::Const(false),
            (Lit::Const(true), w) | (w, Lit::Const(true)) => w,
            (Lit::Wire(x), Lit::Wire(y)) if x == y => a,
            (Lit::Wire(x), Lit::Wire(y)) => self.gate(GateOp::And(x, y)),
        }
    }

    pub fn or(&mut self, a: Lit, b: Lit) -> Lit {
        let (na, nb) = (self.not(a), self.not(b));
        let both = self.and(na, nb);
        self.not(both)
    }

    pub fn xor_many(&mut self, xs: &[Lit]) -> Lit {
        xs.iter().fold(Lit::Const(false), |acc, &x| self.xor(acc, x))
    }

    /// Balanced AND tree; the empty conjunction is true.
    pub fn and_many(&mut self, xs: &[Lit]) -> Lit {
        let mut layer: Vec<Lit> = xs.to_vec();
        if layer.is_empty() {
            return Lit::Const(true);
        }
        while layer.len() > 1 {
            let mut next = Vec::with_capacity(layer.len().div_ceil(2));
            for pair in layer.chunks(2) {
                next.push(if pair.len() == 2 {
                    self.and(pair[0], pair[1])
                } else {
                    pair[0]
                });
            }
            layer = next;
        }
        layer[0]
    }

    /// `xs == target` bitwise.
    pub fn equals_const(&mut self, xs: &[Lit], target: &Bits) -> Vec<Lit> {
        assert_eq!(xs.len(), target.len());
        xs.iter()
            .zip(target.iter())
            .map(|(&x, t)| if t { x } else { self.not(x) })
            .collect()
    }

    pub fn and_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, GateOp::And(..))).count()
    }

    pub fn finish(mut self, out: Lit) -> BoolCircuit {
        let w = match out {
            Lit::Wire(w) => w,
            Lit::Const(c) => match self.gate(GateOp::Const(c)) {
                Lit::Wire(w) => w,
                Lit::Const(_) => unreachable!("gate always yields a wire"),
            },
        };
        BoolCircuit::new(self.labels, self.gates, w).expect("builder keeps wires ordered")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folding_removes_constant_work() {
        let mut b = Builder::new();
        let x = b.input("x");
        let t = b.xor(x, Lit::Const(true));
        let back = b.not(t);
        assert_eq!(back, x);
        assert_eq!(b.and(x, Lit::Const(false)), Lit::Const(false));
        assert_eq!(b.xor(x, x), Lit::Const(false));
        let y = b.and(x, t);
        let y2 = b.and(t, x);
        assert_eq!(y, y2);
        assert_eq!(b.and_count(), 1);
    }

    #[test]
    fn or_truth_table() {
        let mut b = Builder::new();
        let x = b.input("x");
        let y = b.input("y");
        let o = b.or(x, y);
        let c = b.finish(o);
        for v in 0..4u64 {
            let bits = Bits::from_u64(v, 2);
            assert_eq!(c.eval(&bits).unwrap(), v != 0);
        }
    }

    #[test]
    fn constant_output_and_bad_wiring() {
        let c = Builder::new().finish(Lit::Const(true));
        assert!(c.eval(&Bits::new()).unwrap());
        assert!(BoolCircuit::new(vec!["a".into()], vec![GateOp::And(0, 1)], 1).is_err());
    }
}
