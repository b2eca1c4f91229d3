use std::f64::consts::FRAC_1_SQRT_2;

use super::matrix::{CMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// One gate from the fixed universal set. Qubit indices are absolute within
/// the register the enclosing circuit acts on.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    H(usize),
    X(usize),
    Z(usize),
    T(usize),
    Cnot { control: usize, target: usize },
    Toffoli { c1: usize, c2: usize, target: usize },
    /// Wire permutation; measurement only ever targets a prefix.
    Swap(usize, usize),
    /// Dense unitary on up to three qubits; `targets[0]` is the most
    /// significant bit of the local index.
    Dense { targets: Vec<usize>, matrix: CMatrix },
}

impl Gate {
    pub fn dense(targets: Vec<usize>, matrix: CMatrix) -> Result<Gate> {
        if targets.is_empty() || targets.len() > 3 {
            return Err(Error::Dimension(format!(
                "dense gates act on 1..=3 qubits, got {}",
                targets.len()
            )));
        }
        if matrix.dim() != 1 << targets.len() {
            return Err(Error::Dimension(format!(
                "matrix of dim {} for {} targets",
                matrix.dim(),
                targets.len()
            )));
        }
        if !matrix.is_unitary(1e-9) {
            return Err(Error::Dimension("dense gate matrix is not unitary".into()));
        }
        Ok(Gate::Dense { targets, matrix })
    }

    /// Single-qubit real rotation |0⟩ ↦ cos θ|0⟩ + sin θ|1⟩.
    pub fn ry(q: usize, theta: f64) -> Gate {
        let (s, c) = theta.sin_cos();
        Gate::Dense {
            targets: vec![q],
            matrix: CMatrix::from_real(2, &[c, -s, s, c]).expect("2x2"),
        }
    }

    pub fn targets(&self) -> Vec<usize> {
        match self {
            Gate::H(q) | Gate::X(q) | Gate::Z(q) | Gate::T(q) => vec![*q],
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::Toffoli { c1, c2, target } => vec![*c1, *c2, *target],
            Gate::Swap(a, b) => vec![*a, *b],
            Gate::Dense { targets, .. } => targets.clone(),
        }
    }

    pub fn dagger(&self) -> Gate {
        match self {
            Gate::T(q) => Gate::Dense {
                targets: vec![*q],
                matrix: CMatrix::from_vec(2, vec![ONE, ZERO, ZERO, t_phase().conj()])
                    .expect("2x2"),
            },
            Gate::Dense { targets, matrix } => Gate::Dense {
                targets: targets.clone(),
                matrix: matrix.dagger(),
            },
            g => g.clone(),
        }
    }

    /// Applies the gate (or its entrywise conjugate) to an `nq`-qubit
    /// amplitude vector with every target shifted by `offset`.
    pub(crate) fn apply_vec(&self, v: &mut [C64], nq: usize, offset: usize, conj: bool) {
        let bit = |q: usize| 1usize << (nq - 1 - (q + offset));
        match self {
            Gate::H(q) => {
                let h = C64::new(FRAC_1_SQRT_2, 0.0);
                apply_1q(v, bit(*q), [h, h, h, -h]);
            }
            Gate::X(q) => {
                let s = bit(*q);
                for i in 0..v.len() {
                    if i & s == 0 {
                        v.swap(i, i | s);
                    }
                }
            }
            Gate::Z(q) => {
                let s = bit(*q);
                for (i, a) in v.iter_mut().enumerate() {
                    if i & s != 0 {
                        *a = -*a;
                    }
                }
            }
            Gate::T(q) => {
                let s = bit(*q);
                let ph = if conj { t_phase().conj() } else { t_phase() };
                for (i, a) in v.iter_mut().enumerate() {
                    if i & s != 0 {
                        *a *= ph;
                    }
                }
            }
            Gate::Cnot { control, target } => {
                let (c, t) = (bit(*control), bit(*target));
                for i in 0..v.len() {
                    if i & c != 0 && i & t == 0 {
                        v.swap(i, i | t);
                    }
                }
            }
            Gate::Toffoli { c1, c2, target } => {
                let (a, b, t) = (bit(*c1), bit(*c2), bit(*target));
                for i in 0..v.len() {
                    if i & a != 0 && i & b != 0 && i & t == 0 {
                        v.swap(i, i | t);
                    }
                }
            }
            Gate::Swap(x, y) => {
                let (a, b) = (bit(*x), bit(*y));
                for i in 0..v.len() {
                    if i & a != 0 && i & b == 0 {
                        v.swap(i, (i & !a) | b);
                    }
                }
            }
            Gate::Dense { targets, matrix } => {
                let masks: Vec<usize> = targets.iter().map(|&q| bit(q)).collect();
                let m: Vec<C64> = if conj {
                    matrix.data().iter().map(|z| z.conj()).collect()
                } else {
                    matrix.data().to_vec()
                };
                if masks.len() == 1 {
                    apply_1q(v, masks[0], [m[0], m[1], m[2], m[3]]);
                } else {
                    apply_dense(v, &masks, &m);
                }
            }
        }
    }
}

fn t_phase() -> C64 {
    C64::from_polar(1.0, std::f64::consts::FRAC_PI_4)
}

fn apply_1q(v: &mut [C64], s: usize, m: [C64; 4]) {
    let mut base = 0;
    while base < v.len() {
        for i in base..base + s {
            let (a, b) = (v[i], v[i + s]);
            v[i] = m[0] * a + m[1] * b;
            v[i + s] = m[2] * a + m[3] * b;
        }
        base += 2 * s;
    }
}

fn apply_dense(v: &mut [C64], masks: &[usize], m: &[C64]) {
    let k = masks.len();
    let d = 1usize << k;
    let all: usize = masks.iter().fold(0, |acc, &x| acc | x);
    let offsets: Vec<usize> = (0..d)
        .map(|local| {
            (0..k)
                .filter(|j| (local >> (k - 1 - j)) & 1 == 1)
                .fold(0, |acc, j| acc | masks[j])
        })
        .collect();
    let mut buf = vec![ZERO; d];
    for i in 0..v.len() {
        if i & all != 0 {
            continue;
        }
        for (b, &o) in buf.iter_mut().zip(&offsets) {
            *b = v[i | o];
        }
        for r in 0..d {
            let row = &m[r * d..(r + 1) * d];
            v[i | offsets[r]] = row.iter().zip(&buf).map(|(x, y)| x * y).sum();
        }
    }
}

/// A gate list over a fixed register width.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    arity: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(arity: usize) -> Self {
        Circuit {
            arity,
            gates: Vec::new(),
        }
    }

    pub fn identity(arity: usize) -> Self {
        Self::new(arity)
    }

    pub fn from_gates(arity: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut c = Circuit::new(arity);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, g: Gate) -> Result<()> {
        let t = g.targets();
        for (i, &q) in t.iter().enumerate() {
            if q >= self.arity {
                return Err(Error::Dimension(format!(
                    "gate target {q} outside register of {} qubits",
                    self.arity
                )));
            }
            if t[..i].contains(&q) {
                return Err(Error::Dimension(format!("gate repeats qubit {q}")));
            }
        }
        self.gates.push(g);
        Ok(())
    }

    pub fn with(mut self, g: Gate) -> Result<Self> {
        self.push(g)?;
        Ok(self)
    }

    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.arity != self.arity {
            return Err(Error::Dimension(format!(
                "cannot append a {}-qubit circuit to a {}-qubit one",
                other.arity, self.arity
            )));
        }
        self.gates.extend(other.gates.iter().cloned());
        Ok(())
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn dagger(&self) -> Circuit {
        Circuit {
            arity: self.arity,
            gates: self.gates.iter().rev().map(Gate::dagger).collect(),
        }
    }

    /// The circuit embedded in a wider register, qubits shifted by `offset`.
    pub fn embed(&self, arity: usize, offset: usize) -> Result<Circuit> {
        let shift = |q: usize| q + offset;
        let mut out = Circuit::new(arity);
        for g in &self.gates {
            let moved = match g {
                Gate::H(q) => Gate::H(shift(*q)),
                Gate::X(q) => Gate::X(shift(*q)),
                Gate::Z(q) => Gate::Z(shift(*q)),
                Gate::T(q) => Gate::T(shift(*q)),
                Gate::Cnot { control, target } => Gate::Cnot {
                    control: shift(*control),
                    target: shift(*target),
                },
                Gate::Toffoli { c1, c2, target } => Gate::Toffoli {
                    c1: shift(*c1),
                    c2: shift(*c2),
                    target: shift(*target),
                },
                Gate::Swap(a, b) => Gate::Swap(shift(*a), shift(*b)),
                Gate::Dense { targets, matrix } => Gate::Dense {
                    targets: targets.iter().map(|&q| shift(q)).collect(),
                    matrix: matrix.clone(),
                },
            };
            out.push(moved)?;
        }
        Ok(out)
    }

    /// Applies the gates in order to an `nq`-qubit vector.
    pub(crate) fn apply_vec(&self, v: &mut [C64], nq: usize, offset: usize, conj: bool) {
        for g in &self.gates {
            g.apply_vec(v, nq, offset, conj);
        }
    }

    /// The full 2^M × 2^M matrix; meant for tests at small M.
    pub fn matrix(&self) -> CMatrix {
        let d = 1usize << self.arity;
        let mut out = CMatrix::zeros(d);
        for col in 0..d {
            let mut v = vec![ZERO; d];
            v[col] = ONE;
            self.apply_vec(&mut v, self.arity, 0, false);
            for (row, a) in v.into_iter().enumerate() {
                out.set(row, col, a);
            }
        }
        out
    }
}

/// ⟨U⟩ as handed between blocks: a circuit, or the halt marker.
#[derive(Debug, Clone, PartialEq)]
pub enum UnitaryDescriptor {
    Circuit(Circuit),
    Bottom,
}

impl UnitaryDescriptor {
    pub fn is_bottom(&self) -> bool {
        matches!(self, UnitaryDescriptor::Bottom)
    }

    pub fn identity(arity: usize) -> Self {
        UnitaryDescriptor::Circuit(Circuit::identity(arity))
    }
}

impl From<Circuit> for UnitaryDescriptor {
    fn from(c: Circuit) -> Self {
        UnitaryDescriptor::Circuit(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn every_gate_is_unitary_and_dagger_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let gates = vec![
            Gate::H(0),
            Gate::X(1),
            Gate::Z(2),
            Gate::T(0),
            Gate::Cnot { control: 2, target: 0 },
            Gate::Toffoli { c1: 0, c2: 1, target: 2 },
            Gate::Swap(0, 2),
            Gate::dense(vec![2, 0], CMatrix::random_unitary(4, &mut rng)).unwrap(),
            Gate::dense(vec![1, 2, 0], CMatrix::random_unitary(8, &mut rng)).unwrap(),
        ];
        let c = Circuit::from_gates(3, gates).unwrap();
        let m = c.matrix();
        assert!(m.is_unitary(1e-9));
        let prod = c.dagger().matrix().mul(&m);
        assert!(prod.max_abs_diff(&CMatrix::identity(8)) < 1e-12);
    }

    #[test]
    fn target_validation() {
        assert!(Circuit::new(2).with(Gate::X(2)).is_err());
        assert!(Circuit::new(2).with(Gate::Cnot { control: 1, target: 1 }).is_err());
        assert!(Gate::dense(vec![0], CMatrix::from_real(2, &[1.0, 1.0, 0.0, 1.0]).unwrap()).is_err());
    }

    #[test]
    fn cnot_matrix_matches_hand_table() {
        // qubit 0 is the high bit: |10⟩ ↦ |11⟩
        let m = Circuit::new(2)
            .with(Gate::Cnot { control: 0, target: 1 })
            .unwrap()
            .matrix();
        assert_eq!(m.get(3, 2), ONE);
        assert_eq!(m.get(2, 3), ONE);
        assert_eq!(m.get(0, 0), ONE);
        assert_eq!(m.get(1, 1), ONE);
    }
}
