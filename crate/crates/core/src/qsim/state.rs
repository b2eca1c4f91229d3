use rand::Rng;

use super::gate::{Circuit, UnitaryDescriptor};
use super::matrix::{CMatrix, C64, ONE, ZERO};
use crate::bits::Bits;
use crate::error::{Error, Result};

pub const TOL: f64 = 1e-9;

/// An M-qubit register. Qubit 0 is the most significant bit of the basis
/// index. Mixed states keep ρ row-major, which doubles as a 2M-qubit vector
/// whose first M qubits index rows.
#[derive(Debug, Clone, PartialEq)]
pub enum QState {
    Pure { n: usize, amps: Vec<C64> },
    Mixed { n: usize, rho: Vec<C64> },
}

impl QState {
    pub fn zero(n: usize) -> Self {
        Self::basis(n, 0)
    }

    pub fn basis(n: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n];
        amps[index] = ONE;
        QState::Pure { n, amps }
    }

    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let n = log2_exact(amps.len())?;
        let s = QState::Pure { n, amps };
        s.validate()?;
        Ok(s)
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(mut amps: Vec<C64>) -> Result<Self> {
        let n = log2_exact(amps.len())?;
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm <= 1e-300 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        for a in &mut amps {
            *a /= norm;
        }
        Ok(QState::Pure { n, amps })
    }

    pub fn from_density(m: CMatrix) -> Result<Self> {
        let n = log2_exact(m.dim())?;
        let s = QState::Mixed {
            n,
            rho: m.into_data(),
        };
        s.validate()?;
        Ok(s)
    }

    /// Density operator without any validity checks; used for linear
    /// bookkeeping on operator bases.
    pub fn raw_operator(m: CMatrix) -> Result<Self> {
        let n = log2_exact(m.dim())?;
        Ok(QState::Mixed {
            n,
            rho: m.into_data(),
        })
    }

    pub fn maximally_mixed(m: usize) -> Self {
        let mut rho = CMatrix::identity(1 << m);
        let w = C64::new(1.0 / (1u64 << m) as f64, 0.0);
        for z in rho.data_mut() {
            *z *= w;
        }
        QState::Mixed {
            n: m,
            rho: rho.into_data(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        match self {
            QState::Pure { n, .. } | QState::Mixed { n, .. } => *n,
        }
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits()
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, QState::Pure { .. })
    }

    pub fn amplitudes(&self) -> Option<&[C64]> {
        match self {
            QState::Pure { amps, .. } => Some(amps),
            QState::Mixed { .. } => None,
        }
    }

    pub fn density_matrix(&self) -> CMatrix {
        match self {
            QState::Pure { amps, .. } => CMatrix::outer(amps),
            QState::Mixed { n, rho } => CMatrix::from_vec(1 << n, rho.clone()).expect("square"),
        }
    }

    pub fn to_mixed(&self) -> QState {
        match self {
            QState::Pure { n, .. } => QState::Mixed {
                n: *n,
                rho: self.density_matrix().into_data(),
            },
            m => m.clone(),
        }
    }

    /// Squared norm (pure) or trace (mixed).
    pub fn trace(&self) -> f64 {
        match self {
            QState::Pure { amps, .. } => amps.iter().map(|a| a.norm_sqr()).sum(),
            QState::Mixed { n, rho } => {
                let d = 1 << n;
                (0..d).map(|i| rho[i * d + i].re).sum()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            QState::Pure { .. } => {
                let t = self.trace();
                if (t - 1.0).abs() > TOL {
                    return Err(Error::InvalidState(format!("squared norm {t}")));
                }
            }
            QState::Mixed { .. } => {
                let m = self.density_matrix();
                if !m.is_hermitian(TOL) {
                    return Err(Error::InvalidState("density matrix not Hermitian".into()));
                }
                let t = m.trace();
                if (t.re - 1.0).abs() > TOL || t.im.abs() > TOL {
                    return Err(Error::InvalidState(format!("trace {t}")));
                }
                let ev = m.hermitian_eigenvalues();
                if ev.first().copied().unwrap_or(0.0) < -TOL {
                    return Err(Error::InvalidState(format!(
                        "negative eigenvalue {}",
                        ev[0]
                    )));
                }
            }
        }
        Ok(())
    }

    /// Probability of each computational basis outcome on all qubits.
    pub fn basis_probabilities(&self) -> Vec<f64> {
        match self {
            QState::Pure { amps, .. } => amps.iter().map(|a| a.norm_sqr()).collect(),
            QState::Mixed { n, rho } => {
                let d = 1 << n;
                (0..d).map(|i| rho[i * d + i].re).collect()
            }
        }
    }

    pub fn apply_circuit(&mut self, c: &Circuit) -> Result<()> {
        if c.arity() != self.num_qubits() {
            return Err(Error::Dimension(format!(
                "{}-qubit circuit on {}-qubit state",
                c.arity(),
                self.num_qubits()
            )));
        }
        match self {
            QState::Pure { n, amps } => c.apply_vec(amps, *n, 0, false),
            QState::Mixed { n, rho } => {
                c.apply_vec(rho, 2 * *n, 0, false);
                c.apply_vec(rho, 2 * *n, *n, true);
            }
        }
        Ok(())
    }

    /// Applies a full unitary matrix over all qubits.
    pub fn apply_matrix(&mut self, u: &CMatrix) -> Result<()> {
        if u.dim() != self.dim() {
            return Err(Error::Dimension(format!(
                "{}-dim matrix on {}-dim state",
                u.dim(),
                self.dim()
            )));
        }
        match self {
            QState::Pure { amps, .. } => *amps = u.mul_vec(amps),
            QState::Mixed { n, rho } => {
                let m = CMatrix::from_vec(1 << *n, std::mem::take(rho)).expect("square");
                *rho = u.mul(&m).mul(&u.dagger()).into_data();
            }
        }
        Ok(())
    }

    /// Total weight on basis states whose index satisfies `keep`.
    pub fn weight_where(&self, keep: impl Fn(usize) -> bool) -> f64 {
        self.basis_probabilities()
            .into_iter()
            .enumerate()
            .filter(|(i, _)| keep(*i))
            .map(|(_, p)| p)
            .sum()
    }

    /// Zeroes every component outside the span of basis states satisfying
    /// `keep`, without renormalising.
    pub fn project_where(&mut self, keep: impl Fn(usize) -> bool) {
        match self {
            QState::Pure { amps, .. } => {
                for (i, a) in amps.iter_mut().enumerate() {
                    if !keep(i) {
                        *a = ZERO;
                    }
                }
            }
            QState::Mixed { n, rho } => {
                let d = 1 << *n;
                let k: Vec<bool> = (0..d).map(&keep).collect();
                for r in 0..d {
                    for c in 0..d {
                        if !(k[r] && k[c]) {
                            rho[r * d + c] = ZERO;
                        }
                    }
                }
            }
        }
    }

    /// Divides by the trace; fails on a zero operator.
    pub fn renormalize(&mut self) -> Result<()> {
        let t = self.trace();
        if t <= 1e-300 {
            return Err(Error::InvalidState("cannot renormalise a zero state".into()));
        }
        match self {
            QState::Pure { amps, .. } => {
                let s = t.sqrt();
                for a in amps {
                    *a /= s;
                }
            }
            QState::Mixed { rho, .. } => {
                for z in rho {
                    *z /= t;
                }
            }
        }
        Ok(())
    }

    /// Self ⊗ other; self's qubits come first.
    pub fn tensor(&self, other: &QState) -> QState {
        match (self, other) {
            (QState::Pure { n: a, amps: x }, QState::Pure { n: b, amps: y }) => {
                let mut amps = Vec::with_capacity(x.len() * y.len());
                for p in x {
                    for q in y {
                        amps.push(p * q);
                    }
                }
                QState::Pure { n: a + b, amps }
            }
            _ => QState::Mixed {
                n: self.num_qubits() + other.num_qubits(),
                rho: self
                    .density_matrix()
                    .kron(&other.density_matrix())
                    .into_data(),
            },
        }
    }

    /// Traces out the first `k` qubits, keeping the rest.
    pub fn trace_out_prefix(&self, k: usize) -> Result<QState> {
        let n = self.num_qubits();
        if k > n {
            return Err(Error::Dimension(format!("trace out {k} of {n} qubits")));
        }
        let rest = n - k;
        let dr = 1usize << rest;
        let dk = 1usize << k;
        let m = self.density_matrix();
        let mut out = CMatrix::zeros(dr);
        for x in 0..dk {
            for r in 0..dr {
                for c in 0..dr {
                    let v = out.get(r, c) + m.get(x * dr + r, x * dr + c);
                    out.set(r, c, v);
                }
            }
        }
        Ok(QState::Mixed {
            n: rest,
            rho: out.into_data(),
        })
    }

    /// Traces out the last `k` qubits, keeping the rest.
    pub fn trace_out_suffix(&self, k: usize) -> Result<QState> {
        let n = self.num_qubits();
        if k > n {
            return Err(Error::Dimension(format!("trace out {k} of {n} qubits")));
        }
        let keep = n - k;
        let dk = 1usize << k;
        let dr = 1usize << keep;
        let m = self.density_matrix();
        let mut out = CMatrix::zeros(dr);
        for r in 0..dr {
            for c in 0..dr {
                let mut acc = ZERO;
                for x in 0..dk {
                    acc += m.get(r * dk + x, c * dk + x);
                }
                out.set(r, c, acc);
            }
        }
        Ok(QState::Mixed {
            n: keep,
            rho: out.into_data(),
        })
    }

    /// ⟨ψ|ρ|ψ⟩ for a normalised pure target.
    pub fn fidelity_with_pure(&self, psi: &[C64]) -> f64 {
        match self {
            QState::Pure { amps, .. } => {
                let ov: C64 = psi.iter().zip(amps).map(|(p, a)| p.conj() * a).sum();
                ov.norm_sqr()
            }
            QState::Mixed { .. } => {
                let m = self.density_matrix();
                let mv = m.mul_vec(psi);
                psi.iter()
                    .zip(&mv)
                    .map(|(p, x)| p.conj() * x)
                    .sum::<C64>()
                    .re
            }
        }
    }

    /// Tr(Aρ) for an arbitrary operator A.
    pub fn expectation(&self, a: &CMatrix) -> Result<C64> {
        if a.dim() != self.dim() {
            return Err(Error::Dimension(format!(
                "{}-dim operator on {}-dim state",
                a.dim(),
                self.dim()
            )));
        }
        Ok(match self {
            QState::Pure { amps, .. } => {
                let av = a.mul_vec(amps);
                amps.iter().zip(&av).map(|(p, x)| p.conj() * x).sum()
            }
            QState::Mixed { .. } => a.trace_product(&self.density_matrix()),
        })
    }

    fn prefix_weights(&self, l: usize) -> Vec<f64> {
        let n = self.num_qubits();
        let shift = n - l;
        let mut w = vec![0.0; 1 << l];
        for (i, p) in self.basis_probabilities().into_iter().enumerate() {
            w[i >> shift] += p;
        }
        w
    }

    fn collapse_prefix(&mut self, l: usize, o: usize) {
        let shift = self.num_qubits() - l;
        self.project_where(|i| i >> shift == o);
    }

    /// Applies X on each prefix qubit whose measured value was 1, returning
    /// the first `l` qubits to |0⟩.
    pub fn reset_prefix(&mut self, outcome: &Bits) {
        let n = self.num_qubits();
        let l = outcome.len();
        let mut flip = Circuit::new(n);
        for q in 0..l {
            if outcome.get(q) {
                flip.push(super::gate::Gate::X(q)).expect("prefix qubit");
            }
        }
        self.apply_circuit(&flip).expect("same width");
    }
}

fn log2_exact(len: usize) -> Result<usize> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::Dimension(format!("length {len} is not a power of two")));
    }
    Ok(len.trailing_zeros() as usize)
}

/// Prefix outcome `o` (qubit 0 highest) as a bit string with bit j = qubit j.
pub fn outcome_bits(o: usize, l: usize) -> Bits {
    let mut b = Bits::zeros(l);
    for j in 0..l {
        if (o >> (l - 1 - j)) & 1 == 1 {
            b.set(j, true);
        }
    }
    b
}

pub fn outcome_index(o: &Bits) -> usize {
    let l = o.len();
    (0..l).fold(0, |acc, j| acc | ((o.get(j) as usize) << (l - 1 - j)))
}

pub fn apply_unitary(mut state: QState, u: &UnitaryDescriptor) -> Result<QState> {
    match u {
        UnitaryDescriptor::Bottom => Err(Error::Dimension(
            "cannot apply the halt marker as a unitary".into(),
        )),
        UnitaryDescriptor::Circuit(c) => {
            state.apply_circuit(c)?;
            Ok(state)
        }
    }
}

/// Measures the first `l` qubits in the computational basis.
pub fn measure_prefix<R: Rng + ?Sized>(
    mut state: QState,
    l: usize,
    rng: &mut R,
) -> Result<(Bits, QState)> {
    let n = state.num_qubits();
    if l > n {
        return Err(Error::Dimension(format!("measure {l} of {n} qubits")));
    }
    if l == 0 {
        return Ok((Bits::new(), state));
    }
    let w = state.prefix_weights(l);
    let total: f64 = w.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    let mut o = w.len() - 1;
    for (i, &p) in w.iter().enumerate() {
        if u < p {
            o = i;
            break;
        }
        u -= p;
    }
    // never land on a zero-weight branch through round-off
    if w[o] <= 0.0 {
        o = w
            .iter()
            .enumerate()
            .rev()
            .find(|(_, &p)| p > 0.0)
            .map(|(i, _)| i)
            .ok_or_else(|| Error::InvalidState("state has zero weight".into()))?;
    }
    state.collapse_prefix(l, o);
    state.renormalize()?;
    Ok((outcome_bits(o, l), state))
}

/// Deterministic replay: forces the given prefix outcome. Returns the
/// probability of that branch together with the renormalised state.
pub fn measure_prefix_forced(mut state: QState, outcome: &Bits) -> Result<(f64, QState)> {
    let l = outcome.len();
    let n = state.num_qubits();
    if l > n {
        return Err(Error::Dimension(format!("measure {l} of {n} qubits")));
    }
    if l == 0 {
        return Ok((1.0, state));
    }
    let o = outcome_index(outcome);
    let total = state.trace();
    let p = state.prefix_weights(l)[o] / total;
    if p <= 1e-15 {
        return Err(Error::ImpossibleBranch {
            outcome: outcome.to_string(),
        });
    }
    state.collapse_prefix(l, o);
    state.renormalize()?;
    Ok((p, state))
}

/// Collapses onto a forced prefix outcome without renormalising; linear in
/// the input operator.
pub fn project_prefix(mut state: QState, outcome: &Bits) -> Result<QState> {
    let l = outcome.len();
    if l > state.num_qubits() {
        return Err(Error::Dimension(format!(
            "measure {l} of {} qubits",
            state.num_qubits()
        )));
    }
    if l > 0 {
        state.collapse_prefix(l, outcome_index(outcome));
    }
    Ok(state)
}

pub fn maximally_mixed(m: usize) -> QState {
    QState::maximally_mixed(m)
}

/// A POVM element 0 ⪯ Λ ⪯ I.
#[derive(Debug, Clone, PartialEq)]
pub struct Effect {
    matrix: CMatrix,
}

impl Effect {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.dim().is_power_of_two() {
            return Err(Error::InvalidEffect(format!("dimension {}", matrix.dim())));
        }
        if !matrix.is_hermitian(TOL) {
            return Err(Error::InvalidEffect("not Hermitian".into()));
        }
        let ev = matrix.hermitian_eigenvalues();
        let lo = ev.first().copied().unwrap_or(0.0);
        let hi = ev.last().copied().unwrap_or(0.0);
        if lo < -TOL || hi > 1.0 + TOL {
            return Err(Error::InvalidEffect(format!(
                "eigenvalues span [{lo}, {hi}]"
            )));
        }
        Ok(Effect { matrix })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn num_qubits(&self) -> usize {
        self.matrix.dim().trailing_zeros() as usize
    }
}

/// Tr(Λρ).
pub fn povm_prob(effect: &Effect, state: &QState) -> Result<f64> {
    Ok(state.expectation(&effect.matrix)?.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::gate::Gate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bell_pair_amplitudes() {
        let c = Circuit::new(2)
            .with(Gate::H(0))
            .unwrap()
            .with(Gate::Cnot { control: 0, target: 1 })
            .unwrap();
        let s = apply_unitary(QState::zero(2), &c.into()).unwrap();
        let a = s.amplitudes().unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expect = [h, 0.0, 0.0, h];
        for (x, e) in a.iter().zip(expect) {
            assert!((x.re - e).abs() < 1e-12 && x.im.abs() < 1e-12);
        }
    }

    #[test]
    fn mixed_and_pure_agree_under_circuits() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = CMatrix::random_unitary(8, &mut rng);
        let c = Circuit::new(3)
            .with(Gate::dense(vec![1, 2, 0], u).unwrap())
            .unwrap()
            .with(Gate::T(1))
            .unwrap()
            .with(Gate::Toffoli { c1: 2, c2: 1, target: 0 })
            .unwrap();
        let mut p = QState::basis(3, 5);
        let mut m = p.to_mixed();
        p.apply_circuit(&c).unwrap();
        m.apply_circuit(&c).unwrap();
        assert!(p.density_matrix().max_abs_diff(&m.density_matrix()) < 1e-12);
        m.validate().unwrap();
    }

    #[test]
    fn forced_measurement_reports_impossible_branch() {
        let s = QState::basis(2, 0b10);
        let (p, _) = measure_prefix_forced(s.clone(), &Bits::parse("10").unwrap()).unwrap();
        assert!((p - 1.0).abs() < 1e-15);
        let err = measure_prefix_forced(s, &Bits::parse("01").unwrap()).unwrap_err();
        assert!(matches!(err, Error::ImpossibleBranch { .. }));
    }

    #[test]
    fn partial_traces() {
        // |0⟩ ⊗ |+⟩: tracing out qubit 0 leaves |+⟩⟨+|
        let plus = QState::normalized(vec![ONE, ONE]).unwrap();
        let s = QState::zero(1).tensor(&plus);
        let r = s.trace_out_prefix(1).unwrap().density_matrix();
        assert!((r.get(0, 1).re - 0.5).abs() < 1e-12);
        let l = s.trace_out_suffix(1).unwrap().density_matrix();
        assert!((l.get(0, 0).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn effect_bounds_are_enforced() {
        assert!(Effect::new(CMatrix::identity(2).scale(C64::new(1.5, 0.0))).is_err());
        assert!(Effect::new(CMatrix::from_real(2, &[0.0, 1.0, 0.0, 0.0]).unwrap()).is_err());
        let e = Effect::new(CMatrix::from_real(2, &[1.0, 0.0, 0.0, 0.0]).unwrap()).unwrap();
        assert!((povm_prob(&e, &maximally_mixed(1)).unwrap() - 0.5).abs() < 1e-12);
    }
}
