use rand::Rng;

use super::Subspace;
use crate::error::{Error, Result};
use crate::qsim::{CMatrix, QState, C64};

/// Black-box access to U_A = (I − P) ⊗ I + P ⊗ X with P = |A⟩⟨A|.
/// The subspace itself is not reachable through the handle.
#[derive(Debug)]
pub struct SubspaceOracleHandle {
    a: Subspace,
    psi: Vec<C64>,
    queries: u64,
}

impl SubspaceOracleHandle {
    pub fn new(a: Subspace) -> Self {
        let psi = a.state_vector();
        SubspaceOracleHandle { a, psi, queries: 0 }
    }

    pub fn ambient_dim(&self) -> usize {
        self.a.ambient_dim()
    }

    pub fn query_counter(&self) -> u64 {
        self.queries
    }

    /// Applies U_A to an (n+1)-qubit vector in place; the flag is the last
    /// qubit.
    fn apply_vec(&self, v: &mut [C64]) {
        let mut c = [C64::new(0.0, 0.0); 2];
        for (x, p) in self.psi.iter().enumerate() {
            if p.re != 0.0 {
                c[0] += p.conj() * v[2 * x];
                c[1] += p.conj() * v[2 * x + 1];
            }
        }
        // component along |A⟩|y⟩ moves to |A⟩|1−y⟩
        let d = c[1] - c[0];
        for (x, p) in self.psi.iter().enumerate() {
            if p.re != 0.0 {
                v[2 * x] += p * d;
                v[2 * x + 1] -= p * d;
            }
        }
    }

    pub fn apply_ua(&mut self, state: QState) -> Result<QState> {
        let n = self.ambient_dim();
        if state.num_qubits() != n + 1 {
            return Err(Error::Dimension(format!(
                "U_A acts on {} qubits, got {}",
                n + 1,
                state.num_qubits()
            )));
        }
        self.queries += 1;
        Ok(match state {
            QState::Pure { n, mut amps } => {
                self.apply_vec(&mut amps);
                QState::Pure { n, amps }
            }
            QState::Mixed { n, rho } => {
                // U_A is Hermitian: ρ' = U (U ρ)†
                let d = 1usize << n;
                let m = CMatrix::from_vec(d, rho).expect("square");
                let half = self.apply_columns(&m);
                let out = self.apply_columns(&half.dagger());
                QState::Mixed {
                    n,
                    rho: out.into_data(),
                }
            }
        })
    }

    fn apply_columns(&self, m: &CMatrix) -> CMatrix {
        let d = m.dim();
        let mut out = CMatrix::zeros(d);
        let mut col = vec![C64::new(0.0, 0.0); d];
        for j in 0..d {
            for (i, c) in col.iter_mut().enumerate() {
                *c = m.get(i, j);
            }
            self.apply_vec(&mut col);
            for (i, c) in col.iter().enumerate() {
                out.set(i, j, *c);
            }
        }
        out
    }

    /// Test^{U_A}: attach |0⟩, query U_A once, measure the flag. Passing
    /// leaves exactly |A⟩⟨A|.
    pub fn test_state<R: Rng + ?Sized>(&mut self, rho: &QState, rng: &mut R) -> Result<(bool, QState)> {
        let n = self.ambient_dim();
        if rho.num_qubits() != n {
            return Err(Error::Dimension(format!(
                "test expects {n} qubits, got {}",
                rho.num_qubits()
            )));
        }
        let joint = self.apply_ua(rho.tensor(&QState::zero(1)))?;
        let p1 = joint.weight_where(|i| i & 1 == 1) / joint.trace();
        let pass = rng.gen::<f64>() < p1;
        let flag = pass as usize;
        let mut post = joint;
        post.project_where(|i| i & 1 == flag);
        let reduced = match post {
            QState::Pure { n: m, amps } => QState::Pure {
                n: m - 1,
                amps: amps.into_iter().skip(flag).step_by(2).collect(),
            },
            mixed => mixed.trace_out_suffix(1)?,
        };
        let mut reduced = reduced;
        reduced.renormalize()?;
        Ok((pass, reduced))
    }

    /// Exact pass probability of [`Self::test_state`], charged as a query.
    pub fn test_pass_probability(&mut self, rho: &QState) -> Result<f64> {
        let joint = self.apply_ua(rho.tensor(&QState::zero(1)))?;
        Ok(joint.weight_where(|i| i & 1 == 1) / joint.trace())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::maximally_mixed;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn flips_the_flag_on_a_and_fixes_the_complement() {
        let a = Subspace::from_strings(&["1000", "0100"]).unwrap();
        let mut h = SubspaceOracleHandle::new(a.clone());
        let s = h.apply_ua(a.prepare_state().tensor(&QState::zero(1))).unwrap();
        let expect = a.prepare_state().tensor(&QState::basis(1, 1));
        assert!((s.fidelity_with_pure(expect.amplitudes().unwrap()) - 1.0).abs() < 1e-12);
        // |0001⟩ − |0000⟩ is orthogonal to |A⟩
        let mut v = vec![C64::new(0.0, 0.0); 16];
        v[1] = C64::new(1.0, 0.0);
        let orth = QState::normalized(v).unwrap().tensor(&QState::zero(1));
        let out = h.apply_ua(orth.clone()).unwrap();
        assert_eq!(out, orth);
        assert_eq!(h.query_counter(), 2);
    }

    #[test]
    fn mixed_and_pure_application_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = Subspace::sample(4, 2, &mut rng).unwrap();
        let mut h = SubspaceOracleHandle::new(a);
        let amps: Vec<C64> = CMatrix::random_unitary(32, &mut rng).data()[..32].to_vec();
        let p = QState::normalized(amps).unwrap();
        let m = h.apply_ua(p.to_mixed()).unwrap();
        let p = h.apply_ua(p).unwrap();
        assert!(p.density_matrix().max_abs_diff(&m.density_matrix()) < 1e-12);
    }

    #[test]
    fn test_on_maximally_mixed_passes_with_two_to_minus_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = Subspace::sample(4, 2, &mut rng).unwrap();
        let mut h = SubspaceOracleHandle::new(a);
        let p = h.test_pass_probability(&maximally_mixed(4)).unwrap();
        assert!((p - 1.0 / 16.0).abs() < 1e-12);
    }
}
