//! Cloning experiments: given one copy of |A⟩ and oracle access to U_A,
//! try to output |A⟩ ⊗ |A⟩. Success is the overlap with |A⟩^{⊗2}.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;

use super::{measure_prefix_all, Subspace, SubspaceOracleHandle};
use crate::error::{Error, Result};
use crate::qsim::{CMatrix, QState, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CloneStrategy {
    /// Measure |A⟩ in the computational basis and output |x⟩|x⟩.
    MeasureAndResend,
    /// Output |A⟩ ⊗ |0ⁿ⟩.
    IdentityPad,
    /// Keep |A⟩ and grow a second copy from |+ⁿ⟩ by q Grover iterations
    /// that reflect about |A⟩ through U_A.
    OracleGroverBudget(u32),
}

impl FromStr for CloneStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "measure_and_resend" => Ok(CloneStrategy::MeasureAndResend),
            "identity_pad" => Ok(CloneStrategy::IdentityPad),
            _ => {
                let q = s
                    .strip_prefix("oracle_grover_budget(")
                    .and_then(|r| r.strip_suffix(')'))
                    .and_then(|q| q.parse().ok())
                    .ok_or_else(|| Error::Config(format!("unknown cloning strategy {s:?}")))?;
                Ok(CloneStrategy::OracleGroverBudget(q))
            }
        }
    }
}

impl fmt::Display for CloneStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CloneStrategy::MeasureAndResend => write!(f, "measure_and_resend"),
            CloneStrategy::IdentityPad => write!(f, "identity_pad"),
            CloneStrategy::OracleGroverBudget(q) => write!(f, "oracle_grover_budget({q})"),
        }
    }
}

impl CloneStrategy {
    /// Exact success probability averaged over A with dim A = n/2.
    pub fn predicted_success(&self, n: usize) -> f64 {
        let k = n / 2;
        match self {
            CloneStrategy::MeasureAndResend => 0.5f64.powi(2 * k as i32),
            CloneStrategy::IdentityPad => 0.5f64.powi(k as i32),
            CloneStrategy::OracleGroverBudget(q) => {
                // ⟨A|+ⁿ⟩ = 2^{(k−n)/2}
                let theta = (0.5f64.powf((n - k) as f64 / 2.0)).asin();
                ((2 * *q + 1) as f64 * theta).sin().powi(2)
            }
        }
    }

    /// Produces the two output registers from one copy of |A⟩.
    pub fn run<R: Rng + ?Sized>(
        &self,
        input: QState,
        oracle: &mut SubspaceOracleHandle,
        rng: &mut R,
    ) -> Result<(QState, QState)> {
        let n = input.num_qubits();
        match self {
            CloneStrategy::MeasureAndResend => {
                let x = measure_prefix_all(input, rng)?;
                Ok((QState::basis(n, x as usize), QState::basis(n, x as usize)))
            }
            CloneStrategy::IdentityPad => Ok((input, QState::zero(n))),
            CloneStrategy::OracleGroverBudget(q) => {
                let d = 1usize << n;
                let plus = vec![C64::new(1.0 / (d as f64).sqrt(), 0.0); d];
                let minus = QState::normalized(vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)])?;
                let mut reg = QState::Pure { n, amps: plus.clone() }.tensor(&minus);
                for _ in 0..*q {
                    reg = oracle.apply_ua(reg)?;
                    // diffusion 2|+⟩⟨+| − I on the data qubits
                    if let QState::Pure { amps, .. } = &mut reg {
                        for y in 0..2 {
                            let ov: C64 = (0..d).map(|x| plus[x] * amps[2 * x + y]).sum();
                            for x in 0..d {
                                amps[2 * x + y] = plus[x] * ov * 2.0 - amps[2 * x + y];
                            }
                        }
                    }
                }
                // the ancilla stays |−⟩; read the data register off y = 0
                let amps = reg.amplitudes().expect("pure");
                let data: Vec<C64> = (0..d).map(|x| amps[2 * x] * std::f64::consts::SQRT_2).collect();
                Ok((input, QState::Pure { n, amps: data }))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CloneReport {
    pub strategy: String,
    pub n: usize,
    pub trials: u64,
    pub successes: u64,
    pub success_rate: f64,
    /// Mean of the exact per-trial success probabilities.
    pub exact_mean: f64,
    pub predicted: f64,
    pub std_err: f64,
    pub total_queries: u64,
}

pub fn clone_experiment<R: Rng + ?Sized>(
    strategy: CloneStrategy,
    n: usize,
    trials: u64,
    rng: &mut R,
) -> Result<CloneReport> {
    if n % 2 != 0 || n == 0 {
        return Err(Error::Config(format!("ambient dimension {n} must be even and positive")));
    }
    let mut successes = 0;
    let mut exact = 0.0;
    let mut queries = 0;
    for _ in 0..trials {
        let a = Subspace::sample(n, n / 2, rng)?;
        let psi = a.state_vector();
        let mut oracle = SubspaceOracleHandle::new(a.clone());
        let (o1, o2) = strategy.run(a.prepare_state(), &mut oracle, rng)?;
        let p = o1.fidelity_with_pure(&psi) * o2.fidelity_with_pure(&psi);
        exact += p;
        if rng.gen::<f64>() < p {
            successes += 1;
        }
        queries += oracle.query_counter();
    }
    let predicted = strategy.predicted_success(n);
    let t = trials.max(1) as f64;
    Ok(CloneReport {
        strategy: strategy.to_string(),
        n,
        trials,
        successes,
        success_rate: successes as f64 / t,
        exact_mean: exact / t,
        predicted,
        std_err: (predicted * (1.0 - predicted) / t).sqrt(),
        total_queries: queries,
    })
}

/// Zero-query strategies that keep |A⟩ and emit a fixed second register.
#[derive(Debug, Clone, Serialize)]
pub struct FixedStateBounds {
    /// max over computational basis states x of E_A |⟨A|x⟩|².
    pub best_basis_state: f64,
    /// E_A |⟨A|+ⁿ⟩|².
    pub uniform_superposition: f64,
    /// Largest eigenvalue of E_A |A⟩⟨A|: the optimum over all fixed states.
    pub optimum: f64,
}

/// Exact averages over every k-dimensional subspace of F₂ⁿ.
pub fn fixed_state_bounds(n: usize, k: usize) -> Result<FixedStateBounds> {
    let all = super::all_subspaces(n, k)?;
    let d = 1usize << n;
    let mut avg = CMatrix::zeros(d);
    let w = 1.0 / all.len() as f64;
    let amp = 0.5f64.powi(k as i32);
    for a in &all {
        let m = a.members();
        for &x in &m {
            for &y in &m {
                let v = avg.get(x as usize, y as usize) + C64::new(amp * w, 0.0);
                avg.set(x as usize, y as usize, v);
            }
        }
    }
    let best_basis_state = (0..d).map(|i| avg.get(i, i).re).fold(0.0, f64::max);
    let uniform_superposition = avg.data().iter().map(|z| z.re).sum::<f64>() / d as f64;
    let optimum = *avg.hermitian_eigenvalues().last().expect("nonempty");
    Ok(FixedStateBounds {
        best_basis_state,
        uniform_superposition,
        optimum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategy_names_roundtrip() {
        for s in [
            CloneStrategy::MeasureAndResend,
            CloneStrategy::IdentityPad,
            CloneStrategy::OracleGroverBudget(3),
        ] {
            assert_eq!(s.to_string().parse::<CloneStrategy>().unwrap(), s);
        }
        assert!(matches!("photocopy".parse::<CloneStrategy>(), Err(Error::Config(_))));
    }
}
