use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::adversary::SimPolicy;
use crate::crypto::MAX_LAMBDA;
use crate::error::{Error, Result};
use crate::protocol::Transport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    /// Exact p′ versus (p/2^M)(1 − 2^{−λ}) on random verifiers.
    MixedStateBound,
    /// Lookahead iteration counts and their tail on the quantum-coin family.
    SimIterations,
    /// Peak qubits of every simulation across the zoo.
    Space,
    Completeness,
    Soundness,
    /// Commitment equivocation by exhaustion.
    Binding,
    /// Test^{U_A}, the two projection routes and C_A.
    Subspace,
    /// Measure-and-resend and identity-pad cloning.
    CloneNaive,
    /// V′ event counters and probe success rates.
    Impossibility,
    /// P̃ deciding membership through a straight-line simulator.
    Extraction,
    /// Real versus simulated transcript observables.
    ViewIndistinguishability,
    /// Sessions of one prover against the honest verifier.
    Protocol,
    /// Simulations against one named zoo verifier.
    Sim,
    /// One simulator policy against V′.
    Policy,
}

impl Experiment {
    pub const ALL: [Experiment; 14] = [
        Experiment::MixedStateBound,
        Experiment::SimIterations,
        Experiment::Space,
        Experiment::Completeness,
        Experiment::Soundness,
        Experiment::Binding,
        Experiment::Subspace,
        Experiment::CloneNaive,
        Experiment::Impossibility,
        Experiment::Extraction,
        Experiment::ViewIndistinguishability,
        Experiment::Protocol,
        Experiment::Sim,
        Experiment::Policy,
    ];

    /// The acceptance suite, in criterion order.
    pub const ACCEPTANCE: [Experiment; 11] = [
        Experiment::MixedStateBound,
        Experiment::SimIterations,
        Experiment::Space,
        Experiment::Completeness,
        Experiment::Soundness,
        Experiment::Binding,
        Experiment::Subspace,
        Experiment::CloneNaive,
        Experiment::Impossibility,
        Experiment::Extraction,
        Experiment::ViewIndistinguishability,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::MixedStateBound => "mixed-state-bound",
            Experiment::SimIterations => "sim-iterations",
            Experiment::Space => "space",
            Experiment::Completeness => "completeness",
            Experiment::Soundness => "soundness",
            Experiment::Binding => "binding",
            Experiment::Subspace => "subspace",
            Experiment::CloneNaive => "clone-naive",
            Experiment::Impossibility => "impossibility",
            Experiment::Extraction => "extraction",
            Experiment::ViewIndistinguishability => "view-indistinguishability",
            Experiment::Protocol => "protocol",
            Experiment::Sim => "sim",
            Experiment::Policy => "policy",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment {s:?}")))
    }
}

/// Inputs of one experiment. `None` fields take the experiment's default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub lambda: Option<usize>,
    pub t: Option<u32>,
    /// Verifier width M.
    pub width: Option<usize>,
    /// Subspace ambient dimension.
    pub n: Option<usize>,
    /// V′ rounds k.
    pub rounds: Option<usize>,
    pub trials: Option<u64>,
    pub seed: u64,
    pub transport: Transport,
    pub verifier: Option<String>,
    pub policy: Option<String>,
    pub prover: Option<String>,
    /// χ² significance level.
    pub alpha: f64,
    /// Monte-Carlo tolerance in standard errors.
    pub sigmas: f64,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(experiment: &str, seed: u64) -> Self {
        ExperimentConfig {
            experiment: experiment.into(),
            lambda: None,
            t: None,
            width: None,
            n: None,
            rounds: None,
            trials: None,
            seed,
            transport: Transport::Direct,
            verifier: None,
            policy: None,
            prover: None,
            alpha: 1e-3,
            sigmas: 3.0,
            out: None,
        }
    }

    pub fn kind(&self) -> Result<Experiment> {
        self.experiment.parse()
    }

    pub fn validate(&self) -> Result<Experiment> {
        let kind = self.kind()?;
        let bad = |what: String| Err(Error::Config(what));
        if let Some(l) = self.lambda {
            if l == 0 || l > MAX_LAMBDA {
                return bad(format!("λ = {l} outside 1..={MAX_LAMBDA}"));
            }
        }
        if self.t == Some(0) {
            return bad("t must be positive".into());
        }
        if let Some(m) = self.width {
            if m == 0 || m > 5 {
                return bad(format!("width M = {m} outside 1..=5"));
            }
        }
        if let Some(n) = self.n {
            if n == 0 || n % 2 == 1 || n > 10 {
                return bad(format!("n = {n} must be even and at most 10"));
            }
        }
        if let Some(k) = self.rounds {
            if k == 0 || k > crate::simulator::CHANNELS {
                return bad(format!("rounds = {k} outside 1..={}", crate::simulator::CHANNELS));
            }
        }
        if self.trials == Some(0) {
            return bad("trials must be positive".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("significance {} outside (0, 1)", self.alpha));
        }
        if !(self.sigmas > 0.0 && self.sigmas.is_finite()) {
            return bad(format!("σ multiplier {} must be positive", self.sigmas));
        }
        if let Some(p) = &self.policy {
            p.parse::<SimPolicy>()?;
        }
        if let Some(p) = &self.prover {
            if !["honest", "guessing", "mauling"].contains(&p.as_str()) {
                return bad(format!("unknown prover {p:?}"));
            }
        }
        Ok(kind)
    }
}
