//! Adversaries: the malicious-verifier zoo the simulator is tested
//! against, malicious provers, and the contrived verifier V′ with the
//! apparatus showing that any simulator for it must run straight-line.

pub mod contrived;
pub mod events;
pub mod extract;
pub mod policy;
pub mod provers;
pub mod zoo;

pub use contrived::{build_contrived_verifier, ContrivedOracle, ContrivedVerifier, QueryLog, QueryRecord, VAnswer, VQuery};
pub use events::{classify_queries, EventCounters};
pub use extract::{extract_prover, run_extracted, CiphertextMode, ExtractedProver, ExtractionOutcome};
pub use policy::{run_forgeries, run_policy, PolicyOutcome, PolicyParams, Probe, SimPolicy};
pub use provers::{decider_prover, guessing_prover, mauling_prover};
pub use zoo::{abort_exit, build_zoo, zoo_by_name, RandomVerifier, ZooKind, ZooVerifier};
