use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spacezk::harness::{bench, run_experiment, Experiment, ExperimentConfig, Report};
use spacezk::protocol::Transport;

#[derive(Parser)]
#[command(name = "spacezk", version, about = "Space-bounded quantum zero-knowledge experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// χ² significance level.
    #[arg(long, default_value_t = 1e-3)]
    alpha: f64,
    /// Monte-Carlo tolerance in standard errors.
    #[arg(long, default_value_t = 3.0)]
    sigmas: f64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sessions of one prover (honest, guessing, mauling) against the honest verifier.
    RunProtocol {
        #[arg(long, default_value = "honest")]
        prover: String,
        #[arg(long)]
        lambda: Option<usize>,
        #[arg(long)]
        t: Option<u32>,
        #[arg(long)]
        runs: Option<u64>,
        #[arg(long, default_value = "direct")]
        transport: String,
        #[command(flatten)]
        common: Common,
    },
    /// The simulator against a named zoo verifier.
    RunSim {
        #[arg(long, default_value = "honest")]
        verifier: String,
        /// Verifier width M.
        #[arg(long = "M", short = 'M')]
        width: Option<usize>,
        #[arg(long)]
        lambda: Option<usize>,
        #[arg(long)]
        t: Option<u32>,
        #[arg(long)]
        runs: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// A simulator policy against the contrived verifier.
    RunImpossibility {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long, default_value = "straight-line")]
        policy: String,
        #[arg(long)]
        lambda: Option<usize>,
        #[arg(long)]
        runs: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Any named experiment with its defaults, optionally overridden.
    Run {
        experiment: String,
        #[arg(long)]
        lambda: Option<usize>,
        #[arg(long)]
        trials: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Wall-clock cost of a session, a simulation and a bound check.
    Bench {
        #[arg(long, default_value_t = 16)]
        lambda: usize,
        #[arg(long, default_value_t = 40)]
        t: u32,
        #[arg(long, default_value_t = 10)]
        reps: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Every acceptance experiment at its defaults.
    AllAcceptance {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Write all reports as one JSON array here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn config(name: &str, c: &Common) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(name, c.seed);
    cfg.out = c.out.clone();
    cfg.alpha = c.alpha;
    cfg.sigmas = c.sigmas;
    cfg
}

fn finish(reports: &[Report]) -> ExitCode {
    for r in reports {
        println!("{}", r.to_text());
    }
    if reports.iter().all(Report::passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn run(cli: Cli) -> spacezk::Result<ExitCode> {
    let cfg = match cli.cmd {
        Cmd::RunProtocol {
            prover,
            lambda,
            t,
            runs,
            transport,
            common,
        } => {
            let mut cfg = config(Experiment::Protocol.name(), &common);
            cfg.prover = Some(prover);
            cfg.lambda = lambda;
            cfg.t = t;
            cfg.trials = runs;
            cfg.transport = transport.parse::<Transport>()?;
            cfg
        }
        Cmd::RunSim {
            verifier,
            width,
            lambda,
            t,
            runs,
            common,
        } => {
            let mut cfg = config(Experiment::Sim.name(), &common);
            cfg.verifier = Some(verifier);
            cfg.width = width;
            cfg.lambda = lambda;
            cfg.t = t;
            cfg.trials = runs;
            cfg
        }
        Cmd::RunImpossibility {
            n,
            rounds,
            policy,
            lambda,
            runs,
            common,
        } => {
            let mut cfg = config(Experiment::Policy.name(), &common);
            cfg.n = n;
            cfg.rounds = rounds;
            cfg.policy = Some(policy);
            cfg.lambda = lambda;
            cfg.trials = runs;
            cfg
        }
        Cmd::Run {
            experiment,
            lambda,
            trials,
            common,
        } => {
            let mut cfg = config(&experiment, &common);
            cfg.lambda = lambda;
            cfg.trials = trials;
            cfg
        }
        Cmd::Bench { lambda, t, reps, seed } => {
            for (k, v) in bench(lambda, t, reps, seed)? {
                println!("{k:<28} {v:>10.3}");
            }
            return Ok(ExitCode::SUCCESS);
        }
        Cmd::AllAcceptance { seed, out } => {
            let mut reports = vec![];
            for e in Experiment::ACCEPTANCE {
                let r = run_experiment(&ExperimentConfig::new(e.name(), seed))?;
                eprintln!("{:<28} {}", e.name(), if r.passed() { "PASS" } else { "FAIL" });
                reports.push(r);
            }
            if let Some(path) = out {
                let json = serde_json::to_string_pretty(&reports).map_err(|e| spacezk::Error::Format(e.to_string()))?;
                std::fs::write(path, json)?;
            }
            return Ok(finish(&reports));
        }
    };
    Ok(finish(&[run_experiment(&cfg)?]))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
