//! Command-line front end: experiment configuration, deterministic seeding,
//! JSON envelope emission (CSV for epsilon-tables only), and the bundled
//! verification suites.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 configuration or
//! shape errors, 3 numerical degeneracy, 4 node budget exceeded.

mod envelope;
mod run;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use envelope::Envelope;
use quatpot::Error;

#[derive(Parser)]
#[command(
    name = "quatpot",
    version,
    about = "Quaternionic Monge-Ampere operators, positivity cones, and pairing experiments",
    propagate_version = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Quaternionic dimension n; the flat space is H^n = R^{4n}. Must be >= 2.
    #[arg(long, global = true, default_value_t = 2)]
    pub n: usize,

    /// RNG seed. Mandatory for every sampled computation (QMC quadrature and
    /// all verification suites); omission there is a configuration error.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Quadrature nodes per axis for grid rules.
    #[arg(long = "nodes-per-axis", global = true, default_value_t = 4)]
    pub nodes_per_axis: usize,

    /// Use quasi-random sampling with this many nodes instead of a grid.
    #[arg(long = "qmc-samples", global = true)]
    pub qmc_samples: Option<u64>,

    /// Tolerance override for pass/fail checks (per-command default otherwise).
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// Also write the JSON envelope to this path.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker thread count (default: all cores). Recorded in the envelope;
    /// results are bitwise independent of it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Subcommand)]
pub enum Command {
    /// Moore determinant and spectrum of a quaternionic Hermitian matrix.
    MooreDet {
        /// `identity`, `identity:N`, `diag:a,b,...`, or a path to a JSON file
        /// holding an n x n array of [t,x,y,z] quadruples.
        #[arg(long, default_value = "identity")]
        matrix: String,
    },
    /// Quaternionic Hessian of a scalar field at a point.
    Hessian {
        /// Field in the mini-language (see docs/fields.md).
        #[arg(long)]
        field: String,
        /// Comma-separated coordinates, 4n of them.
        #[arg(long)]
        point: String,
    },
    /// Scan a quadrature node set for violations of Hessian positivity.
    PshCheck {
        #[arg(long)]
        field: String,
        /// Box bounds `lo,hi`, applied to every coordinate.
        #[arg(long = "box", default_value = "-1,1")]
        box_spec: String,
        /// Use the flat torus instead of a box.
        #[arg(long)]
        torus: bool,
    },
    /// Mixed Monge-Ampere pairing of k fields against a test weight.
    MaPairing {
        /// Field in the mini-language; repeat the flag for mixed pairings.
        #[arg(long = "field", required = true)]
        fields: Vec<String>,
        /// `bump:RADIUS` (compact support, boxes), `one`, or a field spec
        /// (torus only).
        #[arg(long, default_value = "bump:0.9")]
        phi: String,
        #[arg(long = "box", default_value = "-1,1")]
        box_spec: String,
        #[arg(long)]
        torus: bool,
    },
    /// Epsilon-table for a smoothing family; CSV output on demand.
    Converge {
        /// `sqrt_norm2_eps` or `logcosh`.
        #[arg(long, default_value = "sqrt_norm2_eps")]
        family: String,
        /// Comma-separated epsilon schedule, strictly positive.
        #[arg(long = "eps-list", default_value = "0.4,0.2,0.1,0.05,0.025,0.0125")]
        eps_list: String,
        /// Number of Hessian factors in the pairing (default n).
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value = "bump:0.9")]
        phi: String,
        #[arg(long = "box", default_value = "-1,1")]
        box_spec: String,
        /// Write the epsilon-table as CSV to this path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// L^1-mass ratio of a field tuple between nested boxes.
    Cln {
        #[arg(long = "field", required = true)]
        fields: Vec<String>,
        /// Inner box `lo,hi`.
        #[arg(long, default_value = "-1,1")]
        inner: String,
        /// Outer box `lo,hi`; must strictly contain the inner box.
        #[arg(long, default_value = "-2,2")]
        outer: String,
    },
    /// Bundled verification suites (all require --seed).
    Verify {
        #[command(subcommand)]
        suite: Suite,
    },
}

#[derive(Subcommand)]
pub enum Suite {
    /// Determinant oracle equivalence plus exterior differential identities.
    Algebra {
        #[arg(long, default_value_t = 50)]
        trials: u32,
    },
    /// Exact multiplicativity over the rational backend.
    Multiplicativity {
        #[arg(long, default_value_t = 50)]
        trials: u32,
    },
    /// Adjointness of the second-order operator under the torus pairing.
    Adjoint {
        #[arg(long, default_value_t = 25)]
        trials: u32,
    },
    /// PSD equivalence and wedge closure for the positivity cones.
    Cones {
        #[arg(long, default_value_t = 100)]
        trials: u32,
    },
    /// Hessian image against the normalized second-order operator.
    DeltaConsistency {
        #[arg(long, default_value_t = 50)]
        trials: u32,
    },
}

fn command_name(c: &Command) -> String {
    match c {
        Command::MooreDet { .. } => "moore-det".into(),
        Command::Hessian { .. } => "hessian".into(),
        Command::PshCheck { .. } => "psh-check".into(),
        Command::MaPairing { .. } => "ma-pairing".into(),
        Command::Converge { .. } => "converge".into(),
        Command::Cln { .. } => "cln".into(),
        Command::Verify { suite } => match suite {
            Suite::Algebra { .. } => "verify algebra".into(),
            Suite::Multiplicativity { .. } => "verify multiplicativity".into(),
            Suite::Adjoint { .. } => "verify adjoint".into(),
            Suite::Cones { .. } => "verify cones".into(),
            Suite::DeltaConsistency { .. } => "verify delta-consistency".into(),
        },
    }
}

fn base_config(cli: &Cli) -> BTreeMap<String, Value> {
    let mut m = BTreeMap::new();
    m.insert("n".into(), json!(cli.n));
    m.insert("seed".into(), json!(cli.seed));
    m.insert("nodes_per_axis".into(), json!(cli.nodes_per_axis));
    m.insert("qmc_samples".into(), json!(cli.qmc_samples));
    m.insert("tol".into(), json!(cli.tol));
    m.insert("threads".into(), json!(cli.threads));
    m.insert(
        "threads_used".into(),
        json!(rayon::current_num_threads()),
    );
    m
}

fn exit_for(err: &Error) -> u8 {
    match err {
        Error::NumericalDegeneracy(_) => 3,
        Error::NodeBudgetExceeded { .. } => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let t0 = Instant::now();
    if cli.n < 2 {
        eprintln!("error: n must be at least 2, got {}", cli.n);
        return ExitCode::from(2);
    }
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let mut config = base_config(&cli);
    match run::dispatch(&cli, &mut config) {
        Ok((data, checks)) => {
            let failed = checks.iter().any(|c| c.status == "fail");
            let env = Envelope::new(
                command_name(&cli.command),
                config,
                checks,
                data,
                t0.elapsed(),
            );
            match env.emit(cli.out.as_deref()) {
                Ok(()) => ExitCode::from(u8::from(failed)),
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
