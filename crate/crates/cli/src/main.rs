use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qae::config::{RunConfig, Suite};
use qae::matrix_io::parse_matrix;
use qae::CliError;
use qae_core::caps::{cap_fraction_bound, cap_fraction_exact, cap_fraction_montecarlo, kq_lowerbound_scenario};
use qae_core::cloning::{algebraic_bound_check, cloning_bounds};
use qae_core::density::{build_mu, complexity_report};
use qae_core::dyadic::Dyadic;
use qae_core::elementary::{basis_state, ElementaryVector};
use qae_core::entropy::DensityMatrix;
use qae_core::linalg::HermitianOperator;
use qae_core::machine::{enumerate, semimeasure, Budget, MachineOutput, DEFAULT_MAX_LEN_CAP};
use qae_core::randomness::{build_test, evaluate_test};
use qae_core::snapshot_io;
use serde_json::json;

#[derive(Parser)]
#[command(name = "qae", version, about = "Resource-bounded quantum algorithmic entropy lab")]
struct Cli {
    /// Flat `key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write JSON output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Program budget as `L,T`.
    #[arg(long, global = true)]
    budget: Option<Budget>,
    #[arg(long, global = true)]
    dim: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectra of mu and kappa plus complexity reports for given states.
    Mu {
        #[arg(long)]
        eps_reg: Option<Dyadic>,
        /// State in the elementary text encoding; repeatable. Defaults to
        /// the basis states.
        #[arg(long = "state")]
        states: Vec<String>,
    },
    /// Run verification suites and emit a pass/fail report.
    Verify {
        /// Suite name; repeatable. Overrides the configured list.
        #[arg(long = "suite")]
        suites: Vec<Suite>,
        /// Include wall-clock timings in the report.
        #[arg(long)]
        timing: bool,
    },
    /// Universal randomness test of a state against a density matrix file.
    Test {
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        state: String,
    },
    /// Cloning complexity bounds on the symmetric subspace.
    Clone {
        #[arg(long, default_value_t = 2)]
        fold: u32,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Empirical u(d, N) against the bound d/N'.
    Uneven {
        #[arg(long)]
        subspace_dim: usize,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
    },
    /// Cap fraction of the unit sphere in R^n.
    Caps {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Toy re-enactment of the Kq lower-bound argument.
    KqScenario {
        #[arg(long)]
        qubits: Option<u32>,
        #[arg(long)]
        threshold: Option<u32>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Enumerate and write a snapshot, or read one back and verify it.
    Snapshot {
        #[arg(long, conflicts_with = "read")]
        write: Option<PathBuf>,
        #[arg(long)]
        read: Option<PathBuf>,
    },
}


fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        cfg.apply_text(&text)?;
    }
    cfg.apply_env(std::env::vars())?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(b) = cli.budget {
        cfg.budget = b;
    }
    if let Some(d) = cli.dim {
        cfg.dim = d;
    }
    if let Some(o) = &cli.out {
        cfg.output_path = Some(o.clone());
    }
    Ok(cfg)
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

fn parse_state(enc: &str) -> Result<ElementaryVector, CliError> {
    enc.parse::<ElementaryVector>().map_err(|e| CliError::Config {
        line: None,
        msg: format!("state `{enc}`: {e}"),
    })
}

/// Returns whether every assertion held.
fn execute(cli: &Cli) -> Result<bool, CliError> {
    let mut cfg = load_config(cli)?;
    if let Command::Verify { suites, .. } = &cli.command {
        if !suites.is_empty() {
            cfg.suites = suites.clone();
        }
    }
    cfg.validate()?;
    let out = cfg.output_path.clone();
    let tol = cfg.tolerances;
    match &cli.command {
        Command::Mu { eps_reg, states } => {
            let snap = enumerate(cfg.dim, cfg.budget, DEFAULT_MAX_LEN_CAP)?;
            let table = semimeasure(&snap);
            let ua = build_mu(&snap, eps_reg.unwrap_or(cfg.eps_reg), &tol)?;
            let vectors: Vec<ElementaryVector> = if states.is_empty() {
                (1..=cfg.dim).map(|i| basis_state(i, cfg.dim)).collect::<Result<_, _>>()?
            } else {
                states.iter().map(|s| parse_state(s)).collect::<Result<_, _>>()?
            };
            let mut reports = Vec::new();
            for v in &vectors {
                let output = MachineOutput::State(v.clone());
                reports.push(complexity_report(&ua, Some(&table), &v.to_string(), Some(&output), &v.normalize()?)?);
            }
            let doc = json!({
                "dim": cfg.dim,
                "budget": cfg.budget.to_string(),
                "snapshot_digest": snapshot_io::digest(&snap),
                "trace_mu": ua.mu().trace(),
                "mu_spectrum": ua.mu().eig()?.values,
                "kappa_spectrum": ua.kappa().eig()?.values,
                "reports": reports,
            });
            emit(&pretty(&doc), out.as_deref())?;
            Ok(true)
        }
        Command::Verify { timing, .. } => {
            let report = qae::run(&cfg)?;
            emit(&report.to_json(*timing), out.as_deref())?;
            for s in &report.suites {
                for c in s.failures() {
                    eprintln!("FAIL {}::{}", s.name, c.name);
                }
            }
            Ok(report.passed)
        }
        Command::Test { rho, state } => {
            let text = fs::read_to_string(rho).map_err(|e| CliError::Io(format!("{}: {e}", rho.display())))?;
            let m = parse_matrix(&text)?;
            let rho = DensityMatrix::new(HermitianOperator::new(m, &tol)?, &tol)?;
            let psi = parse_state(state)?.normalize()?;
            let ua = build_mu(&enumerate(rho.dim(), cfg.budget, DEFAULT_MAX_LEN_CAP)?, cfg.eps_reg, &tol)?;
            let t = build_test(&ua, &rho, &tol)?;
            let v = evaluate_test(&t, &psi)?;
            let doc = json!({ "value": v.value, "deficiency_bits": v.deficiency, "trace_against_rho": t.trace_against(&rho) });
            emit(&pretty(&doc), out.as_deref())?;
            Ok(true)
        }
        Command::Clone { fold, samples } => {
            let b = cloning_bounds(
                cfg.dim,
                *fold,
                cfg.budget,
                cfg.eps_reg,
                samples.unwrap_or(cfg.samples),
                cfg.seed,
                &tol,
            )?;
            let ok = b.upper_holds(1e-9) && b.lower_holds(0.1);
            emit(&pretty(&json!({ "bounds": b, "upper_holds": b.upper_holds(1e-9), "lower_holds": b.lower_holds(0.1) })), out.as_deref())?;
            Ok(ok)
        }
        Command::Uneven {
            subspace_dim,
            trials,
            restarts,
        } => {
            let r = algebraic_bound_check(cfg.dim, *subspace_dim, trials.unwrap_or(cfg.trials), *restarts, cfg.seed)?;
            let ok = r.holds(1e-6);
            emit(&pretty(&json!({ "report": r, "holds": ok })), out.as_deref())?;
            Ok(ok)
        }
        Command::Caps { n, alpha, samples } => {
            let exact = cap_fraction_exact(*n, *alpha)?;
            let y = PI / 2.0 - alpha;
            let bound = if y > 0.0 {
                Some(cap_fraction_bound(*n, y, cfg.cap_constant)?)
            } else {
                None
            };
            let mc = cap_fraction_montecarlo(*n, *alpha, samples.unwrap_or(cfg.samples * 100).max(1), cfg.seed)?;
            let ok = bound.is_none_or(|b| exact <= b) && mc.agrees_with(exact, 4.0);
            let doc = json!({
                "n": n, "alpha": alpha, "exact": exact, "bound": bound, "constant": cfg.cap_constant,
                "estimate": mc.estimate, "stderr": mc.stderr, "samples": mc.samples, "holds": ok,
            });
            emit(&pretty(&doc), out.as_deref())?;
            Ok(ok)
        }
        Command::KqScenario {
            qubits,
            threshold,
            samples,
        } => {
            let r = kq_lowerbound_scenario(
                qubits.unwrap_or(cfg.kq_qubits),
                cfg.budget,
                *threshold,
                samples.unwrap_or(cfg.samples),
                cfg.seed,
                cfg.kq_exponent_c,
                tol.ortho_tol,
            )?;
            emit(&pretty(&json!({ "scenario": r, "holds": r.holds() })), out.as_deref())?;
            Ok(r.holds())
        }
        Command::Snapshot { write, read } => {
            let snap = match (write, read) {
                (_, Some(path)) => snapshot_io::read(path)?,
                (Some(path), None) => {
                    let snap = enumerate(cfg.dim, cfg.budget, DEFAULT_MAX_LEN_CAP)?;
                    snapshot_io::write(path, &snap)?;
                    snap
                }
                (None, None) => enumerate(cfg.dim, cfg.budget, DEFAULT_MAX_LEN_CAP)?,
            };
            let doc = json!({
                "dim": snap.dim(),
                "budget": snap.budget().to_string(),
                "entries": snap.entries().len(),
                "kraft_mass": snap.kraft_mass().to_string(),
                "digest": snapshot_io::digest(&snap),
            });
            emit(&pretty(&doc), out.as_deref())?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("qae: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
