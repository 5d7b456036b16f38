use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use pursuit_core::bounds::{verify_rip_lemmas, BoundsReport};
use pursuit_core::ensembles::{
    concentration_check, generate, rip_exhaustive, rip_sampled, EnsembleKind, EnsembleSpec,
};
use pursuit_core::experiments::{
    run_compressible_study, run_phase_transition, CompressibleSpec, PhaseTransitionSpec, SnrResult,
};
use pursuit_core::linalg::io::{read_matrix, read_vector, write_matrix, write_vector};
use pursuit_core::pursuit::{run, Algorithm, Amplitude, PursuitConfig, SparseSignal};
use pursuit_core::rng::{self, Domain};
use pursuit_core::{Error, Result, SelectionRule};

#[derive(Parser)]
#[command(
    name = "pursuit-lab",
    version,
    about = "Greedy pursuit and RIP toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random measurement matrix. `.csv` output is text, anything else binary.
    Gen {
        #[arg(long)]
        kind: EnsembleKind,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw a random k-sparse signal and write y = Φx.
    Measure {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        seed: u64,
        /// Use ±1 amplitudes instead of standard normal.
        #[arg(long)]
        sign: bool,
        #[arg(long)]
        y_out: PathBuf,
        #[arg(long)]
        x_out: Option<PathBuf>,
    },
    /// Restricted isometry constant of order k, printed as one JSON line.
    Rip {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        k: usize,
        /// Sample this many k-subsets instead of enumerating all of them.
        #[arg(long)]
        sampled: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Monte Carlo check of the norm concentration inequality.
    Concentration {
        #[arg(long)]
        kind: EnsembleKind,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run MP, OMP or GP on y and write the per-iteration trace.
    Solve {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long)]
        algo: Algorithm,
        #[arg(long, value_parser = ["weak", "relaxed"])]
        rule: String,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        k: Option<usize>,
        /// Keep only the k largest coefficients after each OMP step.
        #[arg(long)]
        prune: bool,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long)]
        trace_out: PathBuf,
        #[arg(long)]
        x_out: Option<PathBuf>,
    },
    /// Evaluate every closed-form constant and condition for given δ_k, δ_{k+1}.
    Bounds {
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        delta1: f64,
        #[arg(long)]
        k: usize,
    },
    /// Certify δ_k exhaustively, then probe the implied inequalities.
    VerifyRipLemmas {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Phase-transition sweep from a TOML config.
    Phase {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// SNR study on power-law signals from a TOML config.
    Compressible {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn print_json(v: &impl serde::Serialize) -> Result<()> {
    println!(
        "{}",
        serde_json::to_string(v).map_err(|e| Error::Format(e.to_string()))?
    );
    Ok(())
}

fn execute(command: Command) -> Result<bool> {
    match command {
        Command::Gen {
            kind,
            m,
            n,
            seed,
            out,
        } => {
            let a = generate(&EnsembleSpec::new(kind, m, n, seed)?)?;
            write_matrix(&out, &a)?;
        }
        Command::Measure {
            matrix,
            k,
            seed,
            sign,
            y_out,
            x_out,
        } => {
            let phi = read_matrix(&matrix)?;
            let amplitude = if sign {
                Amplitude::Sign
            } else {
                Amplitude::Normal
            };
            let mut r = rng::stream(seed, Domain::Signal, 0);
            let x = SparseSignal::random(phi.cols(), k, amplitude, &mut r)?.to_dense();
            write_vector(&y_out, &phi.matvec(&x)?)?;
            if let Some(p) = x_out {
                write_vector(&p, &x)?;
            }
        }
        Command::Rip {
            input,
            k,
            sampled,
            seed,
        } => {
            let a = read_matrix(&input)?;
            let cert = match sampled {
                Some(trials) => rip_sampled(&a, k, trials, seed)?,
                None => rip_exhaustive(&a, k)?,
            };
            print_json(&cert)?;
        }
        Command::Concentration {
            kind,
            m,
            eps,
            trials,
            seed,
        } => {
            let report = concentration_check(kind, m, eps, trials, seed)?;
            print_json(&json!({
                "kind": report.kind,
                "epsilon": report.epsilon,
                "m": report.m,
                "trials": report.trials,
                "exceedances": report.exceedances,
                "empirical_rate": report.empirical_rate,
                "theoretical_bound": report.theoretical_bound,
                "within_bound": report.within_bound(),
            }))?;
        }
        Command::Solve {
            matrix,
            y,
            algo,
            rule,
            alpha,
            k,
            prune,
            tol,
            max_iter,
            trace_out,
            x_out,
        } => {
            let phi = read_matrix(&matrix)?;
            let y = read_vector(&y)?;
            let mut cfg =
                PursuitConfig::new(algo, SelectionRule::from_name(&rule, alpha)?, phi.rows());
            if let Some(k) = k {
                cfg = cfg.with_sparsity(k);
            }
            cfg = cfg.with_pruning(prune);
            if let Some(t) = tol {
                cfg = cfg.with_residual_tol(t);
            }
            if let Some(n) = max_iter {
                cfg = cfg.with_max_iterations(n);
            }
            let (state, trace) = run(&phi, y.as_slice(), &cfg)?;
            fs::write(&trace_out, trace.to_csv())?;
            if let Some(p) = x_out {
                write_vector(&p, &state.estimate)?;
            }
            print_json(&json!({
                "status": trace.status,
                "iterations": trace.iterations(),
                "final_residual_norm": trace.final_residual_norm(),
                "support": state.support.indices(),
            }))?;
        }
        Command::Bounds { delta, delta1, k } => {
            print_json(&BoundsReport::new(delta, delta1, k)?)?;
        }
        Command::VerifyRipLemmas {
            matrix,
            k,
            trials,
            seed,
        } => {
            let phi = read_matrix(&matrix)?;
            let cert = rip_exhaustive(&phi, k)?;
            println!("delta_{k} = {}", cert.delta_upper);
            match verify_rip_lemmas(&phi, &cert, trials, seed) {
                Ok(report) => {
                    for c in &report.checks {
                        let verdict = if c.holds() { "PASS" } else { "FAIL" };
                        let side = if c.upper { "<=" } else { ">=" };
                        println!(
                            "{verdict} {}: worst {} {side} {}",
                            c.name, c.observed, c.bound
                        );
                    }
                    return Ok(report.holds());
                }
                Err(Error::LemmaViolation {
                    inequality,
                    observed,
                    bound,
                    witness,
                }) => {
                    println!("FAIL {inequality}: observed {observed} against {bound}, witness {witness:?}");
                    return Ok(false);
                }
                Err(e) => return Err(e),
            }
        }
        Command::Phase { config, out_dir } => {
            let spec = PhaseTransitionSpec::from_toml(&read_text(&config)?)?;
            let table = run_phase_transition(&spec)?;
            fs::create_dir_all(&out_dir)?;
            fs::write(out_dir.join("summary.csv"), table.summary_csv())?;
            if let Some(trials) = table.trials_csv() {
                fs::write(out_dir.join("trials.csv"), trials)?;
            }
            print!("{}", table.summary_csv());
        }
        Command::Compressible { config, out } => {
            let spec = CompressibleSpec::from_toml(&read_text(&config)?)?;
            let csv = SnrResult::table_csv(&run_compressible_study(&spec)?);
            fs::write(&out, &csv)?;
            print!("{csv}");
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
