use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use toda_cli::{
    cmd_check_tnn, cmd_linearize, cmd_reconstruct, cmd_simulate, cmd_verify_theorem,
    parse_direction, parse_method, workers_from_env, Format, Mode, Outcome, SimulateArgs,
    EXIT_INPUT,
};
use toda_core::{Direction, Method, VerifyConfig};

/// Finite Toda lattice: simulation, linearization and total-nonnegativity checks.
#[derive(Parser)]
#[command(name = "toda", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the flow and write a trajectory (CSV or JSON).
    Simulate {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        t0: f64,
        #[arg(long, allow_negative_numbers = true)]
        t1: f64,
        /// Output sampling interval.
        #[arg(long, default_value_t = 0.1)]
        dt: f64,
        #[arg(long, default_value = "tau", value_parser = parse_method)]
        method: Method,
        #[arg(long, default_value_t = 1e-3)]
        rk4_dt: f64,
        /// Output file; the format follows the extension unless --format is given.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<Format>,
    },
    /// Test a matrix for total nonnegativity.
    CheckTnn {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value = "exhaustive")]
        mode: Mode,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Map a Lax matrix to its Jacobi point and report the sign component.
    Linearize {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Rebuild the Lax matrix from a spectrum and a Jacobi point.
    Reconstruct {
        #[arg(long)]
        spectrum: PathBuf,
        #[arg(long)]
        point: PathBuf,
    },
    /// Randomized check that TNN matrices correspond to the positive cone.
    VerifyTheorem {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "both", value_parser = parse_direction)]
        direction: Direction,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Samples per non-alternating sign component (0 skips the check).
        #[arg(long, default_value_t = 0)]
        noncone_samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Simulate {
            matrix,
            t0,
            t1,
            dt,
            method,
            rk4_dt,
            out,
            format,
        } => cmd_simulate(&SimulateArgs {
            matrix,
            t0,
            t1,
            dt,
            method,
            rk4_dt,
            out,
            format,
        }),
        Command::CheckTnn { matrix, mode, tol } => cmd_check_tnn(&matrix, mode, tol),
        Command::Linearize { matrix } => cmd_linearize(&matrix),
        Command::Reconstruct { spectrum, point } => cmd_reconstruct(&spectrum, &point),
        Command::VerifyTheorem {
            n,
            samples,
            seed,
            direction,
            tol,
            noncone_samples,
            out,
        } => {
            let workers = match workers_from_env() {
                Ok(w) => w,
                Err(e) => {
                    return Outcome {
                        code: EXIT_INPUT,
                        stdout: String::new(),
                        stderr: format!("error: {e}\n"),
                    }
                }
            };
            let mut cfg = VerifyConfig::new(n, samples, seed, direction);
            cfg.tolerance = tol;
            cfg.noncone_samples = noncone_samples;
            cmd_verify_theorem(&cfg, workers, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            e.print().ok();
            return ExitCode::from(code as u8);
        }
    };
    let outcome = run(cli);
    print!("{}", outcome.stdout);
    eprint!("{}", outcome.stderr);
    ExitCode::from(outcome.code as u8)
}
