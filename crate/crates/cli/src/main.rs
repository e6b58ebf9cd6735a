use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use l1path_cli::{cmd_gen, cmd_plot, cmd_solve, cmd_verify, CliError, GenArgs, SolveArgs, VerifyArgs};

#[derive(Parser)]
#[command(name = "l1path", version, about = "Solution paths of min ‖x‖₁ s.t. ‖Ax − b‖∞ ≤ δ")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the solution path down to the target delta.
    Solve {
        /// JSON instance, or a MatrixMarket matrix when --rhs is given.
        input: PathBuf,
        /// Right-hand side `b` (plain text or JSON array) for a MatrixMarket input.
        #[arg(long)]
        rhs: Option<PathBuf>,
        /// Target delta; overrides the value stored in a JSON instance.
        #[arg(long)]
        delta: Option<f64>,
        /// Verify every breakpoint as an optimal pair at this tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
        /// Disable warm starts of the subproblem solvers.
        #[arg(long)]
        cold: bool,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Plot coordinate paths from an exported JSON path as SVG.
    Plot { path_json: PathBuf, svg_out: PathBuf },
    /// Check path properties on seeded random instances or on one input file.
    Verify {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        count: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Perturb dual certificates before checking (negative control).
        #[arg(long, hide = true)]
        perturb_y: bool,
        /// Where failing instances are written for replay.
        #[arg(long, default_value = ".")]
        replay_dir: PathBuf,
    },
    /// Generate an instance with a known optimal solution.
    Gen {
        #[arg(short)]
        m: usize,
        #[arg(short)]
        n: usize,
        #[arg(long)]
        sparsity: usize,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Nonzero magnitudes span 10^[0, dynamic_range].
        #[arg(long, default_value_t = 1.0)]
        dynamic_range: f64,
        /// Use a dense dual certificate instead of a sparse one.
        #[arg(long)]
        dense: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn emit(output: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match output {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve {
            input,
            rhs,
            delta,
            tol,
            max_iters,
            format,
            cold,
            output,
        } => {
            let args = SolveArgs {
                input,
                rhs,
                delta,
                tol,
                max_iters,
                cold,
                trace: std::env::var("HOUDINI_TRACE").is_ok_and(|v| v == "1"),
            };
            let (export, failure) = cmd_solve(&args)?;
            let text = match format {
                FormatArg::Json => export.to_json()? + "\n",
                FormatArg::Csv => export.to_csv(),
            };
            emit(output.as_ref(), &text)?;
            match failure {
                Some(e) => Err(e),
                None => Ok(()),
            }
        }
        Command::Plot { path_json, svg_out } => cmd_plot(&path_json, &svg_out),
        Command::Verify {
            input,
            count,
            seed,
            tol,
            perturb_y,
            replay_dir,
        } => {
            let report = cmd_verify(&VerifyArgs {
                input,
                count,
                seed,
                tol,
                perturb_y,
                replay_dir,
            })?;
            print!("{}", report.table());
            for p in &report.replays {
                eprintln!("failing instance written to {}", p.display());
            }
            if report.all_passed() {
                Ok(())
            } else {
                Err(CliError::Verify(format!("{} failing instances", report.replays.len())))
            }
        }
        Command::Gen {
            m,
            n,
            sparsity,
            delta,
            seed,
            dynamic_range,
            dense,
            output,
        } => {
            let file = cmd_gen(&GenArgs {
                m,
                n,
                sparsity,
                delta,
                seed,
                dynamic_range,
                dense_certificate: dense,
            })?;
            emit(output.as_ref(), &(file.to_json()? + "\n"))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
