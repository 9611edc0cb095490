use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use riccati_geom::commands::{self, CliError, Options, TOL_ENV};
use riccati_geom::number::{parse_complex_list, parse_exact, parse_real_list};
use riccati_geom::{text, Problem, Report};
use riccati_geom_core::Spectrum;

#[derive(Parser)]
#[command(name = "riccati-geom", version, about = "Verify and analyze constrained generalized Riccati equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that the cost weight is positive semidefinite
    Check(Common),
    /// Verify candidate solutions and the subspaces attached to them
    Verify(Common),
    /// Invariant zeros of the Hamiltonian pencil with a rank table
    Zeros(Common),
    /// Cost-preserving stabilizing feedback
    Stabilize(Common),
    /// Closed-loop trajectories and costs
    Simulate(Simulate),
    /// Compute a solution with the reduced solver
    Solve(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct Common {
    /// Problem file (JSON)
    problem: PathBuf,
    /// Rank and residual tolerance [default: $RICCATI_GEOM_TOL or 1e-8]
    #[arg(long)]
    tol: Option<f64>,
    /// Seed for sampled points and input mixing
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Candidate label
    #[arg(long)]
    candidate: Option<String>,
    /// Eigenvalue targets, e.g. "-2,-3" or "-1+2i,-1-2i"
    #[arg(long, allow_hyphen_values = true)]
    targets: Option<String>,
}

#[derive(Args)]
struct Simulate {
    #[command(flatten)]
    common: Common,
    /// Simulation horizon in seconds
    #[arg(long)]
    horizon: Option<f64>,
    /// Number of sample times, including 0 and the horizon
    #[arg(long)]
    steps: Option<usize>,
    /// Initial state, e.g. "1,5"
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    /// Add the stabilizing term L to the optimal feedback
    #[arg(long)]
    with_l: bool,
}

fn options(c: &Common) -> Result<Options, CliError> {
    let env_tol = match std::env::var(TOL_ENV) {
        Ok(v) => Some(parse_exact(&v).map_err(|e| CliError::Argument(format!("{TOL_ENV}: {e}")))?),
        Err(_) => None,
    };
    let targets = c
        .targets
        .as_deref()
        .map(|t| parse_complex_list(t).map(Spectrum::new))
        .transpose()
        .map_err(|e| CliError::Argument(format!("--targets: {e}")))?;
    for t in [c.tol, env_tol].into_iter().flatten() {
        if !(t.is_finite() && t > 0.0) {
            return Err(CliError::Argument(format!("tolerance must be positive, got {t}")));
        }
    }
    Ok(Options {
        tol: c.tol,
        env_tol,
        seed: c.seed,
        candidate: c.candidate.clone(),
        targets,
        ..Options::default()
    })
}

fn run(cmd: &Command) -> Result<(Report, Format), CliError> {
    let (common, run): (&Common, fn(&Problem, &Options) -> Result<Report, CliError>) = match cmd {
        Command::Check(c) => (c, commands::cmd_check),
        Command::Verify(c) => (c, commands::cmd_verify),
        Command::Zeros(c) => (c, commands::cmd_zeros),
        Command::Stabilize(c) => (c, commands::cmd_stabilize),
        Command::Solve(c) => (c, commands::cmd_solve),
        Command::Simulate(s) => (&s.common, commands::cmd_simulate),
    };
    let mut opts = options(common)?;
    if let Command::Simulate(s) = cmd {
        opts.horizon = s.horizon;
        opts.steps = s.steps;
        opts.with_l = s.with_l;
        opts.x0 = s
            .x0
            .as_deref()
            .map(parse_real_list)
            .transpose()
            .map_err(|e| CliError::Argument(format!("--x0: {e}")))?;
    }
    let problem = Problem::load(&common.problem)?;
    Ok((run(&problem, &opts)?, common.format))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok((report, format)) => {
            match format {
                Format::Json => print!("{}", report.to_json()),
                Format::Text => print!("{}", text::render(&report)),
            }
            ExitCode::from(if report.passed { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
