use actionlab_cli::config::Overrides;
use actionlab_cli::runner;
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

/// Scenario-driven laboratory for the two classical actions: boundary-value
/// solvers, min-plus minimization, a Hamilton-Jacobi grid solver, and
/// velocity-field transport, cross-validated and exported as plot-ready CSV.
#[derive(Parser)]
#[command(name = "actionlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Boundary-value action and a perturbed trajectory family
    El(RunArgs),
    /// Field action by min-plus minimization over initial positions
    HopfLax(RunArgs),
    /// Field action by finite-difference time stepping on a grid
    Pde(RunArgs),
    /// Velocity-field extraction and piloted trajectories
    Pilot(RunArgs),
    /// All routes side by side with pass/fail tolerances
    Compare(RunArgs),
    /// Plot-ready CSV data for the three standard figures
    Figures(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario config (JSON file) or a directory of configs (batch mode)
    #[arg(long)]
    config: PathBuf,
    /// Override the model mass
    #[arg(long, allow_negative_numbers = true)]
    mass: Option<f64>,
    /// Override the linear-potential force vector (comma-separated)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    k: Option<Vec<f64>>,
    /// Override the start position (comma-separated)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x0: Option<Vec<f64>>,
    /// Override the end/probe position (comma-separated)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x: Option<Vec<f64>>,
    /// Override the final/probe time
    #[arg(long, allow_negative_numbers = true)]
    t: Option<f64>,
    /// Override the initial velocity of the initial action / field source
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    v0: Option<Vec<f64>>,
    /// Write artifacts to this directory instead of the configured one
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the grid point count
    #[arg(long)]
    grid_n: Option<usize>,
    /// Override the shooting tolerance (compare mode)
    #[arg(long)]
    tol: Option<f64>,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            mass: self.mass,
            k: self.k.clone(),
            x0: self.x0.clone(),
            x: self.x.clone(),
            t: self.t,
            v0: self.v0.clone(),
            out: self.out.clone(),
            grid_n: self.grid_n,
            tol: self.tol,
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1, // argument problems are validation errors
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let (mode, args) = match &cli.command {
        Command::El(a) => ("el", a),
        Command::HopfLax(a) => ("hopf-lax", a),
        Command::Pde(a) => ("pde", a),
        Command::Pilot(a) => ("pilot", a),
        Command::Compare(a) => ("compare", a),
        Command::Figures(a) => ("figures", a),
    };
    std::process::exit(runner::execute(mode, &args.config, &args.overrides()));
}
