use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use evodyn::io::{
    cmd_clique, cmd_compare, cmd_equilibrium, cmd_gradcheck, cmd_simulate, ExitStatus, RunContext,
};
use evodyn::par::Execution;
use evodyn::solver::clique::DEFAULT_LAMBDA;

/// Evolutionary game dynamics via growth transforms.
#[derive(Parser)]
#[command(name = "evodyn", version)]
struct Cli {
    /// Directory for output files (created if missing).
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    /// Seed for random initial states, analysis points and clique restarts.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Run multi-point work on one thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the configured dynamics and write the trajectory.
    Simulate { config: PathBuf },
    /// Compare the named field against the growth-transform engine.
    Compare { config: PathBuf },
    /// Find and classify a rest point.
    Equilibrium { config: PathBuf },
    /// Check cost-function gradients against the engine fitness.
    Gradcheck { config: PathBuf },
    /// Estimate the clique number of a graph.
    Clique {
        graph: PathBuf,
        #[arg(long, default_value_t = 50)]
        restarts: usize,
        #[arg(long, default_value_t = DEFAULT_LAMBDA)]
        lambda: f64,
    },
}

fn main() -> ExitCode {
    // clap exits usage errors with 2, which means "not converged" here
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { ExitStatus::Error.code() } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let ctx = RunContext {
        out_dir: cli.out_dir,
        seed: cli.seed,
        exec: if cli.sequential { Execution::Sequential } else { Execution::default() },
        echo: true,
    };
    let result = match &cli.command {
        Command::Simulate { config } => cmd_simulate(config, &ctx),
        Command::Compare { config } => cmd_compare(config, &ctx),
        Command::Equilibrium { config } => cmd_equilibrium(config, &ctx),
        Command::Gradcheck { config } => cmd_gradcheck(config, &ctx),
        Command::Clique { graph, restarts, lambda } => cmd_clique(graph, *restarts, *lambda, &ctx),
    };
    let status = result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitStatus::Error
    });
    ExitCode::from(status.code() as u8)
}
