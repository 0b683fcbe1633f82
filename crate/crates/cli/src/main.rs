mod bench;
mod error;
mod factorize;
mod fit;
mod generate;
mod io;
mod manifest;
mod pack;
mod simulate;

use clap::{Parser, Subcommand};
use error::{CliError, CliResult};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "dyapack", version, about = "Dyadic factorization, inversion and packing")]
struct Cli {
    /// Cap on worker threads. Outputs do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Factor an SPD symmetric dyadic matrix as PᵀΣP = I.
    Factorize(factorize::FactorizeArgs),
    /// Write Σ⁻¹ = PPᵀ.
    Invert(factorize::InvertArgs),
    /// Solve Σx = y.
    Solve(factorize::SolveArgs),
    /// Find a permutation that packs a symmetric 0-1 pattern near the diagonal.
    Pack(pack::PackArgs),
    /// Emit a seeded random matrix.
    Generate(generate::GenerateArgs),
    /// Run a repeated packing study over a parameter grid.
    Simulate(simulate::SimulateArgs),
    /// Count flops of the factorization over a range of sizes.
    Bench(bench::BenchArgs),
    /// Re-run the command recorded in a manifest.
    Replay {
        manifest: PathBuf,
    },
}

fn run(cli: Cli, argv: Vec<String>) -> CliResult<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::usage("--threads must be positive"));
        }
        // Fails only if a pool already exists, which replay may cause.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let ctx = Context { argv, threads: cli.threads };
    match cli.command {
        Command::Factorize(a) => factorize::factorize(&ctx, a),
        Command::Invert(a) => factorize::invert(&ctx, a),
        Command::Solve(a) => factorize::solve(&ctx, a),
        Command::Pack(a) => pack::run(&ctx, a),
        Command::Generate(a) => generate::run(&ctx, a),
        Command::Simulate(a) => simulate::run(&ctx, a),
        Command::Bench(a) => bench::run(&ctx, a),
        Command::Replay { manifest } => {
            let m = manifest::read_manifest(&manifest)?;
            if m.argv.first().is_some_and(|c| c == "replay") {
                return Err(CliError::usage("a manifest cannot replay another replay"));
            }
            let mut args = vec![manifest::TOOL.to_string()];
            args.extend(m.argv.iter().cloned());
            let cli = Cli::try_parse_from(&args).map_err(|e| CliError::usage(e.to_string()))?;
            run(cli, m.argv)
        }
    }
}

pub struct Context {
    /// Arguments after the program name.
    pub argv: Vec<String>,
    pub threads: Option<usize>,
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    match run(cli, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            e.report();
            ExitCode::from(e.class.exit_code() as u8)
        }
    }
}
