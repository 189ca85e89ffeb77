//! Command-line interface: assemble operators, compute persistence
//! diagrams, run structure-preserving embeddings and train expressions on
//! complexes, with a manifest next to every output for bit-exact reruns.
//!
//! Exit codes: 0 success, 2 parse or input error, 3 degree out of range,
//! 4 divergence, 5 expression error.

use clap::{Parser, Subcommand};

mod commands;
mod expr;
mod manifest;

use commands::{DecArgs, EmbedArgs, PhArgs, RerunArgs, TrainArgs};

#[derive(Parser)]
#[command(
    name = "cochain",
    version,
    about = "Operators, persistence and trainable layers on simplicial complexes",
    after_help = expr::GRAMMAR_HELP
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a discrete operator in coordinate text format
    Dec(DecArgs),
    /// Embed a point cloud by a structure-preserving loss
    Embed(EmbedArgs),
    /// Compute a Vietoris-Rips persistence diagram
    Ph(PhArgs),
    /// Train the TN layers of an expression
    #[command(after_help = expr::GRAMMAR_HELP)]
    Train(TrainArgs),
    /// Re-run a recorded manifest bit for bit
    Rerun(RerunArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Dec(args) => commands::cmd_dec(args),
        Command::Embed(args) => commands::cmd_embed(args),
        Command::Ph(args) => commands::cmd_ph(args),
        Command::Train(args) => commands::cmd_train(args),
        Command::Rerun(args) => commands::cmd_rerun(args),
    };
    if let Err(err) = result {
        eprintln!("error: {}", err.message);
        std::process::exit(err.code);
    }
}
