//! `grefine`: refine seed graphs toward a reference corpus, score graph sets,
//! and summarise datasets.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use config::{CommonArgs, EvolutionArgs, RunConfig, WeightArgs};

#[derive(Debug, Parser)]
#[command(name = "grefine", version, about = "Evolutionary edge-edit refinement of graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolve edit genomes for each seed graph and write the refined graphs.
    Refine {
        #[command(flatten)]
        common: CommonArgs,
        /// JSON file of seed graphs.
        #[arg(long)]
        seeds: Option<PathBuf>,
        #[command(flatten)]
        weights: WeightArgs,
        #[command(flatten)]
        evolution: EvolutionArgs,
        /// Write each best genome as text, one gene per line.
        #[arg(long)]
        dump_genomes: bool,
        /// Suppress per-generation progress lines.
        #[arg(long, short)]
        quiet: bool,
    },
    /// Score a graph set against the corpus.
    Evaluate {
        #[command(flatten)]
        common: CommonArgs,
        /// JSON file of graphs to score.
        #[arg(long)]
        graphs: Option<PathBuf>,
        #[command(flatten)]
        weights: WeightArgs,
    },
    /// Dataset summary: graph count, classes, mean nodes and edges.
    Stats {
        #[command(flatten)]
        common: CommonArgs,
    },
}

type Handler = fn(&RunConfig) -> Result<()>;

fn resolve(cli: Cli) -> Result<(RunConfig, Handler)> {
    Ok(match cli.command {
        Command::Refine {
            common,
            seeds,
            weights,
            evolution,
            dump_genomes,
            quiet,
        } => {
            let mut cfg = common.base_config()?;
            if seeds.is_some() {
                cfg.seeds = seeds;
            }
            weights.apply(&mut cfg.fitness);
            evolution.apply(&mut cfg.evolution);
            cfg.dump_genomes |= dump_genomes;
            cfg.quiet |= quiet;
            (cfg, commands::refine)
        }
        Command::Evaluate {
            common,
            graphs,
            weights,
        } => {
            let mut cfg = common.base_config()?;
            if graphs.is_some() {
                cfg.graphs = graphs;
            }
            weights.apply(&mut cfg.fitness);
            (cfg, commands::evaluate)
        }
        Command::Stats { common } => (common.base_config()?, commands::stats),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match resolve(cli).and_then(|(cfg, cmd)| cmd(&cfg)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
