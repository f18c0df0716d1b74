//! Evolutionary refinement of graph structure.
//!
//! Seed graphs are edited by fixed-length genomes of edge-edit commands
//! ([`genotype`]). A generational GA ([`evolution`]) searches for the genome
//! whose expressed graph best matches a reference corpus under a weighted
//! sum of degree, clustering and Laplacian-spectrum MMD terms plus an
//! edge-count penalty ([`fitness`], [`metrics`]).

pub mod corpus;
pub mod error;
pub mod evolution;
pub mod fitness;
pub mod genotype;
pub mod graph;
pub mod metrics;
pub mod pipeline;
pub mod rng;

pub use corpus::{load_dataset, load_graphs_json, load_tudataset, save_graphs_json, Dataset, DatasetFormat};
pub use error::{Error, Result};
pub use evolution::{run, run_with_observer, EvolutionConfig, GenerationStats, Individual, Provenance, RunResult};
pub use fitness::{build_corpus_stats, evaluate, CorpusStats, Evaluator, FitnessValue, FitnessWeights};
pub use genotype::{apply_gene, express, express_with, Gene, GeneSampler, Genome, OpCode, OpProbabilities, SwapRule};
pub use graph::{ClassLabel, Graph, GraphRecord};
pub use metrics::{Binning, FeatureHistogram, SpectralSignature, DEFAULT_BINS};
pub use pipeline::{evaluate_batch, refine_batch, CorpusSet, RefineOutcome};
