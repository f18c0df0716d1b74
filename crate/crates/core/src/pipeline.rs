//! Batch entry points shared by every frontend: refine a set of seed graphs
//! against per-class corpus statistics, or score a graph set.

use std::collections::BTreeMap;
use std::time::Duration;

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::Dataset;
use crate::error::{Error, Result};
use crate::evolution::{run_with_observer, EvolutionConfig, GenerationStats};
use crate::fitness::{build_corpus_stats, CorpusStats, Evaluator, FitnessValue, FitnessWeights};
use crate::genotype::Genome;
use crate::graph::{ClassLabel, Graph};
use crate::rng;

/// Corpus statistics for every class of a reference dataset.
#[derive(Debug, Clone)]
pub struct CorpusSet {
    stats: BTreeMap<ClassLabel, CorpusStats>,
}

impl CorpusSet {
    /// Builds statistics for each class, or only `only` when given.
    pub fn from_dataset(ds: &Dataset, bins: usize, only: Option<ClassLabel>) -> Result<Self> {
        let mut stats = BTreeMap::new();
        for class in ds.classes().filter(|c| only.map_or(true, |o| o == *c)) {
            stats.insert(class, build_corpus_stats(&ds.class_graphs(class), Some(class), bins)?);
        }
        if let Some(c) = only {
            if !stats.contains_key(&c) {
                return Err(Error::EmptyClass(Some(c)));
            }
        }
        Ok(CorpusSet { stats })
    }

    pub fn from_stats(stats: impl IntoIterator<Item = (ClassLabel, CorpusStats)>) -> Self {
        CorpusSet {
            stats: stats.into_iter().collect(),
        }
    }

    pub fn get(&self, class: ClassLabel) -> Result<&CorpusStats> {
        self.stats.get(&class).ok_or(Error::EmptyClass(Some(class)))
    }

    pub fn classes(&self) -> impl Iterator<Item = ClassLabel> + '_ {
        self.stats.keys().copied()
    }
}

fn resolve_class(g: &Graph, fallback: Option<ClassLabel>, index: usize) -> Result<ClassLabel> {
    g.class_label().or(fallback).ok_or_else(|| {
        Error::Config(format!(
            "graph {index} has no class label and no default class was given"
        ))
    })
}

#[derive(Debug, Clone)]
pub struct RefineOutcome {
    pub index: usize,
    pub class: ClassLabel,
    pub seed: Graph,
    pub refined: Graph,
    pub genome: Genome,
    pub seed_fitness: FitnessValue,
    pub refined_fitness: FitnessValue,
    pub history: Vec<GenerationStats>,
    /// Master seed of this seed graph's run.
    pub run_seed: u64,
    /// False for graphs too small to edit; they pass through unchanged.
    pub refined_by_ga: bool,
    pub wall_time: Duration,
}

/// Refines every seed independently; run `i` uses master seed
/// `rng::run_seed(cfg.master_seed, i)`. Seeds run concurrently on the
/// ambient rayon pool and the result order follows the input.
pub fn refine_batch<F>(
    seeds: &[Graph],
    corpora: &CorpusSet,
    weights: &FitnessWeights,
    cfg: &EvolutionConfig,
    default_class: Option<ClassLabel>,
    observer: F,
) -> Result<Vec<RefineOutcome>>
where
    F: Fn(usize, &GenerationStats) + Sync,
{
    cfg.validate()?;
    weights.validate()?;
    let classes = seeds
        .iter()
        .enumerate()
        .map(|(i, g)| resolve_class(g, default_class, i).and_then(|c| corpora.get(c).map(|_| c)))
        .collect::<Result<Vec<_>>>()?;

    seeds
        .par_iter()
        .enumerate()
        .map(|(index, seed)| {
            let class = classes[index];
            let stats = corpora.get(class)?;
            let run_seed = rng::run_seed(cfg.master_seed, index);
            let mut seed = seed.clone();
            seed.set_class_label(Some(class));
            if seed.node_count() < 2 {
                let fitness = Evaluator::new(stats, *weights)?.evaluate(&seed)?;
                return Ok(RefineOutcome {
                    index,
                    class,
                    refined: seed.clone(),
                    genome: Genome::identity(seed.node_count()),
                    seed,
                    seed_fitness: fitness,
                    refined_fitness: fitness,
                    history: Vec::new(),
                    run_seed,
                    refined_by_ga: false,
                    wall_time: Duration::ZERO,
                });
            }
            let run_cfg = EvolutionConfig {
                master_seed: run_seed,
                ..cfg.clone()
            };
            let result = run_with_observer(&seed, stats, weights, &run_cfg, |s| observer(index, s))?;
            let mut refined = result.best_graph;
            refined.set_class_label(Some(class));
            Ok(RefineOutcome {
                index,
                class,
                seed,
                refined,
                genome: result.best_genome,
                seed_fitness: result.seed_fitness,
                refined_fitness: result.best_fitness,
                history: result.history,
                run_seed,
                refined_by_ga: true,
                wall_time: result.wall_time,
            })
        })
        .collect()
}

/// Per-graph fitness breakdown against the graph's class corpus.
pub fn evaluate_batch(
    graphs: &[Graph],
    corpora: &CorpusSet,
    weights: &FitnessWeights,
    default_class: Option<ClassLabel>,
) -> Result<Vec<(ClassLabel, FitnessValue)>> {
    weights.validate()?;
    let evaluators = corpora
        .stats
        .iter()
        .map(|(&c, s)| Evaluator::new(s, *weights).map(|e| (c, e)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    graphs
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let class = resolve_class(g, default_class, i)?;
            let eval = evaluators.get(&class).ok_or(Error::EmptyClass(Some(class)))?;
            Ok((class, eval.evaluate(g)?))
        })
        .collect()
}

/// Mean fitness components over a group of graphs.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct MeanFitness {
    pub avg_edges: f64,
    pub mmd_d: f64,
    pub mmd_c: f64,
    pub mmd_s: f64,
    pub edge_penalty: f64,
    pub total: f64,
}

impl MeanFitness {
    pub fn of<'a>(items: impl IntoIterator<Item = (&'a Graph, &'a FitnessValue)>) -> Self {
        let mut m = MeanFitness::default();
        let mut n = 0usize;
        for (g, f) in items {
            m.avg_edges += g.edge_count() as f64;
            m.mmd_d += f.mmd_d;
            m.mmd_c += f.mmd_c;
            m.mmd_s += f.mmd_s;
            m.edge_penalty += f.edge_penalty;
            m.total += f.total;
            n += 1;
        }
        if n > 0 {
            let k = n as f64;
            m.avg_edges /= k;
            m.mmd_d /= k;
            m.mmd_c /= k;
            m.mmd_s /= k;
            m.edge_penalty /= k;
            m.total /= k;
        }
        m
    }
}

/// One class row of a before/after refinement comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub class: ClassLabel,
    pub graphs: usize,
    pub real_nodes: f64,
    pub seed_nodes: f64,
    pub real_edges: f64,
    pub seed: MeanFitness,
    pub refined: MeanFitness,
}

pub fn compare(outcomes: &[RefineOutcome], corpora: &CorpusSet) -> Result<Vec<ComparisonRow>> {
    let mut by_class: BTreeMap<ClassLabel, Vec<&RefineOutcome>> = BTreeMap::new();
    for o in outcomes {
        by_class.entry(o.class).or_default().push(o);
    }
    by_class
        .into_iter()
        .map(|(class, group)| {
            let stats = corpora.get(class)?;
            Ok(ComparisonRow {
                class,
                graphs: group.len(),
                real_nodes: stats.mean_nodes(),
                seed_nodes: group.iter().map(|o| o.seed.node_count() as f64).sum::<f64>() / group.len() as f64,
                real_edges: stats.e_target(),
                seed: MeanFitness::of(group.iter().map(|o| (&o.seed, &o.seed_fitness))),
                refined: MeanFitness::of(group.iter().map(|o| (&o.refined, &o.refined_fitness))),
            })
        })
        .collect()
}

/// Per-class means of an evaluated graph set.
pub fn summarize_evaluation(
    graphs: &[Graph],
    scores: &[(ClassLabel, FitnessValue)],
) -> BTreeMap<ClassLabel, (usize, f64, MeanFitness)> {
    let mut by_class: BTreeMap<ClassLabel, Vec<usize>> = BTreeMap::new();
    for (i, (c, _)) in scores.iter().enumerate() {
        by_class.entry(*c).or_default().push(i);
    }
    by_class
        .into_iter()
        .map(|(c, idx)| {
            let nodes = idx.iter().map(|&i| graphs[i].node_count() as f64).sum::<f64>() / idx.len() as f64;
            let mean = MeanFitness::of(idx.iter().map(|&i| (&graphs[i], &scores[i].1)));
            (c, (idx.len(), nodes, mean))
        })
        .collect()
}
