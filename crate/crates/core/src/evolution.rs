//! Generational GA over edge-edit genomes.
//!
//! Individual 0 of the initial population is the identity genome, so the
//! search never ends worse than the seed graph. Each generation keeps the
//! `elitism` best individuals verbatim and fills the rest with offspring of
//! tournament-selected parents (two-point crossover, then 1–4 gene mutation).
//!
//! All randomness comes from [`crate::rng`] streams keyed by
//! `(master_seed, generation, slot)`; evaluation runs on the ambient rayon
//! pool and results are independent of its size.

use std::cmp::Ordering;
use std::time::{Duration, Instant};

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitness::{CorpusStats, Evaluator, FitnessValue, FitnessWeights};
use crate::genotype::{express_unchecked, GeneSampler, Genome, OpProbabilities, SwapRule};
use crate::graph::Graph;
use crate::rng::{self, Purpose};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolutionConfig {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub tournament_size: usize,
    pub elitism: usize,
    pub op_probs: OpProbabilities,
    pub master_seed: u64,
    pub swap_strict: bool,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            population_size: 500,
            generations: 300,
            crossover_rate: 0.5,
            mutation_rate: 0.8,
            tournament_size: 5,
            elitism: 2,
            op_probs: OpProbabilities::default(),
            master_seed: 0,
            swap_strict: false,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.population_size <= self.elitism {
            return fail(format!(
                "population size {} must exceed elitism {}",
                self.population_size, self.elitism
            ));
        }
        if self.tournament_size == 0 || self.tournament_size > self.population_size {
            return fail(format!(
                "tournament size {} must be in [1, {}]",
                self.tournament_size, self.population_size
            ));
        }
        for (name, rate) in [("crossover", self.crossover_rate), ("mutation", self.mutation_rate)] {
            if !(0.0..=1.0).contains(&rate) {
                return fail(format!("{name} rate {rate} outside [0, 1]"));
            }
        }
        self.op_probs.validate()
    }

    pub fn swap_rule(&self) -> SwapRule {
        if self.swap_strict {
            SwapRule::Strict
        } else {
            SwapRule::Replacement
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Identity,
    Random,
    Offspring,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genome: Genome,
    pub fitness: FitnessValue,
    pub provenance: Provenance,
}

/// Summary of one generation's population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    /// Fitness of the best individual in the population.
    pub best: FitnessValue,
    pub mean_total: f64,
}

impl GenerationStats {
    /// `gen=<t> best=<f> mean=<f> mmd_d=<f> mmd_c=<f> mmd_s=<f> pedge=<f>`
    pub fn progress_line(&self) -> String {
        format!(
            "gen={} best={} mean={} mmd_d={} mmd_c={} mmd_s={} pedge={}",
            self.generation,
            self.best.total,
            self.mean_total,
            self.best.mmd_d,
            self.best.mmd_c,
            self.best.mmd_s,
            self.best.edge_penalty
        )
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub best_genome: Genome,
    pub best_graph: Graph,
    pub best_fitness: FitnessValue,
    /// Fitness of the unmodified base graph.
    pub seed_fitness: FitnessValue,
    /// Entry `t` describes generation `t`; entry 0 is the initial population.
    pub history: Vec<GenerationStats>,
    pub wall_time: Duration,
    pub master_seed: u64,
}

fn by_fitness(a: (usize, &FitnessValue), b: (usize, &FitnessValue)) -> Ordering {
    a.1.total.total_cmp(&b.1.total).then(a.0.cmp(&b.0))
}

/// Genomes of the initial population: the identity genome followed by
/// `population_size - 1` random genomes.
pub fn initialize_population(base: &Graph, cfg: &EvolutionConfig) -> Vec<(Genome, Provenance)> {
    let n = base.node_count();
    let sampler = GeneSampler::new(&cfg.op_probs, n);
    (0..cfg.population_size)
        .map(|slot| {
            if slot == 0 {
                (Genome::identity(n), Provenance::Identity)
            } else {
                let mut rng = rng::stream(cfg.master_seed, Purpose::Initialize, 0, slot as u64);
                (Genome::random(n, &sampler, &mut rng), Provenance::Random)
            }
        })
        .collect()
}

/// Index of the fittest of `k` individuals drawn uniformly with replacement.
/// Ties go to the lowest population index.
pub fn tournament_select<R: Rng + ?Sized>(population: &[Individual], k: usize, rng: &mut R) -> usize {
    assert!(!population.is_empty() && k >= 1);
    (0..k)
        .map(|_| rng.gen_range(0..population.len()))
        .min_by(|&a, &b| by_fitness((a, &population[a].fitness), (b, &population[b].fitness)))
        .expect("k >= 1")
}

/// Swaps the segment `[start, end)` between two parents.
pub fn crossover_at(a: &Genome, b: &Genome, start: usize, end: usize) -> Result<(Genome, Genome)> {
    if a.len() != b.len() {
        return Err(Error::ParentLength(a.len(), b.len()));
    }
    assert!(start <= end && end <= a.len(), "invalid cut points ({start}, {end})");
    let mut c1 = a.genes().to_vec();
    let mut c2 = b.genes().to_vec();
    c1[start..end].copy_from_slice(&b.genes()[start..end]);
    c2[start..end].copy_from_slice(&a.genes()[start..end]);
    Ok((Genome::new(c1), Genome::new(c2)))
}

/// Two-point crossover with both cut points drawn uniformly from `[0, len]`.
pub fn two_point_crossover<R: Rng + ?Sized>(a: &Genome, b: &Genome, rng: &mut R) -> Result<(Genome, Genome)> {
    if a.len() != b.len() {
        return Err(Error::ParentLength(a.len(), b.len()));
    }
    let x = rng.gen_range(0..=a.len());
    let y = rng.gen_range(0..=a.len());
    crossover_at(a, b, x.min(y), x.max(y))
}

/// Replaces `m ~ Uniform{1..4}` distinct positions with fresh random genes.
/// Returns the number of positions drawn.
pub fn mutate_in_place<R: Rng + ?Sized>(genome: &mut Genome, sampler: &GeneSampler, rng: &mut R) -> usize {
    let len = genome.len();
    if len == 0 {
        return 0;
    }
    let m = rng.gen_range(1..=4usize).min(len);
    let genes = genome.genes_mut();
    for pos in index::sample(rng, len, m) {
        genes[pos] = sampler.sample(rng);
    }
    m
}

pub fn mutate<R: Rng + ?Sized>(genome: &Genome, node_count: usize, op_probs: &OpProbabilities, rng: &mut R) -> Genome {
    let mut out = genome.clone();
    mutate_in_place(&mut out, &GeneSampler::new(op_probs, node_count), rng);
    out
}

struct Engine<'a> {
    base: &'a Graph,
    evaluator: Evaluator<'a>,
    sampler: GeneSampler,
    swap_rule: SwapRule,
    cfg: &'a EvolutionConfig,
}

impl Engine<'_> {
    fn phenotype(&self, genome: &Genome) -> Graph {
        express_unchecked(self.base, genome, self.swap_rule)
    }

    fn evaluate(&self, genome: &Genome) -> Result<FitnessValue> {
        self.evaluator.evaluate(&self.phenotype(genome))
    }

    fn evaluate_all(&self, candidates: Vec<Candidate>) -> Result<Vec<Individual>> {
        candidates
            .into_par_iter()
            .map(|c| {
                let fitness = match c.inherited {
                    Some(f) => f,
                    None => self.evaluate(&c.genome)?,
                };
                Ok(Individual {
                    genome: c.genome,
                    fitness,
                    provenance: c.provenance,
                })
            })
            .collect()
    }

    /// Two children from the pairing in breeding slot `pair`.
    fn breed(&self, population: &[Individual], generation: usize, pair: usize) -> [Candidate; 2] {
        let cfg = self.cfg;
        let mut rng = rng::stream(cfg.master_seed, Purpose::Breed, generation as u64, pair as u64);
        let pa = tournament_select(population, cfg.tournament_size, &mut rng);
        let pb = tournament_select(population, cfg.tournament_size, &mut rng);
        let (ga, gb) = (&population[pa].genome, &population[pb].genome);
        let (mut c1, mut c2) = if rng.gen_bool(cfg.crossover_rate) {
            two_point_crossover(ga, gb, &mut rng).expect("genomes share length")
        } else {
            (ga.clone(), gb.clone())
        };
        for child in [&mut c1, &mut c2] {
            if rng.gen_bool(cfg.mutation_rate) {
                mutate_in_place(child, &self.sampler, &mut rng);
            }
        }
        let inherit = |child: &Genome| {
            [pa, pb]
                .into_iter()
                .find(|&p| population[p].genome == *child)
                .map(|p| population[p].fitness)
        };
        [
            Candidate {
                inherited: inherit(&c1),
                genome: c1,
                provenance: Provenance::Offspring,
            },
            Candidate {
                inherited: inherit(&c2),
                genome: c2,
                provenance: Provenance::Offspring,
            },
        ]
    }
}

struct Candidate {
    genome: Genome,
    provenance: Provenance,
    inherited: Option<FitnessValue>,
}

fn summarize(generation: usize, population: &[Individual]) -> (usize, GenerationStats) {
    let best = population
        .iter()
        .enumerate()
        .min_by(|a, b| by_fitness((a.0, &a.1.fitness), (b.0, &b.1.fitness)))
        .map(|(i, _)| i)
        .expect("population is non-empty");
    let mean_total = population.iter().map(|i| i.fitness.total).sum::<f64>() / population.len() as f64;
    (
        best,
        GenerationStats {
            generation,
            best: population[best].fitness,
            mean_total,
        },
    )
}

pub fn run(base: &Graph, stats: &CorpusStats, weights: &FitnessWeights, cfg: &EvolutionConfig) -> Result<RunResult> {
    run_with_observer(base, stats, weights, cfg, |_| {})
}

/// Like [`run`], calling `observer` after each generation (including generation 0).
pub fn run_with_observer(
    base: &Graph,
    stats: &CorpusStats,
    weights: &FitnessWeights,
    cfg: &EvolutionConfig,
    mut observer: impl FnMut(&GenerationStats),
) -> Result<RunResult> {
    let started = Instant::now();
    cfg.validate()?;
    if base.node_count() < 2 {
        return Err(Error::Config(format!(
            "graph with {} nodes cannot be refined",
            base.node_count()
        )));
    }
    let engine = Engine {
        base,
        evaluator: Evaluator::new(stats, *weights)?,
        sampler: GeneSampler::new(&cfg.op_probs, base.node_count()),
        swap_rule: cfg.swap_rule(),
        cfg,
    };
    let seed_fitness = engine.evaluator.evaluate(base)?;

    let initial = initialize_population(base, cfg)
        .into_iter()
        .map(|(genome, provenance)| Candidate {
            inherited: (provenance == Provenance::Identity).then_some(seed_fitness),
            genome,
            provenance,
        })
        .collect();
    let mut population = engine.evaluate_all(initial)?;

    let mut history = Vec::with_capacity(cfg.generations + 1);
    let (best_idx, gen_stats) = summarize(0, &population);
    let mut best = population[best_idx].clone();
    observer(&gen_stats);
    history.push(gen_stats);

    let offspring = cfg.population_size - cfg.elitism;
    for generation in 1..=cfg.generations {
        let mut order: Vec<usize> = (0..population.len()).collect();
        order.sort_by(|&a, &b| by_fitness((a, &population[a].fitness), (b, &population[b].fitness)));

        let children: Vec<Candidate> = (0..offspring.div_ceil(2))
            .into_par_iter()
            .flat_map_iter(|pair| engine.breed(&population, generation, pair))
            .collect();
        let mut next: Vec<Individual> = order[..cfg.elitism].iter().map(|&i| population[i].clone()).collect();
        next.extend(engine.evaluate_all(children.into_iter().take(offspring).collect())?);
        population = next;

        let (best_idx, gen_stats) = summarize(generation, &population);
        if gen_stats.best.total < best.fitness.total {
            best = population[best_idx].clone();
        }
        if cfg!(debug_assertions) {
            let g = engine.phenotype(&population[best_idx].genome);
            let trace: f64 = crate::metrics::laplacian_spectrum(&g)?.eigenvalues.iter().sum();
            debug_assert!((trace - 2.0 * g.edge_count() as f64).abs() <= 1e-6);
        }
        observer(&gen_stats);
        history.push(gen_stats);
    }

    let best_graph = engine.phenotype(&best.genome);
    Ok(RunResult {
        best_genome: best.genome,
        best_graph,
        best_fitness: best.fitness,
        seed_fitness,
        history,
        wall_time: started.elapsed(),
        master_seed: cfg.master_seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitness::build_default_corpus_stats;
    use crate::genotype::{Gene, OpCode};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn letters(s: &str) -> Genome {
        Genome::new(
            s.chars()
                .map(|c| if c == 'A' { Gene::add(0, 1) } else { Gene::delete(0, 1) })
                .collect(),
        )
    }

    fn individuals(totals: &[f64]) -> Vec<Individual> {
        totals
            .iter()
            .map(|&t| Individual {
                genome: Genome::identity(2),
                fitness: FitnessValue {
                    total: t,
                    ..Default::default()
                },
                provenance: Provenance::Random,
            })
            .collect()
    }

    #[test]
    fn crossover_segment_swap() {
        let a = letters("AAAAAAAA");
        let b = letters("BBBBBBBB");
        let (c1, c2) = crossover_at(&a, &b, 2, 5).unwrap();
        assert_eq!(c1, letters("AABBBAAA"));
        assert_eq!(c2, letters("BBAAABBB"));
        assert_eq!(crossover_at(&a, &b, 0, 8).unwrap(), (b.clone(), a.clone()));
        assert_eq!(crossover_at(&a, &b, 3, 3).unwrap(), (a.clone(), b.clone()));
        assert!(matches!(
            two_point_crossover(&a, &letters("AAA"), &mut ChaCha8Rng::seed_from_u64(0)),
            Err(Error::ParentLength(8, 3))
        ));
    }

    #[test]
    fn random_crossover_preserves_length() {
        let a = letters("AAAAAAAAAAAA");
        let b = letters("BBBBBBBBBBBB");
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let (c1, c2) = two_point_crossover(&a, &b, &mut rng).unwrap();
            assert_eq!(c1.len(), 12);
            // positions of c1 are exactly complementary to c2
            for (x, y) in c1.genes().iter().zip(c2.genes()) {
                assert_ne!(x, y);
            }
        }
    }

    #[test]
    fn mutation_touches_one_to_four_positions() {
        let sampler = GeneSampler::new(&OpProbabilities::default(), 18);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let base = Genome::identity(18);
        let mut total = 0usize;
        let trials = 20_000;
        for _ in 0..trials {
            let mut g = base.clone();
            let m = mutate_in_place(&mut g, &sampler, &mut rng);
            assert!((1..=4).contains(&m));
            let changed = g.genes().iter().filter(|x| x.op != OpCode::Null).count();
            assert!(changed <= m);
            total += m;
        }
        let mean = total as f64 / trials as f64;
        assert!((mean - 2.5).abs() < 0.03, "mean positions {mean}");
    }

    #[test]
    fn tournament_limits() {
        let pop = individuals(&[3.0, 1.0, 2.0, 1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        // a huge tournament covers everything; tie between 1 and 3 goes to 1
        assert_eq!(tournament_select(&pop, 200, &mut rng), 1);
        let mut counts = [0usize; 4];
        for _ in 0..40_000 {
            counts[tournament_select(&pop, 1, &mut rng)] += 1;
        }
        for c in counts {
            assert!((c as f64 / 40_000.0 - 0.25).abs() < 0.01);
        }
    }

    #[test]
    fn config_validation() {
        assert!(EvolutionConfig::default().validate().is_ok());
        let bad = [
            EvolutionConfig {
                population_size: 2,
                elitism: 2,
                ..Default::default()
            },
            EvolutionConfig {
                tournament_size: 0,
                ..Default::default()
            },
            EvolutionConfig {
                mutation_rate: 1.5,
                ..Default::default()
            },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err());
        }
    }

    #[test]
    fn initial_population_shape() {
        let cfg = EvolutionConfig {
            population_size: 500,
            ..Default::default()
        };
        let pop = initialize_population(&Graph::ring(18), &cfg);
        assert_eq!(pop.len(), 500);
        assert!(pop.iter().all(|(g, _)| g.len() == 36));
        assert!(pop[0].0.is_identity());
        assert_eq!(pop[0].1, Provenance::Identity);
        assert!(pop[1..].iter().all(|(_, p)| *p == Provenance::Random));
    }

    #[test]
    fn optimal_seed_stays_optimal() {
        let base = Graph::ring(8);
        let stats = build_default_corpus_stats(std::slice::from_ref(&base), None).unwrap();
        let cfg = EvolutionConfig {
            population_size: 20,
            generations: 10,
            master_seed: 4,
            ..Default::default()
        };
        let res = run(&base, &stats, &FitnessWeights::default(), &cfg).unwrap();
        assert_eq!(res.seed_fitness.total, 0.0);
        assert_eq!(res.history.len(), 11);
        assert!(res.history.iter().all(|h| h.best.total == 0.0));
        assert_eq!(res.best_fitness.total, 0.0);
    }

    #[test]
    fn tiny_graph_is_rejected() {
        let stats = build_default_corpus_stats(&[Graph::ring(4)], None).unwrap();
        let err = run(
            &Graph::new(1),
            &stats,
            &FitnessWeights::default(),
            &EvolutionConfig::default(),
        );
        assert!(matches!(err, Err(Error::Config(_))));
    }
}
