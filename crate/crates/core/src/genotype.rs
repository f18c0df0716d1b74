//! Command-string genotype.
//!
//! A [`Genome`] is a fixed-length list of edge-edit [`Gene`]s. Expressing a
//! genome applies every gene, left to right, to a copy of the base graph.
//! Genes whose preconditions do not hold are silent no-ops.

use std::fmt;
use std::str::FromStr;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpCode {
    Toggle,
    LocalToggle,
    Hop,
    Add,
    LocalAdd,
    Delete,
    LocalDelete,
    Swap,
    Null,
}

impl OpCode {
    pub const ALL: [OpCode; 9] = [
        OpCode::Toggle,
        OpCode::LocalToggle,
        OpCode::Hop,
        OpCode::Add,
        OpCode::LocalAdd,
        OpCode::Delete,
        OpCode::LocalDelete,
        OpCode::Swap,
        OpCode::Null,
    ];

    /// Number of node arguments the operation reads.
    pub const fn arity(self) -> usize {
        match self {
            OpCode::Toggle | OpCode::Add | OpCode::Delete => 2,
            OpCode::LocalToggle | OpCode::LocalAdd | OpCode::LocalDelete | OpCode::Hop => 3,
            OpCode::Swap => 4,
            OpCode::Null => 0,
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            OpCode::Toggle => "TOGGLE",
            OpCode::LocalToggle => "LOCALTOGGLE",
            OpCode::Hop => "HOP",
            OpCode::Add => "ADD",
            OpCode::LocalAdd => "LOCALADD",
            OpCode::Delete => "DELETE",
            OpCode::LocalDelete => "LOCALDELETE",
            OpCode::Swap => "SWAP",
            OpCode::Null => "NULL",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl FromStr for OpCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OpCode::ALL
            .into_iter()
            .find(|op| op.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::ParseGene(s.to_string()))
    }
}

/// How `Swap` decides whether it may fire.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwapRule {
    /// `{u,v}` and `{w,x}` present, `{u,x}` and `{v,w}` absent. Other pairs
    /// among the four nodes are unconstrained.
    #[default]
    Replacement,
    /// `{u,v}` and `{w,x}` are the only edges among the four nodes.
    Strict,
}

/// One edit command. Unused argument slots are zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Gene {
    pub op: OpCode,
    pub args: [u32; 4],
}

impl Gene {
    pub const NULL: Gene = Gene {
        op: OpCode::Null,
        args: [0; 4],
    };

    /// Builds a gene from exactly `op.arity()` arguments.
    pub fn new(op: OpCode, args: &[usize]) -> Result<Self> {
        if args.len() != op.arity() {
            return Err(Error::ParseGene(format!(
                "{} takes {} arguments, got {}",
                op.name(),
                op.arity(),
                args.len()
            )));
        }
        let mut slots = [0u32; 4];
        for (slot, &a) in slots.iter_mut().zip(args) {
            *slot = u32::try_from(a).map_err(|_| Error::ParseGene(format!("argument {a} too large")))?;
        }
        Ok(Gene { op, args: slots })
    }

    pub fn toggle(u: usize, v: usize) -> Self {
        Self::make(OpCode::Toggle, [u, v, 0, 0])
    }
    pub fn local_toggle(u: usize, w: usize, v: usize) -> Self {
        Self::make(OpCode::LocalToggle, [u, w, v, 0])
    }
    pub fn hop(u: usize, v: usize, w: usize) -> Self {
        Self::make(OpCode::Hop, [u, v, w, 0])
    }
    pub fn add(u: usize, v: usize) -> Self {
        Self::make(OpCode::Add, [u, v, 0, 0])
    }
    pub fn local_add(u: usize, w: usize, v: usize) -> Self {
        Self::make(OpCode::LocalAdd, [u, w, v, 0])
    }
    pub fn delete(u: usize, v: usize) -> Self {
        Self::make(OpCode::Delete, [u, v, 0, 0])
    }
    pub fn local_delete(u: usize, w: usize, v: usize) -> Self {
        Self::make(OpCode::LocalDelete, [u, w, v, 0])
    }
    pub fn swap(u: usize, v: usize, w: usize, x: usize) -> Self {
        Self::make(OpCode::Swap, [u, v, w, x])
    }

    fn make(op: OpCode, args: [usize; 4]) -> Self {
        Gene {
            op,
            args: args.map(|a| a as u32),
        }
    }

    /// The arguments the opcode actually reads.
    pub fn used_args(&self) -> &[u32] {
        &self.args[..self.op.arity()]
    }

    #[inline]
    fn arg(&self, i: usize) -> usize {
        self.args[i] as usize
    }
}

impl fmt::Display for Gene {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.op.name())?;
        for a in self.used_args() {
            write!(f, " {a}")?;
        }
        Ok(())
    }
}

impl FromStr for Gene {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split_whitespace();
        let op: OpCode = parts.next().ok_or_else(|| Error::ParseGene(s.to_string()))?.parse()?;
        let args = parts
            .map(|p| p.parse::<usize>().map_err(|_| Error::ParseGene(s.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Gene::new(op, &args)
    }
}

/// Applies one gene in place. Unsatisfied preconditions leave the graph unchanged.
///
/// Gene arguments must already be valid node indices of `g`.
pub fn apply_gene(g: &mut Graph, gene: &Gene, swap_rule: SwapRule) {
    match gene.op {
        OpCode::Null => {}
        OpCode::Toggle => g.toggle(gene.arg(0), gene.arg(1)),
        OpCode::Add => {
            g.insert(gene.arg(0), gene.arg(1));
        }
        OpCode::Delete => {
            g.erase(gene.arg(0), gene.arg(1));
        }
        OpCode::LocalToggle | OpCode::LocalAdd | OpCode::LocalDelete => {
            let (u, w, v) = (gene.arg(0), gene.arg(1), gene.arg(2));
            if !(g.contains(u, w) && g.contains(w, v)) {
                return;
            }
            match gene.op {
                OpCode::LocalToggle => g.toggle(u, v),
                OpCode::LocalAdd => {
                    g.insert(u, v);
                }
                _ => {
                    g.erase(u, v);
                }
            }
        }
        OpCode::Hop => {
            let (u, v, w) = (gene.arg(0), gene.arg(1), gene.arg(2));
            if u != w && g.contains(u, v) && g.contains(v, w) && !g.contains(u, w) {
                g.erase(u, v);
                g.insert(u, w);
            }
        }
        OpCode::Swap => {
            let (u, v, w, x) = (gene.arg(0), gene.arg(1), gene.arg(2), gene.arg(3));
            if u == x || v == w || !g.contains(u, v) || !g.contains(w, x) {
                return;
            }
            if g.contains(u, x) || g.contains(v, w) {
                return;
            }
            if swap_rule == SwapRule::Strict && (g.contains(u, w) || g.contains(v, x)) {
                return;
            }
            g.erase(u, v);
            g.erase(w, x);
            g.insert(u, x);
            g.insert(v, w);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Genome(Vec<Gene>);

impl Genome {
    pub fn new(genes: Vec<Gene>) -> Self {
        Genome(genes)
    }

    /// Required genome length for a base graph: twice its node count.
    pub const fn length_for(node_count: usize) -> usize {
        2 * node_count
    }

    /// The all-`Null` genome, whose phenotype is the base graph itself.
    pub fn identity(node_count: usize) -> Self {
        Genome(vec![Gene::NULL; Self::length_for(node_count)])
    }

    pub fn random<R: Rng + ?Sized>(node_count: usize, sampler: &GeneSampler, rng: &mut R) -> Self {
        Genome((0..Self::length_for(node_count)).map(|_| sampler.sample(rng)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn genes(&self) -> &[Gene] {
        &self.0
    }

    pub fn genes_mut(&mut self) -> &mut [Gene] {
        &mut self.0
    }

    pub fn into_genes(self) -> Vec<Gene> {
        self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|g| g.op == OpCode::Null)
    }

    /// One gene per line, `OPCODE u v [w [x]]`.
    pub fn dump(&self) -> String {
        let mut out = String::with_capacity(self.0.len() * 12);
        for gene in &self.0 {
            out.push_str(&gene.to_string());
            out.push('\n');
        }
        out
    }

    pub fn parse_dump(text: &str) -> Result<Self> {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>>>()
            .map(Genome)
    }

    /// Checks length and argument ranges against a base graph.
    pub fn validate_for(&self, base: &Graph) -> Result<()> {
        let n = base.node_count();
        let expected = Self::length_for(n);
        if self.0.len() != expected {
            return Err(Error::GenomeLength {
                expected,
                actual: self.0.len(),
            });
        }
        for (position, gene) in self.0.iter().enumerate() {
            if let Some(&arg) = gene.used_args().iter().find(|&&a| a as usize >= n) {
                return Err(Error::GeneArgument {
                    position,
                    arg: arg as usize,
                    node_count: n,
                });
            }
        }
        Ok(())
    }
}

impl From<Vec<Gene>> for Genome {
    fn from(genes: Vec<Gene>) -> Self {
        Genome(genes)
    }
}

/// Expresses `genome` on a copy of `base` with the default swap rule.
pub fn express(base: &Graph, genome: &Genome) -> Result<Graph> {
    express_with(base, genome, SwapRule::default())
}

pub fn express_with(base: &Graph, genome: &Genome, swap_rule: SwapRule) -> Result<Graph> {
    genome.validate_for(base)?;
    Ok(express_unchecked(base, genome, swap_rule))
}

/// Expression without validation, for genomes produced by the GA itself.
pub(crate) fn express_unchecked(base: &Graph, genome: &Genome, swap_rule: SwapRule) -> Graph {
    let mut g = base.clone();
    for gene in genome.genes() {
        apply_gene(&mut g, gene, swap_rule);
    }
    g
}

/// Probability of drawing each opcode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpProbabilities {
    pub toggle: f64,
    pub local_toggle: f64,
    pub hop: f64,
    pub add: f64,
    pub local_add: f64,
    pub delete: f64,
    pub local_delete: f64,
    pub swap: f64,
    pub null: f64,
}

impl Default for OpProbabilities {
    fn default() -> Self {
        let half = 1.0 / 14.0;
        let full = 1.0 / 7.0;
        OpProbabilities {
            toggle: half,
            local_toggle: half,
            hop: full,
            add: half,
            local_add: full,
            delete: half,
            local_delete: full,
            swap: full,
            null: full,
        }
    }
}

impl OpProbabilities {
    pub fn get(&self, op: OpCode) -> f64 {
        self.as_array()[op.index()]
    }

    /// Weights in [`OpCode::ALL`] order.
    pub fn as_array(&self) -> [f64; 9] {
        [
            self.toggle,
            self.local_toggle,
            self.hop,
            self.add,
            self.local_add,
            self.delete,
            self.local_delete,
            self.swap,
            self.null,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let probs = self.as_array();
        if let Some((op, p)) = OpCode::ALL
            .iter()
            .zip(probs)
            .find(|(_, p)| !(p.is_finite() && *p >= 0.0))
        {
            return Err(Error::Config(format!("probability of {} is {p}", op.name())));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "operation probabilities sum to {sum}, expected 1"
            )));
        }
        Ok(())
    }
}

/// Draws random genes for graphs of a fixed node count.
///
/// Opcodes whose arity exceeds the node count are dropped and the remaining
/// probabilities renormalised; if nothing remains, only `Null` is produced.
#[derive(Debug, Clone)]
pub struct GeneSampler {
    node_count: usize,
    ops: Vec<OpCode>,
    dist: Option<WeightedIndex<f64>>,
}

impl GeneSampler {
    pub fn new(probs: &OpProbabilities, node_count: usize) -> Self {
        let (ops, weights): (Vec<_>, Vec<_>) = OpCode::ALL
            .into_iter()
            .zip(probs.as_array())
            .filter(|(op, p)| op.arity() <= node_count && *p > 0.0)
            .unzip();
        let dist = WeightedIndex::new(&weights).ok();
        GeneSampler { node_count, ops, dist }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Gene {
        let Some(dist) = &self.dist else {
            return Gene::NULL;
        };
        let op = self.ops[dist.sample(rng)];
        let mut args = [0u32; 4];
        for (slot, a) in args.iter_mut().zip(index::sample(rng, self.node_count, op.arity())) {
            *slot = a as u32;
        }
        Gene { op, args }
    }
}

/// Draws a single random gene. Prefer a cached [`GeneSampler`] in loops.
pub fn random_gene<R: Rng + ?Sized>(node_count: usize, probs: &OpProbabilities, rng: &mut R) -> Gene {
    GeneSampler::new(probs, node_count).sample(rng)
}
