//! Run configuration: TOML file, then command-line overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use grefine_core::{ClassLabel, DatasetFormat, EvolutionConfig, FitnessWeights, DEFAULT_BINS};
use serde::Deserialize;

/// Everything a command needs. Unknown keys in the file are rejected.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub dataset: Option<PathBuf>,
    pub format: DatasetFormat,
    pub class: Option<ClassLabel>,
    pub seeds: Option<PathBuf>,
    pub graphs: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub bins: usize,
    pub dump_genomes: bool,
    pub quiet: bool,
    pub fitness: FitnessWeights,
    pub evolution: EvolutionConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset: None,
            format: DatasetFormat::Tud,
            class: None,
            seeds: None,
            graphs: None,
            out: None,
            threads: None,
            bins: DEFAULT_BINS,
            dump_genomes: false,
            quiet: false,
            fitness: FitnessWeights::default(),
            evolution: EvolutionConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.bins == 0 {
            bail!("bins must be positive");
        }
        if self.threads == Some(0) {
            bail!("threads must be positive");
        }
        self.fitness.validate()?;
        self.evolution.validate()?;
        Ok(())
    }

    pub fn dataset(&self) -> Result<&Path> {
        self.dataset
            .as_deref()
            .context("no dataset given (use --dataset or `dataset` in the config)")
    }

    pub fn out(&self) -> Result<&Path> {
        self.out
            .as_deref()
            .context("no output directory given (use --out or `out` in the config)")
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Reference dataset: a TUDataset directory or a JSON graph file.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Restrict to one class.
    #[arg(long = "class")]
    pub class: Option<ClassLabel>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, env = "GREFINE_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FormatArg {
    Tud,
    Json,
}

impl From<FormatArg> for DatasetFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Tud => DatasetFormat::Tud,
            FormatArg::Json => DatasetFormat::Json,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct WeightArgs {
    #[arg(long)]
    pub wd: Option<f64>,
    #[arg(long)]
    pub wc: Option<f64>,
    #[arg(long)]
    pub ws: Option<f64>,
    #[arg(long)]
    pub we: Option<f64>,
    /// Gaussian kernel bandwidth.
    #[arg(long)]
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct EvolutionArgs {
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Population size.
    #[arg(long)]
    pub pop: Option<usize>,
    /// Number of generations.
    #[arg(long)]
    pub gens: Option<usize>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl CommonArgs {
    /// Loads `--config` (or defaults) and applies these flags on top.
    pub fn base_config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if self.dataset.is_some() {
            cfg.dataset = self.dataset.clone();
        }
        set(&mut cfg.format, self.format.map(Into::into));
        if self.class.is_some() {
            cfg.class = self.class;
        }
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        if self.threads.is_some() {
            cfg.threads = self.threads;
        }
        Ok(cfg)
    }
}

impl WeightArgs {
    pub fn apply(&self, w: &mut FitnessWeights) {
        set(&mut w.w_d, self.wd);
        set(&mut w.w_c, self.wc);
        set(&mut w.w_s, self.ws);
        set(&mut w.w_e, self.we);
        set(&mut w.sigma, self.sigma);
    }
}

impl EvolutionArgs {
    pub fn apply(&self, e: &mut EvolutionConfig) {
        set(&mut e.master_seed, self.seed);
        set(&mut e.population_size, self.pop);
        set(&mut e.generations, self.gens);
    }
}
