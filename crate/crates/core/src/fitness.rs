//! Weighted-MMD fitness with an edge-count penalty. Lower is better.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ClassLabel, Graph};
use crate::metrics::{
    clustering_histogram, degree_histogram, laplacian_spectrum, spectral_histogram, Binning, FeatureHistogram,
    MmdReference, DEFAULT_BINS,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitnessWeights {
    pub w_d: f64,
    pub w_c: f64,
    pub w_s: f64,
    pub w_e: f64,
    pub sigma: f64,
}

impl Default for FitnessWeights {
    fn default() -> Self {
        FitnessWeights {
            w_d: 1.0,
            w_c: 1.0,
            w_s: 1.0,
            w_e: 0.05,
            sigma: 1.0,
        }
    }
}

impl FitnessWeights {
    pub fn validate(&self) -> Result<()> {
        let weights = [("wd", self.w_d), ("wc", self.w_c), ("ws", self.w_s), ("we", self.w_e)];
        if let Some((name, w)) = weights.iter().find(|(_, w)| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Config(format!("weight {name} must be non-negative, got {w}")));
        }
        if self.w_d + self.w_c + self.w_s <= 0.0 {
            return Err(Error::Config("at least one MMD weight must be positive".into()));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::Config(format!("sigma must be positive, got {}", self.sigma)));
        }
        Ok(())
    }

    /// Multiplies every weight (not the bandwidth) by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        FitnessWeights {
            w_d: self.w_d * factor,
            w_c: self.w_c * factor,
            w_s: self.w_s * factor,
            w_e: self.w_e * factor,
            sigma: self.sigma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FitnessValue {
    pub total: f64,
    pub mmd_d: f64,
    pub mmd_c: f64,
    pub mmd_s: f64,
    pub edge_penalty: f64,
}

impl FitnessValue {
    fn combine(w: &FitnessWeights, mmd_d: f64, mmd_c: f64, mmd_s: f64, edge_penalty: f64) -> Self {
        FitnessValue {
            total: w.w_d * mmd_d + w.w_c * mmd_c + w.w_s * mmd_s + edge_penalty,
            mmd_d,
            mmd_c,
            mmd_s,
            edge_penalty,
        }
    }
}

/// Per-class reference statistics.
#[derive(Debug, Clone)]
pub struct CorpusStats {
    class_label: Option<ClassLabel>,
    degree_binning: Binning,
    clustering_binning: Binning,
    spectral_binning: Binning,
    degree: MmdReference,
    clustering: MmdReference,
    spectral: MmdReference,
    e_target: f64,
    mean_nodes: f64,
}

/// Histograms of one graph on a corpus' shared binning.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphFeatures {
    pub degree: FeatureHistogram,
    pub clustering: FeatureHistogram,
    pub spectral: FeatureHistogram,
}

impl CorpusStats {
    pub fn class_label(&self) -> Option<ClassLabel> {
        self.class_label
    }

    pub fn e_target(&self) -> f64 {
        self.e_target
    }

    pub fn mean_nodes(&self) -> f64 {
        self.mean_nodes
    }

    pub fn len(&self) -> usize {
        self.degree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degree.is_empty()
    }

    pub fn degree_binning(&self) -> &Binning {
        &self.degree_binning
    }

    pub fn clustering_binning(&self) -> &Binning {
        &self.clustering_binning
    }

    pub fn spectral_binning(&self) -> &Binning {
        &self.spectral_binning
    }

    pub fn degree_reference(&self) -> &MmdReference {
        &self.degree
    }

    pub fn clustering_reference(&self) -> &MmdReference {
        &self.clustering
    }

    pub fn spectral_reference(&self) -> &MmdReference {
        &self.spectral
    }

    pub fn features(&self, g: &Graph) -> Result<GraphFeatures> {
        Ok(GraphFeatures {
            degree: degree_histogram(g, &self.degree_binning)?,
            clustering: clustering_histogram(g, &self.clustering_binning)?,
            spectral: spectral_histogram(&laplacian_spectrum(g)?, &self.spectral_binning),
        })
    }
}

/// Builds reference statistics from the graphs of one class.
///
/// Histogram ranges are `[0, max degree]`, `[0, 1]` and `[0, max eigenvalue]`
/// over the corpus. A degenerate upper bound of 0 (edgeless corpus) is widened to 1.
pub fn build_corpus_stats(graphs: &[Graph], class_label: Option<ClassLabel>, bins: usize) -> Result<CorpusStats> {
    let graphs: Vec<&Graph> = graphs.iter().filter(|g| !g.is_empty()).collect();
    if graphs.is_empty() {
        return Err(Error::EmptyClass(class_label));
    }
    let spectra = graphs
        .iter()
        .map(|g| laplacian_spectrum(g))
        .collect::<Result<Vec<_>>>()?;
    let max_degree = graphs
        .iter()
        .flat_map(|g| g.degrees().iter().copied())
        .max()
        .unwrap_or(0) as f64;
    let max_eigen = spectra.iter().map(|s| s.max()).fold(0.0, f64::max);
    let upper = |x: f64| if x > 0.0 { x } else { 1.0 };

    let degree_binning = Binning::new(0.0, upper(max_degree), bins)?;
    let clustering_binning = Binning::new(0.0, 1.0, bins)?;
    let spectral_binning = Binning::new(0.0, upper(max_eigen), bins)?;

    let degree = graphs
        .iter()
        .map(|g| degree_histogram(g, &degree_binning))
        .collect::<Result<Vec<_>>>()?;
    let clustering = graphs
        .iter()
        .map(|g| clustering_histogram(g, &clustering_binning))
        .collect::<Result<Vec<_>>>()?;
    let spectral = spectra
        .iter()
        .map(|s| spectral_histogram(s, &spectral_binning))
        .collect();

    let n = graphs.len() as f64;
    Ok(CorpusStats {
        class_label,
        degree_binning,
        clustering_binning,
        spectral_binning,
        degree: MmdReference::new(degree)?,
        clustering: MmdReference::new(clustering)?,
        spectral: MmdReference::new(spectral)?,
        e_target: graphs.iter().map(|g| g.edge_count() as f64).sum::<f64>() / n,
        mean_nodes: graphs.iter().map(|g| g.node_count() as f64).sum::<f64>() / n,
    })
}

/// Convenience wrapper with the default ten bins.
pub fn build_default_corpus_stats(graphs: &[Graph], class_label: Option<ClassLabel>) -> Result<CorpusStats> {
    build_corpus_stats(graphs, class_label, DEFAULT_BINS)
}

/// Fitness evaluator bound to one corpus and weight set, with the corpus
/// self-terms computed once.
#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    stats: &'a CorpusStats,
    weights: FitnessWeights,
    self_terms: [f64; 3],
}

impl<'a> Evaluator<'a> {
    pub fn new(stats: &'a CorpusStats, weights: FitnessWeights) -> Result<Self> {
        weights.validate()?;
        let sigma = weights.sigma;
        Ok(Evaluator {
            stats,
            weights,
            self_terms: [
                stats.degree.self_term(sigma),
                stats.clustering.self_term(sigma),
                stats.spectral.self_term(sigma),
            ],
        })
    }

    pub fn stats(&self) -> &CorpusStats {
        self.stats
    }

    pub fn weights(&self) -> &FitnessWeights {
        &self.weights
    }

    pub fn evaluate(&self, g: &Graph) -> Result<FitnessValue> {
        let f = self.stats.features(g)?;
        let sigma = self.weights.sigma;
        let mmd_d = self
            .stats
            .degree
            .mmd_with_self_term(&f.degree, sigma, self.self_terms[0])?;
        let mmd_c = self
            .stats
            .clustering
            .mmd_with_self_term(&f.clustering, sigma, self.self_terms[1])?;
        let mmd_s = self
            .stats
            .spectral
            .mmd_with_self_term(&f.spectral, sigma, self.self_terms[2])?;
        let edge_penalty = self.weights.w_e * (g.edge_count() as f64 - self.stats.e_target).abs();
        Ok(FitnessValue::combine(&self.weights, mmd_d, mmd_c, mmd_s, edge_penalty))
    }
}

/// One-shot evaluation. Builds an [`Evaluator`] each call; use one directly in loops.
pub fn evaluate(g: &Graph, stats: &CorpusStats, weights: &FitnessWeights) -> Result<FitnessValue> {
    Evaluator::new(stats, *weights)?.evaluate(g)
}
