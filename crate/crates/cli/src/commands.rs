use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use grefine_core::corpus::graphs_to_json;
use grefine_core::metrics::{clustering_histogram, degree_histogram, laplacian_spectrum, spectral_histogram};
use grefine_core::pipeline::{compare, summarize_evaluation, MeanFitness};
use grefine_core::{
    evaluate_batch, load_dataset, load_graphs_json, refine_batch, ClassLabel, CorpusSet, CorpusStats, FeatureHistogram,
    Graph,
};

use crate::config::RunConfig;
use crate::report;

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    builder.build().context("starting worker pool")?.install(f)
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))
}

fn load_corpora(cfg: &RunConfig) -> Result<CorpusSet> {
    let path = cfg.dataset()?;
    let ds = load_dataset(path, cfg.format).with_context(|| format!("loading dataset {}", path.display()))?;
    Ok(CorpusSet::from_dataset(&ds, cfg.bins, cfg.class)?)
}

/// Keeps graphs of the configured class (unlabelled graphs are kept and take that class).
fn filter_class(graphs: Vec<Graph>, class: Option<ClassLabel>) -> Vec<Graph> {
    match class {
        None => graphs,
        Some(c) => graphs
            .into_iter()
            .filter(|g| g.class_label().map_or(true, |l| l == c))
            .collect(),
    }
}

pub fn refine(cfg: &RunConfig) -> Result<()> {
    cfg.validate()?;
    let seeds_path = cfg.seeds.as_deref().context("no seed graphs given (use --seeds)")?;
    let out = cfg.out()?;
    let corpora = load_corpora(cfg)?;
    let seeds = filter_class(
        load_graphs_json(seeds_path).with_context(|| format!("loading seeds {}", seeds_path.display()))?,
        cfg.class,
    );
    if seeds.is_empty() {
        bail!("no seed graphs to refine");
    }

    let quiet = cfg.quiet;
    let multi = seeds.len() > 1;
    let outcomes = with_pool(cfg.threads, || {
        Ok(refine_batch(
            &seeds,
            &corpora,
            &cfg.fitness,
            &cfg.evolution,
            cfg.class,
            |index, stats| {
                if !quiet {
                    if multi {
                        eprintln!("seed={index} {}", stats.progress_line());
                    } else {
                        eprintln!("{}", stats.progress_line());
                    }
                }
            },
        )?)
    })?;

    create_dir(out)?;
    create_dir(&out.join("history"))?;
    let refined: Vec<Graph> = outcomes.iter().map(|o| o.refined.clone()).collect();
    let refined_path = out.join("refined.json");
    fs::write(&refined_path, graphs_to_json(&refined))
        .with_context(|| format!("writing {}", refined_path.display()))?;
    for o in &outcomes {
        report::write_history(
            &out.join("history").join(format!("seed_{:04}.csv", o.index)),
            &o.history,
        )?;
    }
    if cfg.dump_genomes {
        let dir = out.join("genomes");
        create_dir(&dir)?;
        for o in &outcomes {
            let path = dir.join(format!("seed_{:04}.txt", o.index));
            fs::write(&path, o.genome.dump()).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    let rows = compare(&outcomes, &corpora)?;
    report::write_summary(&out.join("summary.csv"), &rows)?;

    print!("{}", report::format_comparison(&rows));
    let wall: f64 = outcomes.iter().map(|o| o.wall_time.as_secs_f64()).sum();
    eprintln!(
        "refined {} graph(s) in {:.1}s of run time; outputs in {}",
        outcomes.len(),
        wall,
        out.display()
    );
    Ok(())
}

fn mean_histogram(
    graphs: &[&Graph],
    stats: &CorpusStats,
    f: impl Fn(&Graph, &CorpusStats) -> Result<FeatureHistogram>,
) -> Result<FeatureHistogram> {
    let hists = graphs.iter().map(|g| f(g, stats)).collect::<Result<Vec<_>>>()?;
    FeatureHistogram::mean(&hists).context("no graphs in class")
}

pub fn evaluate(cfg: &RunConfig) -> Result<()> {
    cfg.validate()?;
    let graphs_path = cfg
        .graphs
        .as_deref()
        .or(cfg.seeds.as_deref())
        .context("no graphs to evaluate (use --graphs)")?;
    let corpora = load_corpora(cfg)?;
    let graphs = filter_class(
        load_graphs_json(graphs_path).with_context(|| format!("loading graphs {}", graphs_path.display()))?,
        cfg.class,
    );
    let scores = with_pool(cfg.threads, || {
        Ok(evaluate_batch(&graphs, &corpora, &cfg.fitness, cfg.class)?)
    })?;
    let summary: Vec<(ClassLabel, usize, f64, MeanFitness)> = summarize_evaluation(&graphs, &scores)
        .into_iter()
        .map(|(c, (n, nodes, m))| (c, n, nodes, m))
        .collect();

    println!("{}", report::EVALUATION_SUMMARY_HEADER.join(","));
    for row in report::evaluation_summary_rows(&summary) {
        println!("{}", row.join(","));
    }

    if let Some(out) = &cfg.out {
        create_dir(out)?;
        report::write_evaluation(&out.join("evaluation.csv"), &graphs, &scores)?;
        report::write_evaluation_summary(&out.join("evaluation_summary.csv"), &summary)?;
        let hist_dir = out.join("histograms");
        create_dir(&hist_dir)?;
        for (class, ..) in &summary {
            let stats = corpora.get(*class)?;
            let members: Vec<&Graph> = graphs
                .iter()
                .zip(&scores)
                .filter(|(_, (c, _))| c == class)
                .map(|(g, _)| g)
                .collect();
            let degree = |g: &Graph, s: &CorpusStats| Ok(degree_histogram(g, s.degree_binning())?);
            let clustering = |g: &Graph, s: &CorpusStats| Ok(clustering_histogram(g, s.clustering_binning())?);
            let spectral =
                |g: &Graph, s: &CorpusStats| Ok(spectral_histogram(&laplacian_spectrum(g)?, s.spectral_binning()));
            let outputs = [
                (
                    "degree",
                    mean_histogram(&members, stats, degree)?,
                    stats.degree_reference(),
                ),
                (
                    "clustering",
                    mean_histogram(&members, stats, clustering)?,
                    stats.clustering_reference(),
                ),
                (
                    "spectral",
                    mean_histogram(&members, stats, spectral)?,
                    stats.spectral_reference(),
                ),
            ];
            for (name, hist, reference) in outputs {
                report::write_histogram(&hist_dir.join(format!("class{class}_{name}.csv")), &hist)?;
                let corpus_mean = FeatureHistogram::mean(reference.histograms()).expect("corpus is non-empty");
                report::write_histogram(&hist_dir.join(format!("class{class}_{name}_corpus.csv")), &corpus_mean)?;
            }
        }
    }
    Ok(())
}

pub fn stats(cfg: &RunConfig) -> Result<()> {
    let path = cfg.dataset()?;
    let ds = load_dataset(path, cfg.format).with_context(|| format!("loading dataset {}", path.display()))?;
    let text = report::format_stats(&ds.summary());
    print!("{text}");
    if let Some(out) = &cfg.out {
        create_dir(out)?;
        let p = out.join("stats.csv");
        fs::write(&p, &text).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}
