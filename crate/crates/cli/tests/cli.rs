use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use grefine_core::{express, load_graphs_json, Genome, Graph};

fn toy(file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/toy").join(file)
}

fn grefine(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grefine")).args(args).output().unwrap()
}

fn ok(out: Output) -> Output {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let mut rows = vec![r.headers().unwrap().iter().map(String::from).collect()];
    rows.extend(r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()));
    rows
}

fn column(rows: &[Vec<String>], name: &str) -> Vec<String> {
    let i = rows[0]
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"));
    rows[1..].iter().map(|r| r[i].clone()).collect()
}

fn refine_toy(out: &Path, extra: &[&str]) -> Output {
    let corpus = toy("corpus.json");
    let seeds = toy("seeds.json");
    let mut args = vec![
        "refine",
        "--dataset",
        s(&corpus),
        "--format",
        "json",
        "--seeds",
        s(&seeds),
        "--out",
        s(out),
        "--pop",
        "40",
        "--gens",
        "25",
        "--seed",
        "3",
    ];
    args.extend_from_slice(extra);
    ok(grefine(&args))
}

#[test]
fn refine_writes_outputs_and_progress() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let o = refine_toy(&out, &["--dump-genomes"]);
    let stderr = String::from_utf8(o.stderr).unwrap();
    let progress: Vec<&str> = stderr.lines().filter(|l| l.starts_with("seed=")).collect();
    assert_eq!(progress.len(), 3 * 26);
    assert!(progress
        .iter()
        .all(|l| l.contains(" gen=") && l.contains(" best=") && l.contains(" mean=") && l.contains(" pedge=")));

    let refined = load_graphs_json(out.join("refined.json")).unwrap();
    let seeds = load_graphs_json(toy("seeds.json")).unwrap();
    assert_eq!(refined.len(), 3);
    for (i, (seed, refined)) in seeds.iter().zip(&refined).enumerate() {
        assert_eq!(refined.node_count(), seed.node_count());
        assert_eq!(refined.class_label(), seed.class_label());
        let history = csv_rows(&out.join(format!("history/seed_{i:04}.csv")));
        assert_eq!(history.len(), 1 + 26);
        let best: Vec<f64> = column(&history, "best_total")
            .iter()
            .map(|x| x.parse().unwrap())
            .collect();
        assert!(best.windows(2).all(|w| w[1] <= w[0]));
        // the dumped genome reproduces the refined graph
        let text = fs::read_to_string(out.join(format!("genomes/seed_{i:04}.txt"))).unwrap();
        let genome = Genome::parse_dump(&text).unwrap();
        assert_eq!(genome.len(), 2 * seed.node_count());
        let mut expressed: Graph = express(seed, &genome).unwrap();
        expressed.set_class_label(seed.class_label());
        assert_eq!(&expressed, refined);
    }
    let summary = csv_rows(&out.join("summary.csv"));
    assert_eq!(column(&summary, "class"), vec!["0", "1"]);
}

#[test]
fn evaluate_reproduces_refine_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    refine_toy(&out, &["--quiet"]);
    let eval_out = tmp.path().join("eval");
    let corpus = toy("corpus.json");
    ok(grefine(&[
        "evaluate",
        "--dataset",
        s(&corpus),
        "--format",
        "json",
        "--graphs",
        s(&out.join("refined.json")),
        "--out",
        s(&eval_out),
    ]));
    let summary = csv_rows(&out.join("summary.csv"));
    let eval = csv_rows(&eval_out.join("evaluation_summary.csv"));
    assert_eq!(column(&summary, "class"), column(&eval, "class"));
    for (ours, theirs) in [
        ("refined_total", "total"),
        ("refined_mmd_d", "mmd_d"),
        ("refined_mmd_c", "mmd_c"),
        ("refined_mmd_s", "mmd_s"),
        ("refined_edge_penalty", "edge_penalty"),
        ("refined_edges", "avg_edges"),
    ] {
        assert_eq!(column(&summary, ours), column(&eval, theirs), "{ours}");
    }
    for class in ["0", "1"] {
        for feature in ["degree", "clustering", "spectral"] {
            for suffix in ["", "_corpus"] {
                let rows = csv_rows(&eval_out.join(format!("histograms/class{class}_{feature}{suffix}.csv")));
                assert_eq!(rows.len(), 11);
                let mass: f64 = column(&rows, "mass").iter().map(|m| m.parse::<f64>().unwrap()).sum();
                assert!((mass - 1.0).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn corpus_graphs_refined_against_their_own_corpus_do_not_get_worse() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("self");
    let corpus = toy("corpus.json");
    ok(grefine(&[
        "refine",
        "--dataset",
        s(&corpus),
        "--format",
        "json",
        "--seeds",
        s(&corpus),
        "--out",
        s(&out),
        "--pop",
        "30",
        "--gens",
        "15",
        "-q",
    ]));
    let summary = csv_rows(&out.join("summary.csv"));
    let seed: Vec<f64> = column(&summary, "seed_total")
        .iter()
        .map(|x| x.parse().unwrap())
        .collect();
    let refined: Vec<f64> = column(&summary, "refined_total")
        .iter()
        .map(|x| x.parse().unwrap())
        .collect();
    assert!(
        seed.iter().zip(&refined).all(|(s, r)| r <= s),
        "{seed:?} -> {refined:?}"
    );
}

#[test]
fn edgeless_graphs_are_scored() {
    let tmp = tempfile::tempdir().unwrap();
    let graphs = tmp.path().join("empty.json");
    fs::write(&graphs, r#"[{"n": 5, "edges": []}, {"n": 1, "edges": []}]"#).unwrap();
    let corpus = toy("corpus.json");
    let o = ok(grefine(&[
        "evaluate",
        "--dataset",
        s(&corpus),
        "--format",
        "json",
        "--class",
        "0",
        "--graphs",
        s(&graphs),
    ]));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("class,graphs,"));
    assert!(text.lines().nth(1).unwrap().starts_with("0,2,"));
    // and refined: the 1-node graph passes through
    let out = tmp.path().join("run");
    ok(grefine(&[
        "refine",
        "--dataset",
        s(&corpus),
        "--format",
        "json",
        "--class",
        "0",
        "--seeds",
        s(&graphs),
        "--out",
        s(&out),
        "--pop",
        "10",
        "--gens",
        "3",
        "-q",
    ]));
    assert_eq!(load_graphs_json(out.join("refined.json")).unwrap().len(), 2);
}

#[test]
fn missing_class_and_bad_config_fail_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = toy("corpus.json");
    let o = grefine(&["stats", "--dataset", s(&corpus), "--format", "json"]);
    assert!(o.status.success());

    let o = grefine(&[
        "evaluate",
        "--dataset",
        s(&corpus),
        "--format",
        "json",
        "--class",
        "7",
        "--graphs",
        s(&corpus),
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));

    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "datset = \"x\"\n").unwrap();
    let o = grefine(&["stats", "--config", s(&cfg)]);
    assert!(!o.status.success());

    let o = grefine(&["stats", "--dataset", s(&tmp.path().join("nowhere"))]);
    assert!(!o.status.success());
}

#[test]
fn config_file_drives_a_run() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("cfg-run");
    let cfg = tmp.path().join("run.toml");
    fs::write(
        &cfg,
        format!(
            "dataset = {:?}\nformat = \"json\"\nseeds = {:?}\nout = {:?}\nquiet = true\n\n[evolution]\npopulation_size = 20\ngenerations = 5\nmaster_seed = 4\n",
            s(&toy("corpus.json")),
            s(&toy("seeds.json")),
            s(&out)
        ),
    )
    .unwrap();
    let o = ok(grefine(&["refine", "--config", s(&cfg), "--gens", "7"]));
    assert!(!String::from_utf8_lossy(&o.stderr).contains("gen="));
    assert_eq!(csv_rows(&out.join("history/seed_0000.csv")).len(), 1 + 8);
}
