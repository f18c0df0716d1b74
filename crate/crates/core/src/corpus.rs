//! Dataset loading: TUDataset flat files and the JSON interchange format.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{ClassLabel, Graph, GraphRecord};

#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: String,
    pub graphs: Vec<Graph>,
    /// Class label to indices into `graphs`.
    pub class_index: BTreeMap<ClassLabel, Vec<usize>>,
}

impl Dataset {
    pub fn from_graphs(name: impl Into<String>, graphs: Vec<Graph>) -> Self {
        let mut class_index: BTreeMap<ClassLabel, Vec<usize>> = BTreeMap::new();
        for (i, g) in graphs.iter().enumerate() {
            if let Some(c) = g.class_label() {
                class_index.entry(c).or_default().push(i);
            }
        }
        Dataset {
            name: name.into(),
            graphs,
            class_index,
        }
    }

    pub fn classes(&self) -> impl Iterator<Item = ClassLabel> + '_ {
        self.class_index.keys().copied()
    }

    pub fn class_graphs(&self, class: ClassLabel) -> Vec<Graph> {
        self.class_index
            .get(&class)
            .map(|idx| idx.iter().map(|&i| self.graphs[i].clone()).collect())
            .unwrap_or_default()
    }

    /// Graphs with fewer than two nodes load fine but cannot be refined.
    pub fn is_refinable(&self, index: usize) -> bool {
        self.graphs[index].node_count() >= 2
    }

    pub fn summary(&self) -> DatasetSummary {
        let per_class = self
            .class_index
            .iter()
            .map(|(&c, idx)| {
                let graphs: Vec<&Graph> = idx.iter().map(|&i| &self.graphs[i]).collect();
                ClassSummary::of(Some(c), &graphs)
            })
            .collect();
        let all: Vec<&Graph> = self.graphs.iter().collect();
        DatasetSummary {
            name: self.name.clone(),
            classes: self.class_index.len(),
            overall: ClassSummary::of(None, &all),
            per_class,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassSummary {
    pub class: Option<ClassLabel>,
    pub graphs: usize,
    pub avg_nodes: f64,
    pub avg_edges: f64,
}

impl ClassSummary {
    fn of(class: Option<ClassLabel>, graphs: &[&Graph]) -> Self {
        let n = graphs.len().max(1) as f64;
        ClassSummary {
            class,
            graphs: graphs.len(),
            avg_nodes: graphs.iter().map(|g| g.node_count() as f64).sum::<f64>() / n,
            avg_edges: graphs.iter().map(|g| g.edge_count() as f64).sum::<f64>() / n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetSummary {
    pub name: String,
    pub classes: usize,
    pub overall: ClassSummary,
    pub per_class: Vec<ClassSummary>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Parses one integer per field; fields are separated by commas and/or whitespace.
fn int_rows(path: &Path, text: &str, fields: usize) -> Result<Vec<(usize, Vec<i64>)>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let values = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<i64>().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line: line_no,
                    message: format!("expected an integer, found `{t}`"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if values.len() != fields {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                message: format!("expected {fields} value(s), found {}", values.len()),
            });
        }
        rows.push((line_no, values));
    }
    Ok(rows)
}

/// Finds the `<DS>` prefix of `<DS>_A.txt` in `dir`.
fn dataset_name(dir: &Path) -> Result<String> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut names: Vec<String> = entries
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            e.file_name()
                .to_str()
                .and_then(|f| f.strip_suffix("_A.txt"))
                .map(str::to_owned)
        })
        .collect();
    names.sort();
    names.into_iter().next().ok_or_else(|| {
        Error::io(
            dir.join("<DS>_A.txt"),
            std::io::Error::new(std::io::ErrorKind::NotFound, "no edge list file"),
        )
    })
}

/// Loads a TUDataset directory (`<DS>_A.txt`, `<DS>_graph_indicator.txt`,
/// `<DS>_graph_labels.txt`). Node and edge attribute files are ignored.
///
/// Node ids are re-indexed per graph in order of appearance, the symmetric
/// edge list collapses to undirected edges, and class labels are mapped to
/// `0..k` in ascending order of their original values.
pub fn load_tudataset(dir: impl AsRef<Path>) -> Result<Dataset> {
    let dir = dir.as_ref();
    let name = dataset_name(dir)?;
    let file = |suffix: &str| -> PathBuf { dir.join(format!("{name}_{suffix}")) };

    let indicator_path = file("graph_indicator.txt");
    let indicator = int_rows(&indicator_path, &read(&indicator_path)?, 1)?;
    let labels_path = file("graph_labels.txt");
    let labels = int_rows(&labels_path, &read(&labels_path)?, 1)?;

    // node id (1-based, global) -> (graph, local index)
    let mut node_home = Vec::with_capacity(indicator.len());
    let mut graph_sizes: Vec<usize> = vec![0; labels.len()];
    for (line, row) in &indicator {
        let gid = row[0];
        if gid < 1 || gid as usize > labels.len() {
            return Err(Error::Parse {
                path: indicator_path.clone(),
                line: *line,
                message: format!("graph id {gid} outside 1..={}", labels.len()),
            });
        }
        let g = gid as usize - 1;
        node_home.push((g, graph_sizes[g]));
        graph_sizes[g] += 1;
    }

    let distinct: BTreeSet<i64> = labels.iter().map(|(_, r)| r[0]).collect();
    let label_map: BTreeMap<i64, ClassLabel> = distinct.into_iter().zip(0..).collect();
    let mut graphs: Vec<Graph> = graph_sizes
        .iter()
        .zip(&labels)
        .map(|(&n, (_, r))| Graph::new(n).with_class(Some(label_map[&r[0]])))
        .collect();

    let edges_path = file("A.txt");
    for (line, row) in int_rows(&edges_path, &read(&edges_path)?, 2)? {
        let lookup = |id: i64| {
            if id < 1 || id as usize > node_home.len() {
                Err(Error::Parse {
                    path: edges_path.clone(),
                    line,
                    message: format!("dangling node id {id} (dataset has {} nodes)", node_home.len()),
                })
            } else {
                Ok(node_home[id as usize - 1])
            }
        };
        let (gu, u) = lookup(row[0])?;
        let (gv, v) = lookup(row[1])?;
        if gu != gv {
            return Err(Error::Parse {
                path: edges_path.clone(),
                line,
                message: format!("edge {} - {} joins graphs {} and {}", row[0], row[1], gu + 1, gv + 1),
            });
        }
        // self-loops cannot be represented; they carry no structure for these metrics
        if u != v {
            graphs[gu].insert(u, v);
        }
    }
    Ok(Dataset::from_graphs(name, graphs))
}

pub fn parse_graphs_json(text: &str) -> Result<Vec<Graph>> {
    let values: Vec<serde_json::Value> = serde_json::from_str(text)?;
    values
        .into_iter()
        .enumerate()
        .map(|(index, value)| {
            let rec: GraphRecord = serde_json::from_value(value).map_err(|e| Error::Schema {
                index,
                message: e.to_string(),
            })?;
            Graph::try_from(&rec).map_err(|e| Error::Schema {
                index,
                message: e.to_string(),
            })
        })
        .collect()
}

pub fn load_graphs_json(path: impl AsRef<Path>) -> Result<Vec<Graph>> {
    let path = path.as_ref();
    parse_graphs_json(&read(path)?).map_err(|e| match e {
        Error::Json(source) => Error::Parse {
            path: path.to_path_buf(),
            line: source.line(),
            message: source.to_string(),
        },
        other => other,
    })
}

/// JSON array of graph objects, one object per line.
pub fn graphs_to_json(graphs: &[Graph]) -> String {
    let mut out = String::from("[\n");
    for (i, g) in graphs.iter().enumerate() {
        out.push_str("  ");
        out.push_str(&serde_json::to_string(&g.to_record()).expect("graph records always serialize"));
        out.push_str(if i + 1 < graphs.len() { ",\n" } else { "\n" });
    }
    out.push_str("]\n");
    out
}

pub fn save_graphs_json(graphs: &[Graph], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, graphs_to_json(graphs)).map_err(|e| Error::io(path, e))
}

/// Loads a dataset in either supported format.
pub fn load_dataset(path: impl AsRef<Path>, format: DatasetFormat) -> Result<Dataset> {
    let path = path.as_ref();
    match format {
        DatasetFormat::Tud => load_tudataset(path),
        DatasetFormat::Json => {
            let name = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("graphs")
                .to_string();
            Ok(Dataset::from_graphs(name, load_graphs_json(path)?))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetFormat {
    #[default]
    Tud,
    Json,
}
