//! Simple undirected graph used as the phenotype.
//!
//! Adjacency is a dense bit matrix (one row of `u64` words per node) so that
//! edge membership is a single word lookup and neighbourhood intersections
//! reduce to popcounts. Node degrees and the edge count are kept alongside.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Class label attached to a graph. Labels are dense and 0-based after loading.
pub type ClassLabel = u32;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    node_count: usize,
    words_per_row: usize,
    bits: Vec<u64>,
    degrees: Vec<usize>,
    edge_count: usize,
    class_label: Option<ClassLabel>,
}

impl Graph {
    /// Edgeless graph on `node_count` nodes.
    pub fn new(node_count: usize) -> Self {
        let words_per_row = node_count.div_ceil(64);
        Graph {
            node_count,
            words_per_row,
            bits: vec![0; node_count * words_per_row],
            degrees: vec![0; node_count],
            edge_count: 0,
            class_label: None,
        }
    }

    pub fn from_edges(node_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::new(node_count);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    /// The cycle `0-1-...-(n-1)-0`.
    pub fn ring(node_count: usize) -> Self {
        let mut g = Graph::new(node_count);
        if node_count >= 3 {
            for u in 0..node_count {
                g.insert(u, (u + 1) % node_count);
            }
        } else if node_count == 2 {
            g.insert(0, 1);
        }
        g
    }

    pub fn with_class(mut self, label: Option<ClassLabel>) -> Self {
        self.class_label = label;
        self
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn class_label(&self) -> Option<ClassLabel> {
        self.class_label
    }

    pub fn set_class_label(&mut self, label: Option<ClassLabel>) {
        self.class_label = label;
    }

    pub fn is_empty(&self) -> bool {
        self.node_count == 0
    }

    fn check(&self, u: usize) -> Result<()> {
        if u >= self.node_count {
            Err(Error::NodeOutOfRange {
                index: u,
                node_count: self.node_count,
            })
        } else {
            Ok(())
        }
    }

    #[inline]
    fn row(&self, u: usize) -> &[u64] {
        &self.bits[u * self.words_per_row..(u + 1) * self.words_per_row]
    }

    #[inline]
    fn bit(&self, u: usize, v: usize) -> bool {
        self.bits[u * self.words_per_row + v / 64] >> (v % 64) & 1 == 1
    }

    #[inline]
    fn flip_bit(&mut self, u: usize, v: usize) {
        self.bits[u * self.words_per_row + v / 64] ^= 1 << (v % 64);
    }

    pub fn has_edge(&self, u: usize, v: usize) -> Result<bool> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.contains(u, v))
    }

    /// Unchecked membership test for indices already known to be in range.
    #[inline]
    pub fn contains(&self, u: usize, v: usize) -> bool {
        debug_assert!(u < self.node_count && v < self.node_count);
        u != v && self.bit(u, v)
    }

    /// Adds `{u, v}`. Returns whether the edge set changed.
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<bool> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        Ok(self.insert(u, v))
    }

    /// Removes `{u, v}` if present. Returns whether the edge set changed.
    pub fn remove_edge(&mut self, u: usize, v: usize) -> Result<bool> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.erase(u, v))
    }

    #[inline]
    pub(crate) fn insert(&mut self, u: usize, v: usize) -> bool {
        if u == v || self.bit(u, v) {
            return false;
        }
        self.flip_bit(u, v);
        self.flip_bit(v, u);
        self.degrees[u] += 1;
        self.degrees[v] += 1;
        self.edge_count += 1;
        true
    }

    #[inline]
    pub(crate) fn erase(&mut self, u: usize, v: usize) -> bool {
        if u == v || !self.bit(u, v) {
            return false;
        }
        self.flip_bit(u, v);
        self.flip_bit(v, u);
        self.degrees[u] -= 1;
        self.degrees[v] -= 1;
        self.edge_count -= 1;
        true
    }

    #[inline]
    pub(crate) fn toggle(&mut self, u: usize, v: usize) {
        if !self.erase(u, v) {
            self.insert(u, v);
        }
    }

    pub fn degree(&self, u: usize) -> usize {
        self.degrees[u]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(u).iter().enumerate().flat_map(|(w, &word)| {
            let mut word = word;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let bit = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(w * 64 + bit)
            })
        })
    }

    /// Number of common neighbours of `u` and `v`.
    pub fn common_neighbors(&self, u: usize, v: usize) -> usize {
        self.row(u)
            .iter()
            .zip(self.row(v))
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count).flat_map(move |u| self.neighbors(u).filter(move |&v| u < v).map(move |v| (u, v)))
    }

    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        self.edges().collect()
    }

    /// Toggles `round(fraction * n(n-1)/2)` distinct node pairs chosen uniformly.
    pub fn perturb_edge_slots<R: Rng + ?Sized>(&self, fraction: f64, rng: &mut R) -> Graph {
        let n = self.node_count;
        let slots = n * n.saturating_sub(1) / 2;
        let count = ((fraction.clamp(0.0, 1.0) * slots as f64).round() as usize).min(slots);
        let mut out = self.clone();
        for slot in index::sample(rng, slots, count) {
            let (u, v) = slot_to_pair(slot);
            out.toggle(u, v);
        }
        out
    }

    pub fn to_record(&self) -> GraphRecord {
        GraphRecord {
            n: self.node_count,
            edges: self.edges().map(|(u, v)| [u, v]).collect(),
            class: self.class_label,
        }
    }
}

/// Maps a linear index over pairs `u > v` (row-major lower triangle) to the pair.
fn slot_to_pair(slot: usize) -> (usize, usize) {
    let mut u = (((8 * slot + 1) as f64).sqrt() as usize).div_ceil(2);
    while u * (u - 1) / 2 > slot {
        u -= 1;
    }
    while (u + 1) * u / 2 <= slot {
        u += 1;
    }
    (u, slot - u * (u - 1) / 2)
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.node_count)
            .field("class", &self.class_label)
            .field("edges", &self.edge_list())
            .finish()
    }
}

/// JSON interchange form: `{"n": 6, "edges": [[0, 1], ...], "class": 0}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphRecord {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(default)]
    pub class: Option<ClassLabel>,
}

impl TryFrom<&GraphRecord> for Graph {
    type Error = Error;

    fn try_from(rec: &GraphRecord) -> Result<Graph> {
        let mut g = Graph::new(rec.n).with_class(rec.class);
        for &[u, v] in &rec.edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }
}

impl From<&Graph> for GraphRecord {
    fn from(g: &Graph) -> Self {
        g.to_record()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c6() -> Graph {
        Graph::ring(6)
    }

    #[test]
    fn ring_queries() {
        let g = c6();
        assert!(g.has_edge(0, 1).unwrap());
        assert!(g.has_edge(1, 0).unwrap());
        assert!(g.has_edge(5, 0).unwrap());
        assert!(!g.has_edge(0, 3).unwrap());
        assert!(!g.has_edge(2, 2).unwrap());
        assert!(matches!(g.has_edge(0, 6), Err(Error::NodeOutOfRange { index: 6, .. })));
    }

    #[test]
    fn add_and_remove() {
        let mut g = c6();
        assert!(g.add_edge(0, 3).unwrap());
        assert_eq!(g.edge_count(), 7);
        assert!(!g.add_edge(0, 1).unwrap());
        assert_eq!(g.edge_count(), 7);

        let before = c6();
        let mut h = before.clone();
        assert!(h.remove_edge(0, 1).unwrap());
        assert!(!h.remove_edge(0, 1).unwrap());
        h.add_edge(0, 1).unwrap();
        assert_eq!(h, before);

        assert!(matches!(g.add_edge(2, 2), Err(Error::SelfLoop(2))));
        assert!(g.add_edge(0, 9).is_err());
        assert!(g.remove_edge(9, 0).is_err());
    }

    #[test]
    fn degrees() {
        assert_eq!(c6().degrees(), &[2, 2, 2, 2, 2, 2]);
        assert_eq!(Graph::new(4).degrees(), &[0, 0, 0, 0]);
        let fig2_final =
            Graph::from_edges(6, &[(1, 2), (2, 3), (0, 3), (1, 4), (2, 4), (5, 3), (1, 3), (0, 4)]).unwrap();
        assert_eq!(fig2_final.degrees().iter().sum::<usize>(), 16);
    }

    #[test]
    fn neighbors_cross_word_boundary() {
        let mut g = Graph::new(130);
        for v in [1, 63, 64, 65, 127, 128, 129] {
            g.add_edge(0, v).unwrap();
        }
        assert_eq!(g.neighbors(0).collect::<Vec<_>>(), vec![1, 63, 64, 65, 127, 128, 129]);
        assert_eq!(g.neighbors(129).collect::<Vec<_>>(), vec![0]);
        assert_eq!(g.common_neighbors(1, 129), 1);
    }

    #[test]
    fn slot_mapping_is_bijective() {
        let n = 23;
        let mut seen = std::collections::HashSet::new();
        for slot in 0..n * (n - 1) / 2 {
            let (u, v) = slot_to_pair(slot);
            assert!(v < u && u < n);
            assert!(seen.insert((u, v)));
        }
    }

    #[test]
    fn perturbation_toggles_exact_slot_count() {
        let g = c6();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = g.perturb_edge_slots(0.4, &mut rng);
        let diff = (0..6)
            .flat_map(|u| (u + 1..6).map(move |v| (u, v)))
            .filter(|&(u, v)| g.contains(u, v) != p.contains(u, v))
            .count();
        assert_eq!(diff, 6); // round(0.4 * 15)
    }

    #[test]
    fn record_emits_ordered_pairs() {
        let g = Graph::from_edges(3, &[(2, 0), (1, 2)]).unwrap().with_class(Some(1));
        let json = serde_json::to_string(&g.to_record()).unwrap();
        assert_eq!(json, r#"{"n":3,"edges":[[0,2],[1,2]],"class":1}"#);
        let back: GraphRecord = serde_json::from_str(r#"{"n":3,"edges":[[2,0],[2,1]],"class":1}"#).unwrap();
        assert_eq!(Graph::try_from(&back).unwrap(), g);
    }

    fn arb_graph() -> impl Strategy<Value = Graph> {
        (1usize..40).prop_flat_map(|n| {
            (
                Just(n),
                prop::collection::vec((0..n, 0..n), 0..120),
                prop::option::of(0u32..5),
            )
                .prop_map(|(n, pairs, class)| {
                    let mut g = Graph::new(n).with_class(class);
                    for (u, v) in pairs {
                        if u != v {
                            g.insert(u, v);
                        }
                    }
                    g
                })
        })
    }

    proptest! {
        #[test]
        fn degree_sum_is_twice_edge_count(g in arb_graph()) {
            prop_assert_eq!(g.degrees().iter().sum::<usize>(), 2 * g.edge_count());
            prop_assert_eq!(g.edges().count(), g.edge_count());
        }

        #[test]
        fn json_round_trip(g in arb_graph()) {
            let json = serde_json::to_string(&g.to_record()).unwrap();
            let rec: GraphRecord = serde_json::from_str(&json).unwrap();
            prop_assert_eq!(Graph::try_from(&rec).unwrap(), g);
        }

        #[test]
        fn add_then_remove_restores(g in arb_graph(), a in 0usize..40, b in 0usize..40) {
            let n = g.node_count();
            let (u, v) = (a % n, b % n);
            prop_assume!(u != v && !g.contains(u, v));
            let mut h = g.clone();
            h.add_edge(u, v).unwrap();
            h.remove_edge(u, v).unwrap();
            prop_assert_eq!(h, g);
        }
    }
}
