//! Workload generators shared by the benchmarks.

use grefine_core::{GeneSampler, Genome, Graph, OpProbabilities};
use rand::Rng;

/// A connected, tree-like graph with maximum degree 3 and a couple of extra
/// ring closures.
pub fn molecule_like<R: Rng>(n: usize, rng: &mut R) -> Graph {
    let mut g = Graph::new(n);
    for v in 1..n {
        let u = loop {
            let u = rng.gen_range(0..v);
            if g.degree(u) < 3 {
                break u;
            }
        };
        g.add_edge(u, v).unwrap();
    }
    for _ in 0..n / 8 {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v && g.degree(u) < 3 && g.degree(v) < 3 {
            g.add_edge(u, v).unwrap();
        }
    }
    g
}

/// A random genome of length `2n` under the default operation table.
pub fn random_genome<R: Rng>(n: usize, rng: &mut R) -> Genome {
    Genome::random(n, &GeneSampler::new(&OpProbabilities::default(), n), rng)
}
