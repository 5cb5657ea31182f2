//! Deterministic test graphs.
//!
//! All generators use unit edge weights and put a self-loop of the given
//! weight on every vertex, which keeps `p(x,x) m(x)` bounded below.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

fn build(edges: Vec<(usize, usize, f64)>) -> WeightedGraph {
    WeightedGraph::from_edges(&edges).expect("zoo graphs are valid")
}

/// Two vertices joined by an edge, each with a unit loop: `m ≡ 2`.
pub fn k2l() -> WeightedGraph {
    build(vec![(0, 0, 1.0), (1, 1, 1.0), (0, 1, 1.0)])
}

pub fn lazy_cycle(n: usize, loop_weight: f64) -> WeightedGraph {
    assert!(n >= 3, "cycle needs at least 3 vertices");
    let mut edges = Vec::with_capacity(2 * n);
    for i in 0..n {
        edges.push((i, i, loop_weight));
        edges.push((i, (i + 1) % n, 1.0));
    }
    build(edges)
}

pub fn lazy_path(n: usize, loop_weight: f64) -> WeightedGraph {
    assert!(n >= 2, "path needs at least 2 vertices");
    let mut edges = Vec::with_capacity(2 * n);
    for i in 0..n {
        edges.push((i, i, loop_weight));
        if i + 1 < n {
            edges.push((i, i + 1, 1.0));
        }
    }
    build(edges)
}

/// `Z_N × Z_N` with nearest-neighbour edges; vertex `(i, j)` is `i * N + j`.
pub fn lazy_torus_2d(n: usize, loop_weight: f64) -> WeightedGraph {
    assert!(n >= 3, "torus side needs at least 3 vertices");
    let id = |i: usize, j: usize| (i % n) * n + (j % n);
    let mut edges = Vec::with_capacity(3 * n * n);
    for i in 0..n {
        for j in 0..n {
            edges.push((id(i, j), id(i, j), loop_weight));
            edges.push((id(i, j), id(i + 1, j), 1.0));
            edges.push((id(i, j), id(i, j + 1), 1.0));
        }
    }
    build(edges)
}

/// Complete binary tree of the given depth (`2^{depth+1} - 1` vertices).
///
/// Volumes grow exponentially, so this is a negative fixture for doubling.
pub fn binary_tree(depth: usize, loop_weight: f64) -> WeightedGraph {
    let n = (1usize << (depth + 1)) - 1;
    let mut edges = Vec::with_capacity(2 * n);
    for v in 0..n {
        edges.push((v, v, loop_weight));
        for child in [2 * v + 1, 2 * v + 2] {
            if child < n {
                edges.push((v, child, 1.0));
            }
        }
    }
    build(edges)
}

/// Re-weights the non-loop edges of `base` uniformly in `range`.
pub fn random_weights(base: &WeightedGraph, seed: u64, range: (f64, f64)) -> WeightedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = base
        .edges()
        .into_iter()
        .map(|(x, y, w)| if x == y { (x, y, w) } else { (x, y, rng.gen_range(range.0..=range.1)) })
        .collect();
    build(edges)
}

/// Resolves names such as `k2l`, `lazy_cycle_32`, `lazy_torus_16`,
/// `lazy_path_9`, `binary_tree_8`. A `~seed` suffix re-weights the edges
/// uniformly in `[0.5, 2]`. Loops default to the total edge weight at a
/// vertex of the unweighted lattice (2 on cycles and paths, 4 on tori, 1 on
/// trees).
pub fn by_name(name: &str) -> Result<WeightedGraph> {
    let (base, seed) = match name.split_once('~') {
        Some((b, s)) => {
            let seed = s.parse::<u64>().map_err(|_| Error::InvalidArgument(format!("bad seed in `{name}`")))?;
            (b, Some(seed))
        }
        None => (name, None),
    };
    let size = |prefix: &str| -> Option<usize> { base.strip_prefix(prefix)?.parse().ok() };
    let g = if base == "k2l" {
        k2l()
    } else if let Some(n) = size("lazy_cycle_").filter(|&n| n >= 3) {
        lazy_cycle(n, 2.0)
    } else if let Some(n) = size("lazy_torus_").filter(|&n| n >= 3) {
        lazy_torus_2d(n, 4.0)
    } else if let Some(n) = size("lazy_path_").filter(|&n| n >= 2) {
        lazy_path(n, 2.0)
    } else if let Some(d) = size("binary_tree_").filter(|&d| d <= 20) {
        binary_tree(d, 1.0)
    } else {
        return Err(Error::InvalidArgument(format!("unknown zoo graph `{name}`")));
    };
    Ok(match seed {
        Some(s) => random_weights(&g, s, (0.5, 2.0)),
        None => g,
    })
}
