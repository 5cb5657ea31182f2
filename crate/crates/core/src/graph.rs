//! Weighted graphs, the graph metric, balls and annuli.
//!
//! A graph is given by a symmetric weight `μ_xy ≥ 0`; the edge set is
//! `{μ_xy > 0}` (self-loops allowed) and every vertex carries the measure
//! `m(x) = Σ_y μ_xy`. Distances are shortest-path lengths with unit edges.
//! Balls are strict: `B(x, r) = {y : d(x, y) < r}`.

use std::borrow::Cow;
use std::collections::{BTreeMap, VecDeque};
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Graphs up to this size cache the all-pairs distance matrix.
pub const DISTANCE_CACHE_LIMIT: usize = 3000;

/// Sentinel for "no such vertex" distances (distance to an empty set).
pub const INFINITE_DISTANCE: u32 = u32::MAX;

#[derive(Debug)]
pub struct WeightedGraph {
    n: usize,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
    reverse: Vec<usize>,
    measure: Vec<f64>,
    max_degree: usize,
    distances: OnceLock<Vec<u32>>,
}

impl Clone for WeightedGraph {
    fn clone(&self) -> Self {
        Self {
            n: self.n,
            offsets: self.offsets.clone(),
            targets: self.targets.clone(),
            weights: self.weights.clone(),
            reverse: self.reverse.clone(),
            measure: self.measure.clone(),
            max_degree: self.max_degree,
            distances: OnceLock::new(),
        }
    }
}

impl PartialEq for WeightedGraph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.offsets == other.offsets
            && self.targets == other.targets
            && self.weights == other.weights
    }
}

impl WeightedGraph {
    /// Builds a graph from undirected weighted edges `(x, y, μ_xy)`.
    ///
    /// Each unordered pair may be given once, or twice with the same weight.
    /// Zero weights are dropped. The vertex set is `0..=max id`.
    pub fn from_edges(edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut pairs: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        let mut n = 0;
        for &(x, y, w) in edges {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::NegativeWeight { x, y, weight: w });
            }
            n = n.max(x + 1).max(y + 1);
            let key = (x.min(y), x.max(y));
            match pairs.get(&key) {
                Some(&prev) if prev != w => {
                    return Err(Error::AsymmetricWeight { x: key.0, y: key.1, first: prev, second: w })
                }
                _ => {
                    pairs.insert(key, w);
                }
            }
        }
        if n == 0 {
            return Err(Error::EmptyGraph);
        }

        let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (&(x, y), &w) in &pairs {
            if w == 0.0 {
                continue;
            }
            adjacency[x].push((y, w));
            if x != y {
                adjacency[y].push((x, w));
            }
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(y, _)| y);
        }

        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        let mut weights = Vec::new();
        offsets.push(0);
        for list in &adjacency {
            for &(y, w) in list {
                targets.push(y);
                weights.push(w);
            }
            offsets.push(targets.len());
        }

        let measure: Vec<f64> = (0..n).map(|x| weights[offsets[x]..offsets[x + 1]].iter().sum()).collect();
        if let Some(x) = measure.iter().position(|&m| m <= 0.0) {
            return Err(Error::ZeroMeasureVertex(x));
        }

        let mut reverse = vec![0; targets.len()];
        for x in 0..n {
            for e in offsets[x]..offsets[x + 1] {
                let y = targets[e];
                let back = targets[offsets[y]..offsets[y + 1]].binary_search(&x).expect("adjacency is symmetric");
                reverse[e] = offsets[y] + back;
            }
        }
        let max_degree = (0..n).map(|x| offsets[x + 1] - offsets[x]).max().unwrap_or(0);

        let g = Self { n, offsets, targets, weights, reverse, measure, max_degree, distances: OnceLock::new() };
        let from_zero = g.bfs(&[0]);
        if let Some(unreached) = from_zero.iter().position(|&d| d == INFINITE_DISTANCE) {
            return Err(Error::DisconnectedGraph { unreached });
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The vertex measure `m`.
    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn m(&self, x: usize) -> f64 {
        self.measure[x]
    }

    /// Maximal number of neighbours (self-loops count), the constant `M₀`.
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    /// Range of directed-edge slots whose source is `x`.
    pub fn edge_range(&self, x: usize) -> std::ops::Range<usize> {
        self.offsets[x]..self.offsets[x + 1]
    }

    pub fn edge_target(&self, e: usize) -> usize {
        self.targets[e]
    }

    pub fn edge_weight(&self, e: usize) -> f64 {
        self.weights[e]
    }

    /// Slot of the reversed edge `(y, x)` for the slot of `(x, y)`.
    pub fn edge_reverse(&self, e: usize) -> usize {
        self.reverse[e]
    }

    /// Neighbours of `x` with their weights `μ_xy`.
    pub fn neighbors(&self, x: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.edge_range(x).map(move |e| (self.targets[e], self.weights[e]))
    }

    pub fn weight(&self, x: usize, y: usize) -> f64 {
        let range = self.edge_range(x);
        match self.targets[range.clone()].binary_search(&y) {
            Ok(i) => self.weights[range.start + i],
            Err(_) => 0.0,
        }
    }

    /// Markov kernel `p(x, y) = μ_xy / (m(x) m(y))`.
    pub fn p(&self, x: usize, y: usize) -> f64 {
        self.weight(x, y) / (self.measure[x] * self.measure[y])
    }

    /// Undirected edges `(x, y, μ)` with `x ≤ y`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for x in 0..self.n {
            for (y, w) in self.neighbors(x) {
                if x <= y {
                    out.push((x, y, w));
                }
            }
        }
        out
    }

    /// Multi-source BFS; `INFINITE_DISTANCE` marks unreachable vertices.
    pub fn bfs(&self, sources: &[usize]) -> Vec<u32> {
        let mut dist = vec![INFINITE_DISTANCE; self.n];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s] != 0 {
                dist[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(x) = queue.pop_front() {
            let next = dist[x] + 1;
            for e in self.edge_range(x) {
                let y = self.targets[e];
                if dist[y] == INFINITE_DISTANCE {
                    dist[y] = next;
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    fn all_pairs(&self) -> Option<&[u32]> {
        if self.n > DISTANCE_CACHE_LIMIT {
            return None;
        }
        Some(self.distances.get_or_init(|| {
            let mut all = Vec::with_capacity(self.n * self.n);
            for x in 0..self.n {
                all.extend(self.bfs(&[x]));
            }
            all
        }))
    }

    /// Distances from `x` to every vertex.
    pub fn distances_from(&self, x: usize) -> Cow<'_, [u32]> {
        match self.all_pairs() {
            Some(all) => Cow::Borrowed(&all[x * self.n..(x + 1) * self.n]),
            None => Cow::Owned(self.bfs(&[x])),
        }
    }

    pub fn distance(&self, x: usize, y: usize) -> u32 {
        match self.all_pairs() {
            Some(all) => all[x * self.n + y],
            None => self.bfs(&[x])[y],
        }
    }

    /// `d(E, F)`; infinite when either set is empty.
    pub fn set_distance(&self, e: &[usize], f: &[usize]) -> u32 {
        if e.is_empty() || f.is_empty() {
            return INFINITE_DISTANCE;
        }
        let from_f = self.bfs(f);
        e.iter().map(|&x| from_f[x]).min().unwrap_or(INFINITE_DISTANCE)
    }

    /// Distance from every vertex to the complement of the indicated set.
    pub fn distance_to_complement(&self, inside: &[bool]) -> Vec<u32> {
        let outside: Vec<usize> = (0..self.n).filter(|&x| !inside[x]).collect();
        self.bfs(&outside)
    }

    pub fn eccentricity(&self, x: usize) -> u32 {
        self.distances_from(x).iter().copied().max().unwrap_or(0)
    }

    pub fn diameter(&self) -> u32 {
        (0..self.n).map(|x| self.eccentricity(x)).max().unwrap_or(0)
    }

    /// `m(E)` for a vertex list.
    pub fn volume(&self, set: &[usize]) -> f64 {
        set.iter().map(|&x| self.measure[x]).sum()
    }

    /// `V(x, r)` without materializing the ball.
    pub fn ball_volume(&self, x: usize, r: usize) -> f64 {
        self.distances_from(x).iter().zip(&self.measure).filter(|(&d, _)| (d as usize) < r).map(|(_, m)| m).sum()
    }

    /// The strict ball `B(x, r) = {y : d(x, y) < r}`.
    pub fn ball(&self, x: usize, r: usize) -> Ball {
        let dist = self.distances_from(x);
        let members: Vec<usize> = (0..self.n).filter(|&y| (dist[y] as usize) < r).collect();
        let volume = self.volume(&members);
        Ball { center: x, radius: r, members, volume }
    }

    /// Annuli `C_1(B) = 4B`, `C_j(B) = 2^{j+1}B \ 2^jB` for `j = 1..=j_max`.
    pub fn annuli(&self, b: &Ball, j_max: usize) -> Vec<Annulus> {
        let dist = self.distances_from(b.center);
        (1..=j_max)
            .map(|j| {
                let outer = b.radius.saturating_mul(1usize << (j + 1).min(62));
                let inner = if j == 1 { 0 } else { b.radius.saturating_mul(1usize << j.min(62)) };
                let members: Vec<usize> = (0..self.n)
                    .filter(|&y| {
                        let d = dist[y] as usize;
                        d < outer && (j == 1 || d >= inner)
                    })
                    .collect();
                let volume = self.volume(&members);
                Annulus { j, members, volume }
            })
            .collect()
    }

    /// Smallest `j_max` such that the annuli `C_1..C_{j_max}` cover the graph.
    pub fn covering_annulus_count(&self, b: &Ball) -> usize {
        let ecc = self.eccentricity(b.center) as usize;
        let mut j = 1;
        while b.radius.saturating_mul(1usize << (j + 1)) <= ecc {
            j += 1;
        }
        j
    }

    /// Parses the text edge-list format: `x y μ` per line, `#` comments.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("expected `x y mu`, got {} fields", fields.len()),
                });
            }
            let parse_vertex = |s: &str| {
                s.parse::<usize>().map_err(|e| Error::Parse { line: i + 1, msg: format!("bad vertex id `{s}`: {e}") })
            };
            let x = parse_vertex(fields[0])?;
            let y = parse_vertex(fields[1])?;
            let w = fields[2]
                .parse::<f64>()
                .map_err(|e| Error::Parse { line: i + 1, msg: format!("bad weight `{}`: {e}", fields[2]) })?;
            edges.push((x, y, w));
        }
        Self::from_edges(&edges)
    }

    /// Parses `{"edges": [[x, y, mu], ...]}`.
    pub fn parse_json(text: &str) -> Result<Self> {
        let file: EdgeFile = serde_json::from_str(text)?;
        Self::from_edges(&file.edges)
    }

    /// Loads a graph file; `.json` selects the JSON variant.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::parse_json(&text)
        } else {
            Self::parse_edge_list(&text)
        }
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = String::from("# x y mu\n");
        for (x, y, w) in self.edges() {
            out.push_str(&format!("{x} {y} {w}\n"));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let file = EdgeFile { edges: self.edges() };
        serde_json::to_string(&file).expect("edge list serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct EdgeFile {
    edges: Vec<(usize, usize, f64)>,
}

/// A strict ball with its nominal integer radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: usize,
    pub radius: usize,
    /// Sorted member list.
    pub members: Vec<usize>,
    pub volume: f64,
}

impl Ball {
    pub fn contains(&self, y: usize) -> bool {
        self.members.binary_search(&y).is_ok()
    }

    /// `λB = B(x_B, λr)`; for integer distances `d < λr ⟺ d < ⌈λr⌉`.
    pub fn scaled(&self, g: &WeightedGraph, lambda: f64) -> Ball {
        g.ball(self.center, scaled_radius(self.radius, lambda))
    }

    /// Membership mask over all vertices.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for &y in &self.members {
            mask[y] = true;
        }
        mask
    }
}

pub(crate) fn scaled_radius(r: usize, lambda: f64) -> usize {
    (lambda * r as f64 - 1e-9).ceil().max(0.0) as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annulus {
    pub j: usize,
    pub members: Vec<usize>,
    pub volume: f64,
}
