//! Functions on vertices, on directed edges (1-forms) and on `Γ × ℕ`.
//!
//! Every norm carries the vertex measure: `‖f‖_p^p = Σ |f(x)|^p m(x)`.

use std::fmt::Write as _;
use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexFunction(Vec<f64>);

impl Deref for VertexFunction {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for VertexFunction {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for VertexFunction {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl VertexFunction {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self(vec![c; n])
    }

    /// `1_{x} / m(x)`, the normalized point mass.
    pub fn dirac(g: &WeightedGraph, x: usize) -> Self {
        let mut f = Self::zeros(g.n());
        f[x] = 1.0 / g.m(x);
        f
    }

    pub fn indicator(n: usize, set: &[usize]) -> Self {
        let mut f = Self::zeros(n);
        for &x in set {
            f[x] = 1.0;
        }
        f
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn check_len(&self, g: &WeightedGraph) -> Result<()> {
        if self.len() != g.n() {
            return Err(Error::DimensionMismatch { expected: g.n(), got: self.len() });
        }
        Ok(())
    }

    pub fn norm(&self, g: &WeightedGraph, p: f64) -> f64 {
        if p.is_infinite() {
            return self.norm_inf();
        }
        self.iter().zip(g.measure()).map(|(v, m)| v.abs().powf(p) * m).sum::<f64>().powf(1.0 / p)
    }

    pub fn norm1(&self, g: &WeightedGraph) -> f64 {
        self.iter().zip(g.measure()).map(|(v, m)| v.abs() * m).sum()
    }

    pub fn norm2(&self, g: &WeightedGraph) -> f64 {
        self.inner(g, self).sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// `‖f‖_{L²(E)}`.
    pub fn norm2_on(&self, g: &WeightedGraph, set: &[usize]) -> f64 {
        set.iter().map(|&x| self[x] * self[x] * g.m(x)).sum::<f64>().sqrt()
    }

    /// The `m`-weighted pairing `Σ f(x) g(x) m(x)`.
    pub fn inner(&self, g: &WeightedGraph, other: &VertexFunction) -> f64 {
        self.iter().zip(other.iter()).zip(g.measure()).map(|((a, b), m)| a * b * m).sum()
    }

    /// `Σ f m / Σ m`.
    pub fn mean(&self, g: &WeightedGraph) -> f64 {
        let total: f64 = g.measure().iter().sum();
        self.iter().zip(g.measure()).map(|(v, m)| v * m).sum::<f64>() / total
    }

    /// Projection onto the `m`-mean-zero subspace (the orthogonal complement
    /// of `ker Δ` on a finite connected graph).
    pub fn remove_mean(&self, g: &WeightedGraph) -> VertexFunction {
        let mean = self.mean(g);
        Self(self.iter().map(|v| v - mean).collect())
    }

    /// `|⟨f, 1⟩| / (‖f‖₂ ‖1‖₂)`; zero for the zero function.
    pub fn relative_mean(&self, g: &WeightedGraph) -> f64 {
        let norm = self.norm2(g);
        if norm == 0.0 {
            return 0.0;
        }
        let total: f64 = g.measure().iter().sum();
        (self.mean(g) * total).abs() / (norm * total.sqrt())
    }

    pub fn scaled(&self, c: f64) -> VertexFunction {
        Self(self.iter().map(|v| c * v).collect())
    }

    /// `self += c · other`.
    pub fn add_scaled(&mut self, c: f64, other: &VertexFunction) {
        for (a, b) in self.0.iter_mut().zip(other.iter()) {
            *a += c * b;
        }
    }

    pub fn sub(&self, other: &VertexFunction) -> VertexFunction {
        Self(self.iter().zip(other.iter()).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &VertexFunction) -> VertexFunction {
        Self(self.iter().zip(other.iter()).map(|(a, b)| a + b).collect())
    }

    pub fn restricted(&self, set: &[usize]) -> VertexFunction {
        let mut out = Self::zeros(self.len());
        for &x in set {
            out[x] = self[x];
        }
        out
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&x| self[x] != 0.0).collect()
    }

    /// `vertex,value` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("vertex,value\n");
        for (x, v) in self.iter().enumerate() {
            let _ = writeln!(out, "{x},{v:e}");
        }
        out
    }

    /// Reads `vertex,value` lines; missing vertices are zero.
    pub fn from_csv(text: &str, n: usize) -> Result<Self> {
        let mut f = Self::zeros(n);
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("vertex") {
                continue;
            }
            let (x, v) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse { line: i + 1, msg: "expected `vertex,value`".into() })?;
            let x: usize =
                x.trim().parse().map_err(|_| Error::Parse { line: i + 1, msg: format!("bad vertex `{x}`") })?;
            let v: f64 = v.trim().parse().map_err(|_| Error::Parse { line: i + 1, msg: format!("bad value `{v}`") })?;
            if x >= n {
                return Err(Error::Parse { line: i + 1, msg: format!("vertex {x} out of range (n = {n})") });
            }
            f[x] = v;
        }
        Ok(f)
    }
}

/// A function on directed edges `(x, y)`, `y ∼ x`, stored per adjacency
/// slot of the graph. 1-forms are the antisymmetric ones.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFunction(Vec<f64>);

impl Deref for EdgeFunction {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for EdgeFunction {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl EdgeFunction {
    pub fn zeros(g: &WeightedGraph) -> Self {
        Self(vec![0.0; g.edge_count()])
    }

    pub fn from_fn(g: &WeightedGraph, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(g.edge_count());
        for x in 0..g.n() {
            for e in g.edge_range(x) {
                values.push(f(x, g.edge_target(e)));
            }
        }
        Self(values)
    }

    pub fn from_slots(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn value(&self, g: &WeightedGraph, x: usize, y: usize) -> Option<f64> {
        g.edge_range(x).find(|&e| g.edge_target(e) == y).map(|e| self.0[e])
    }

    /// Largest `|F(x,y) + F(y,x)|`.
    pub fn antisymmetry_defect(&self, g: &WeightedGraph) -> f64 {
        (0..self.len()).map(|e| (self.0[e] + self.0[g.edge_reverse(e)]).abs()).fold(0.0, f64::max)
    }

    /// `‖F(x, ·)‖_{T_x}² = ½ Σ_y p(x,y) m(y) |F(x,y)|²`.
    pub fn fiber_norm_sq(&self, g: &WeightedGraph, x: usize) -> f64 {
        let mx = g.m(x);
        0.5 * g.edge_range(x).map(|e| g.edge_weight(e) / mx * self.0[e] * self.0[e]).sum::<f64>()
    }

    /// `x ↦ ‖F(x, ·)‖_{T_x}`.
    pub fn fiber_norms(&self, g: &WeightedGraph) -> VertexFunction {
        (0..g.n()).map(|x| self.fiber_norm_sq(g, x).sqrt()).collect::<Vec<_>>().into()
    }

    pub fn norm(&self, g: &WeightedGraph, p: f64) -> f64 {
        self.fiber_norms(g).norm(g, p)
    }

    pub fn norm2(&self, g: &WeightedGraph) -> f64 {
        self.inner(g, self).sqrt()
    }

    /// `⟨F, G⟩_{L²(T_Γ)} = Σ_x m(x) ½ Σ_y p(x,y) m(y) F(x,y) G(x,y)`.
    pub fn inner(&self, g: &WeightedGraph, other: &EdgeFunction) -> f64 {
        let mut total = 0.0;
        for x in 0..g.n() {
            for e in g.edge_range(x) {
                total += 0.5 * g.edge_weight(e) * self.0[e] * other.0[e];
            }
        }
        total
    }

    pub fn scaled(&self, c: f64) -> EdgeFunction {
        Self(self.iter().map(|v| c * v).collect())
    }

    pub fn add_scaled(&mut self, c: f64, other: &EdgeFunction) {
        for (a, b) in self.0.iter_mut().zip(other.iter()) {
            *a += c * b;
        }
    }

    pub fn sub(&self, other: &EdgeFunction) -> EdgeFunction {
        Self(self.iter().zip(other.iter()).map(|(a, b)| a - b).collect())
    }

    /// `x,y,value` lines with a header.
    pub fn to_csv(&self, g: &WeightedGraph) -> String {
        let mut out = String::from("x,y,value\n");
        for x in 0..g.n() {
            for e in g.edge_range(x) {
                let _ = writeln!(out, "{x},{},{:e}", g.edge_target(e), self.0[e]);
            }
        }
        out
    }

    /// Reads `x,y,value` lines; unlisted edges are zero.
    pub fn from_csv(text: &str, g: &WeightedGraph) -> Result<Self> {
        let mut values = vec![0.0; g.edge_count()];
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("x,") {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = |msg: String| Error::Parse { line: i + 1, msg };
            if fields.len() != 3 {
                return Err(bad("expected `x,y,value`".into()));
            }
            let x: usize = fields[0].parse().map_err(|_| bad(format!("bad vertex `{}`", fields[0])))?;
            let y: usize = fields[1].parse().map_err(|_| bad(format!("bad vertex `{}`", fields[1])))?;
            let v: f64 = fields[2].parse().map_err(|_| bad(format!("bad value `{}`", fields[2])))?;
            if x >= g.n() {
                return Err(bad(format!("vertex {x} out of range")));
            }
            let e = g
                .edge_range(x)
                .find(|&e| g.edge_target(e) == y)
                .ok_or_else(|| bad(format!("({x},{y}) is not an edge")))?;
            values[e] = v;
        }
        Ok(Self(values))
    }
}

/// A function `F(y, l)` on `Γ × {0..=L}` stored level by level.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeFunction {
    n: usize,
    levels: Vec<Vec<f64>>,
}

impl SpaceTimeFunction {
    pub fn zeros(n: usize, l_max: usize) -> Self {
        Self { n, levels: vec![vec![0.0; n]; l_max + 1] }
    }

    pub fn from_levels(n: usize, levels: Vec<Vec<f64>>) -> Self {
        assert!(levels.iter().all(|l| l.len() == n));
        Self { n, levels }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l_max(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn get(&self, y: usize, l: usize) -> f64 {
        self.levels.get(l).map_or(0.0, |lv| lv[y])
    }

    pub fn set(&mut self, y: usize, l: usize, v: f64) {
        self.levels[l][y] = v;
    }

    pub fn level(&self, l: usize) -> &[f64] {
        &self.levels[l]
    }

    pub fn level_mut(&mut self, l: usize) -> &mut [f64] {
        &mut self.levels[l]
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    /// `‖F‖²_{T²₂} = Σ_{(x,l)} m(x)/(l+1) |F(x,l)|²`.
    pub fn t22_norm_sq(&self, g: &WeightedGraph) -> f64 {
        self.levels
            .iter()
            .enumerate()
            .map(|(l, lv)| lv.iter().zip(g.measure()).map(|(v, m)| m * v * v).sum::<f64>() / (l + 1) as f64)
            .sum()
    }

    pub fn t22_norm(&self, g: &WeightedGraph) -> f64 {
        self.t22_norm_sq(g).sqrt()
    }

    pub fn add_scaled(&mut self, c: f64, other: &SpaceTimeFunction) {
        for (a, b) in self.levels.iter_mut().zip(&other.levels) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += c * y;
            }
        }
    }

    pub fn sub(&self, other: &SpaceTimeFunction) -> SpaceTimeFunction {
        let mut out = self.clone();
        out.add_scaled(-1.0, other);
        out
    }

    pub fn scaled(&self, c: f64) -> SpaceTimeFunction {
        let mut out = self.clone();
        for lv in &mut out.levels {
            for v in lv {
                *v *= c;
            }
        }
        out
    }

    /// Points `(y, l)` with `F(y, l) ≠ 0`.
    pub fn support(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (l, lv) in self.levels.iter().enumerate() {
            for (y, &v) in lv.iter().enumerate() {
                if v != 0.0 {
                    out.push((y, l));
                }
            }
        }
        out
    }

    /// Highest level carrying a nonzero value.
    pub fn top_level(&self) -> Option<usize> {
        self.levels.iter().rposition(|lv| lv.iter().any(|&v| v != 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    #[test]
    fn point_mass_norms_carry_measure() {
        let g = zoo::lazy_torus_2d(4, 4.0);
        let f = VertexFunction::indicator(g.n(), &[3]);
        assert_eq!(f.norm1(&g), g.m(3));
        assert_eq!(f.norm2(&g), g.m(3).sqrt());
        assert_eq!(f.norm_inf(), 1.0);
    }

    #[test]
    fn mean_removal() {
        let g = zoo::lazy_path(5, 2.0);
        let f: VertexFunction = vec![1.0, 2.0, 3.0, 4.0, 5.0].into();
        let h = f.remove_mean(&g);
        assert!(h.mean(&g).abs() < 1e-15);
        assert!(h.relative_mean(&g) < 1e-15);
        assert!((f.relative_mean(&g) - 0.0).abs() > 0.1);
    }

    #[test]
    fn csv_round_trip() {
        let g = zoo::k2l();
        let f: VertexFunction = vec![1.0, -1.0].into();
        assert_eq!(VertexFunction::from_csv(&f.to_csv(), 2).unwrap(), f);
        let form = EdgeFunction::from_fn(&g, |x, y| x as f64 - y as f64);
        assert_eq!(EdgeFunction::from_csv(&form.to_csv(&g), &g).unwrap(), form);
        assert!(VertexFunction::from_csv("5,1.0\n", 2).is_err());
        assert!(EdgeFunction::from_csv("0,7,1.0\n", &g).is_err());
    }

    #[test]
    fn t22_norm_weights_levels() {
        let g = zoo::k2l();
        let mut f = SpaceTimeFunction::zeros(2, 3);
        f.set(0, 0, 1.0);
        f.set(1, 3, 2.0);
        assert_eq!(f.t22_norm_sq(&g), 2.0 + 2.0 * 4.0 / 4.0);
        assert_eq!(f.support(), vec![(0, 0), (1, 3)]);
        assert_eq!(f.top_level(), Some(3));
    }
}
