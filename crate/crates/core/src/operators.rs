//! The Markov operator and the first-order calculus on a weighted graph.
//!
//! `Pf(x) = Σ_y p(x,y) f(y) m(y)` with `p(x,y) = μ_xy / (m(x) m(y))`, so the
//! row of `P` at `x` has weights `μ_xy / m(x)` summing to one.
//! `Δ = I − P`, `df(x,y) = f(x) − f(y)` and `d*F(x) = Σ_y p(x,y) F(x,y) m(y)`.

use crate::functions::{EdgeFunction, VertexFunction};
use crate::graph::WeightedGraph;

/// Default cap on kernel iterates; support (hence memory) grows with `l`.
pub const DEFAULT_KERNEL_L_MAX: usize = 4096;

pub fn apply_p(g: &WeightedGraph, f: &[f64]) -> VertexFunction {
    let mut out = VertexFunction::zeros(g.n());
    apply_p_into(g, f, &mut out);
    out
}

pub(crate) fn apply_p_into(g: &WeightedGraph, f: &[f64], out: &mut [f64]) {
    for (x, slot) in out.iter_mut().enumerate() {
        let mx = g.m(x);
        *slot = g.edge_range(x).map(|e| g.edge_weight(e) * f[g.edge_target(e)]).sum::<f64>() / mx;
    }
}

/// `P^k f`.
pub fn apply_p_pow(g: &WeightedGraph, f: &[f64], k: usize) -> VertexFunction {
    let mut cur: VertexFunction = f.to_vec().into();
    let mut next = VertexFunction::zeros(g.n());
    for _ in 0..k {
        apply_p_into(g, &cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
    }
    cur
}

/// `P^0 f, P^1 f, …, P^k f`.
pub fn p_orbit(g: &WeightedGraph, f: &[f64], k: usize) -> Vec<VertexFunction> {
    let mut out = Vec::with_capacity(k + 1);
    out.push(VertexFunction::from(f.to_vec()));
    for i in 0..k {
        let next = apply_p(g, &out[i]);
        out.push(next);
    }
    out
}

/// `p(x, x)` for every vertex.
pub fn p_diagonal(g: &WeightedGraph) -> Vec<f64> {
    (0..g.n()).map(|x| g.p(x, x)).collect()
}

pub fn laplacian(g: &WeightedGraph, f: &[f64]) -> VertexFunction {
    let pf = apply_p(g, f);
    f.iter().zip(pf.iter()).map(|(a, b)| a - b).collect::<Vec<_>>().into()
}

/// `Δ^k f` for integer `k`.
pub fn laplacian_pow(g: &WeightedGraph, f: &[f64], k: usize) -> VertexFunction {
    let mut cur: VertexFunction = f.to_vec().into();
    for _ in 0..k {
        cur = laplacian(g, &cur);
    }
    cur
}

/// Length of the gradient `∇f(x) = (½ Σ_y p(x,y) |f(y) − f(x)|² m(y))^{1/2}`.
pub fn gradient(g: &WeightedGraph, f: &[f64]) -> VertexFunction {
    (0..g.n())
        .map(|x| {
            let mx = g.m(x);
            let s: f64 = g
                .edge_range(x)
                .map(|e| {
                    let diff = f[g.edge_target(e)] - f[x];
                    g.edge_weight(e) / mx * diff * diff
                })
                .sum();
            (0.5 * s).sqrt()
        })
        .collect::<Vec<_>>()
        .into()
}

/// `df(x, y) = f(x) − f(y)`.
pub fn differential(g: &WeightedGraph, f: &[f64]) -> EdgeFunction {
    EdgeFunction::from_fn(g, |x, y| f[x] - f[y])
}

/// `d*F(x) = Σ_{y∼x} p(x,y) F(x,y) m(y)`.
pub fn divergence(g: &WeightedGraph, form: &EdgeFunction) -> VertexFunction {
    (0..g.n())
        .map(|x| {
            let mx = g.m(x);
            g.edge_range(x).map(|e| g.edge_weight(e) * form[e]).sum::<f64>() / mx
        })
        .collect::<Vec<_>>()
        .into()
}

/// Sparse kernel `p_l(x, y)` of `P^l` with respect to `m`.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    pub l: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl KernelMatrix {
    /// `p_0(x, y) = δ(x, y) / m(y)`.
    pub fn identity(g: &WeightedGraph) -> Self {
        Self { l: 0, rows: (0..g.n()).map(|x| vec![(x, 1.0 / g.m(x))]).collect() }
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        match self.rows[x].binary_search_by_key(&y, |&(z, _)| z) {
            Ok(i) => self.rows[x][i].1,
            Err(_) => 0.0,
        }
    }

    pub fn row(&self, x: usize) -> &[(usize, f64)] {
        &self.rows[x]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// `p_{l+1}(x, y) = Σ_z p(x, z) p_l(z, y) m(z)`.
    pub fn step(&self, g: &WeightedGraph) -> Self {
        let n = g.n();
        let mut acc = vec![0.0; n];
        let mut touched = Vec::new();
        let rows = (0..n)
            .map(|x| {
                let mx = g.m(x);
                for e in g.edge_range(x) {
                    let z = g.edge_target(e);
                    // p(x,z) m(z) = μ_xz / m(x)
                    let w = g.edge_weight(e) / mx;
                    for &(y, v) in &self.rows[z] {
                        if acc[y] == 0.0 {
                            touched.push(y);
                        }
                        acc[y] += w * v;
                    }
                }
                touched.sort_unstable();
                touched.dedup();
                let row: Vec<(usize, f64)> = touched.iter().map(|&y| (y, acc[y])).collect();
                for &y in &touched {
                    acc[y] = 0.0;
                }
                touched.clear();
                row
            })
            .collect();
        Self { l: self.l + 1, rows }
    }

    /// `(p_a ⋆ p_b)(x, y) = Σ_z p_a(x, z) p_b(z, y) m(z)`.
    pub fn compose(&self, other: &KernelMatrix, g: &WeightedGraph) -> KernelMatrix {
        let n = g.n();
        let mut acc = vec![0.0; n];
        let rows = (0..n)
            .map(|x| {
                for &(z, a) in &self.rows[x] {
                    let w = a * g.m(z);
                    for &(y, b) in &other.rows[z] {
                        acc[y] += w * b;
                    }
                }
                let row: Vec<(usize, f64)> = (0..n).filter(|&y| acc[y] != 0.0).map(|y| (y, acc[y])).collect();
                acc.iter_mut().for_each(|v| *v = 0.0);
                row
            })
            .collect();
        KernelMatrix { l: self.l + other.l, rows }
    }

    /// Largest `|Σ_y p_l(x,y) m(y) − 1|`.
    pub fn normalization_defect(&self, g: &WeightedGraph) -> f64 {
        self.rows.iter().map(|row| (row.iter().map(|&(y, v)| v * g.m(y)).sum::<f64>() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Largest `|p_l(x,y) − p_l(y,x)|`.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (x, row) in self.rows.iter().enumerate() {
            for &(y, v) in row {
                worst = worst.max((v - self.get(y, x)).abs());
            }
        }
        worst
    }

    pub fn min_entry(&self) -> f64 {
        self.rows.iter().flat_map(|r| r.iter().map(|&(_, v)| v)).fold(f64::INFINITY, f64::min)
    }
}

/// `p_l` by the recursion from `p_0`; `l` is capped at `l_cap`.
pub fn kernel(g: &WeightedGraph, l: usize, l_cap: usize) -> KernelMatrix {
    let mut k = KernelMatrix::identity(g);
    for _ in 0..l.min(l_cap) {
        k = k.step(g);
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_fn(n: usize, seed: u64) -> VertexFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>().into()
    }

    #[test]
    fn k2l_markov_operator() {
        let g = zoo::k2l();
        assert_eq!(apply_p(&g, &[1.0, 0.0]).to_vec(), vec![0.5, 0.5]);
        assert_eq!(apply_p(&g, &[1.0, -1.0]).to_vec(), vec![0.0, 0.0]);
        assert_eq!(apply_p_pow(&g, &[1.0, 1.0], 7).to_vec(), vec![1.0, 1.0]);
    }

    #[test]
    fn k2l_first_order_calculus() {
        let g = zoo::k2l();
        let f = [1.0, 0.0];
        assert_eq!(laplacian(&g, &f).to_vec(), vec![0.5, -0.5]);
        assert_eq!(gradient(&g, &f).to_vec(), vec![0.5, 0.5]);
        let df = differential(&g, &f);
        assert_eq!(df.value(&g, 0, 1), Some(1.0));
        assert_eq!(df.value(&g, 1, 0), Some(-1.0));
        assert_eq!(divergence(&g, &df).to_vec(), vec![0.5, -0.5]);
        let lf = laplacian(&g, &f);
        let energy = gradient(&g, &f).norm2(&g).powi(2);
        assert!((energy - lf.inner(&g, &f.to_vec().into())).abs() < 1e-15);
        assert!((energy - 1.0).abs() < 1e-15);
    }

    #[test]
    fn constants_are_harmonic() {
        let g = zoo::lazy_torus_2d(5, 4.0);
        let c = vec![3.0; g.n()];
        assert!(laplacian(&g, &c).norm_inf() < 1e-15);
        assert!(gradient(&g, &c).norm_inf() < 1e-15);
        assert!(differential(&g, &c).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn k2l_kernels() {
        let g = zoo::k2l();
        let k0 = kernel(&g, 0, DEFAULT_KERNEL_L_MAX);
        assert_eq!(k0.get(0, 0), 0.5);
        assert_eq!(k0.get(0, 1), 0.0);
        for l in [1, 2] {
            let k = kernel(&g, l, DEFAULT_KERNEL_L_MAX);
            for x in 0..2 {
                for y in 0..2 {
                    assert!((k.get(x, y) - 0.25).abs() < 1e-16);
                }
            }
        }
    }

    #[test]
    fn kernel_support_within_distance() {
        let g = zoo::lazy_cycle(16, 2.0);
        let k = kernel(&g, 5, DEFAULT_KERNEL_L_MAX);
        for x in 0..g.n() {
            for &(y, _) in k.row(x) {
                assert!(g.distance(x, y) <= 5);
            }
        }
        assert_eq!(k.row(0).len(), 11);
    }

    #[test]
    fn contraction_and_self_adjointness() {
        for g in [zoo::lazy_cycle(16, 2.0), zoo::random_weights(&zoo::lazy_torus_2d(6, 4.0), 3, (0.5, 2.0))] {
            for seed in 0..20 {
                let f = random_fn(g.n(), seed);
                let pf = apply_p(&g, &f);
                for p in [1.0, 2.0, f64::INFINITY] {
                    assert!(pf.norm(&g, p) <= f.norm(&g, p) + 1e-12);
                }
                assert!(laplacian(&g, &f).norm1(&g) <= 2.0 * f.norm1(&g) + 1e-12);
            }
            let n = g.n();
            for x in 0..n {
                let ex = VertexFunction::indicator(n, &[x]);
                let pex = apply_p(&g, &ex);
                for y in 0..n {
                    let ey = VertexFunction::indicator(n, &[y]);
                    let lhs = pex.inner(&g, &ey);
                    let rhs = ex.inner(&g, &apply_p(&g, &ey));
                    assert!((lhs - rhs).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn d_star_d_is_laplacian_on_basis() {
        let g = zoo::random_weights(&zoo::lazy_cycle(10, 2.0), 5, (0.5, 2.0));
        for x in 0..g.n() {
            let e = VertexFunction::indicator(g.n(), &[x]);
            let lhs = divergence(&g, &differential(&g, &e));
            let rhs = laplacian(&g, &e);
            assert!(lhs.sub(&rhs).norm_inf() < 1e-13);
            let fiber = differential(&g, &e).fiber_norms(&g);
            assert!(fiber.sub(&gradient(&g, &e)).norm_inf() < 1e-13);
        }
    }
}
