//! Conical and vertical square functions and the tent functional.
//!
//! Cones: `γ(x) = {(y,l) : d(x,y)² ≤ l}` and `γ̃(x) = {(y,k) : d(x,y) ≤ k}`.
//! For `R² ≤ l < (R+1)²` the slice `{y : d(x,y)² ≤ l}` is the strict ball
//! `B(x, R+1)` and the volume `V(x, √(l+1))` (radius `⌈√(l+1)⌉`) is
//! `V(x, R+1)`, so levels are summed in blocks before touching the cone.

use serde::Serialize;

use crate::calculus::Calculus;
use crate::error::Result;
use crate::functions::{EdgeFunction, SpaceTimeFunction, VertexFunction};
use crate::graph::WeightedGraph;
use crate::operators::{apply_p_into, divergence};
use crate::parallel::par_map;

#[derive(Debug, Clone, Serialize)]
pub struct SquareFunction {
    pub values: VertexFunction,
    /// Last level (or `K` for the tilde version) included.
    pub l_max: usize,
    /// Bound on the omitted part of `value(x)²`, uniform in `x`.
    pub tail_bound: f64,
}

impl SquareFunction {
    pub fn l1_norm(&self, g: &WeightedGraph) -> f64 {
        self.values.norm1(g)
    }
}

/// `sqrt(Σ_R (1/V(x,R+1)) Σ_{d(x,y) ≤ R} w[R][y])` for every `x`.
fn block_cone_sum(g: &WeightedGraph, blocks: &[Vec<f64>]) -> VertexFunction {
    let r_count = blocks.len();
    par_map(g.n(), |x| {
        let dist = g.distances_from(x);
        // shells[r][R] = Σ_{d(x,y)=r} w[R][y] and volumes by radius
        let mut shell_w = vec![0.0; r_count * r_count];
        let mut shell_m = vec![0.0; r_count];
        for (y, &d) in dist.iter().enumerate() {
            let d = d as usize;
            if d >= r_count {
                continue;
            }
            shell_m[d] += g.m(y);
            for (rr, block) in blocks.iter().enumerate().skip(d) {
                shell_w[d * r_count + rr] += block[y];
            }
        }
        let mut total = 0.0;
        let mut volume = 0.0;
        let mut inner = vec![0.0; r_count];
        for r in 0..r_count {
            volume += shell_m[r];
            // inner[R] accumulates Σ_{d ≤ r} w[R] for R ≥ r
            for (rr, acc) in inner.iter_mut().enumerate().skip(r) {
                *acc += shell_w[r * r_count + rr];
            }
            total += inner[r] / volume;
        }
        total.sqrt()
    })
    .into()
}

/// Level `l` lies in block `⌊√l⌋`.
fn block_of(l: usize) -> usize {
    let mut r = (l as f64).sqrt() as usize;
    while r * r > l {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= l {
        r += 1;
    }
    r
}

/// Smallest cone-saturating level count, `diam² + 1`.
pub fn saturating_l_max(g: &WeightedGraph) -> usize {
    let d = g.diameter() as usize;
    d * d + 1
}

/// Bound on `Σ_{l > L} (l+1)^{2β−1} ρ^{2l}`, or infinity if `ρ = 1`.
fn weighted_geometric_tail(beta: f64, rho: f64, l_max: usize) -> f64 {
    if rho >= 1.0 {
        return f64::INFINITY;
    }
    let r2 = rho * rho;
    let a = 2.0 * beta - 1.0;
    let k = (l_max + 1) as f64;
    // consecutive ratio r² ((l+2)/(l+1))^a is largest at the first term for a > 0
    let ratio = r2 * ((k + 1.0) / k).powf(a.max(0.0));
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    (k + 1.0).powf(a) * r2.powf(k) / (1.0 - ratio)
}

/// Levels `L` with `L ≥ diam²` and the tail of `L_β` below `tol` (relative
/// to `‖Δ^β f‖₂² / V(Γ)`), capped at `cap`.
pub fn default_l_max(cal: &Calculus, beta: f64, tol: f64, cap: usize) -> usize {
    let g = cal.graph();
    let rho = cal.bounds().rho();
    let mut l = saturating_l_max(g);
    while l < cap && weighted_geometric_tail(beta, rho, l) > tol {
        l = (l * 5 / 4).max(l + 1);
    }
    l.min(cap)
}

/// `u_l = P^l h` for `l = 0..=l_max`, handed to `visit(l, u_l)`.
fn for_each_iterate(g: &WeightedGraph, h: &[f64], l_max: usize, mut visit: impl FnMut(usize, &[f64])) {
    let mut cur = h.to_vec();
    let mut next = vec![0.0; g.n()];
    for l in 0..=l_max {
        visit(l, &cur);
        if l < l_max {
            apply_p_into(g, &cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
    }
}

fn total_volume(g: &WeightedGraph) -> f64 {
    g.measure().iter().sum()
}

/// `L_β f(x) = (Σ_{(y,l)∈γ(x), l ≤ L} (l+1)^{2β−1}/V(x,√(l+1)) |Δ^β P^l f(y)|² m(y))^{1/2}`.
pub fn lusin(cal: &Calculus, f: &[f64], beta: f64, l_max: usize) -> Result<SquareFunction> {
    let g = cal.graph();
    let h = cal.delta_power(f, beta)?;
    let mut blocks = vec![vec![0.0; g.n()]; block_of(l_max) + 1];
    for_each_iterate(g, &h, l_max, |l, u| {
        let w = ((l + 1) as f64).powf(2.0 * beta - 1.0);
        let block = &mut blocks[block_of(l)];
        for y in 0..g.n() {
            block[y] += w * u[y] * u[y] * g.m(y);
        }
    });
    let values = block_cone_sum(g, &blocks);
    let tail_bound = weighted_geometric_tail(beta, cal.bounds().rho(), l_max) * h.norm2(g).powi(2) / total_volume(g);
    Ok(SquareFunction { values, l_max, tail_bound })
}

/// `L̃_β f(x) = (Σ_{(y,k)∈γ̃(x), k ≤ K} 1/((k+1)V(x,k+1)) |(k²Δ)^β P^{k²} f(y) m(y)|²)^{1/2}`.
///
/// The weight `k^{2β}` vanishes at `k = 0`.
pub fn lusin_tilde(cal: &Calculus, f: &[f64], beta: f64, k_max: usize) -> Result<SquareFunction> {
    let g = cal.graph();
    let h = cal.delta_power(f, beta)?;
    let n = g.n();
    let mut blocks = vec![vec![0.0; n]; k_max + 1];
    let l_max = k_max * k_max;
    let mut next_k = 0;
    for_each_iterate(g, &h, l_max, |l, u| {
        if next_k * next_k != l {
            return;
        }
        let k = next_k as f64;
        let w = k.powf(4.0 * beta) / (k + 1.0);
        for y in 0..n {
            let v = u[y] * g.m(y);
            blocks[next_k][y] = w * v * v;
        }
        next_k += 1;
    });
    let values = block_cone_sum(g, &blocks);
    let rho = cal.bounds().rho();
    let m_max = g.measure().iter().copied().fold(0.0, f64::max);
    // Σ_{k>K} k^{4β}/(k+1) ρ^{2k²} ‖h‖² m_max / V(Γ)
    let tail_bound = if rho >= 1.0 {
        f64::INFINITY
    } else {
        let mut t = 0.0;
        let mut k = k_max + 1;
        loop {
            let kf = k as f64;
            let term = kf.powf(4.0 * beta) / (kf + 1.0) * rho.powf(2.0 * kf * kf);
            t += term;
            if term < 1e-300 || term < t * 1e-17 {
                break;
            }
            k += 1;
        }
        t * h.norm2(g).powi(2) * m_max / total_volume(g)
    };
    Ok(SquareFunction { values, l_max: k_max, tail_bound })
}

/// `G_β f(x) = (Σ_{l=1}^{L} l^{2β−1} |Δ^β P^{l−1} f(x)|²)^{1/2}`.
pub fn g_littlewood(cal: &Calculus, f: &[f64], beta: f64, l_max: usize) -> Result<SquareFunction> {
    let g = cal.graph();
    let h = cal.delta_power(f, beta)?;
    let mut acc = vec![0.0; g.n()];
    if l_max >= 1 {
        for_each_iterate(g, &h, l_max - 1, |l, u| {
            let w = ((l + 1) as f64).powf(2.0 * beta - 1.0);
            for (a, v) in acc.iter_mut().zip(u) {
                *a += w * v * v;
            }
        });
    }
    let m_min = g.measure().iter().copied().fold(f64::INFINITY, f64::min);
    let tail_bound =
        weighted_geometric_tail(beta, cal.bounds().rho(), l_max.saturating_sub(1)) * h.norm2(g).powi(2) / m_min;
    let values: VertexFunction = acc.into_iter().map(f64::sqrt).collect::<Vec<_>>().into();
    Ok(SquareFunction { values, l_max, tail_bound })
}

/// `𝒜F(x) = (Σ_{(y,k)∈γ(x)} 1/(k+1) · m(y)/V(x,√(k+1)) |F(y,k)|²)^{1/2}`.
pub fn tent_functional(g: &WeightedGraph, f: &SpaceTimeFunction) -> VertexFunction {
    let l_max = f.l_max();
    let mut blocks = vec![vec![0.0; g.n()]; block_of(l_max) + 1];
    for (k, level) in f.levels().iter().enumerate() {
        let block = &mut blocks[block_of(k)];
        let w = 1.0 / (k + 1) as f64;
        for (y, v) in level.iter().enumerate() {
            block[y] += w * g.m(y) * v * v;
        }
    }
    block_cone_sum(g, &blocks)
}

/// `‖L_β[Δ^{-1/2} d*F]‖₁`.
pub fn quad_norm_forms(cal: &Calculus, form: &EdgeFunction, beta: f64, l_max: usize) -> Result<f64> {
    let g = cal.graph();
    let div = divergence(g, form);
    let h = cal.inv_sqrt(&div)?;
    Ok(lusin(cal, &h, beta, l_max)?.l1_norm(g))
}

/// `F(·, l) = [(l+1)Δ]^β P^l f`, for which `𝒜F = L_β f`.
pub fn lusin_space_time(cal: &Calculus, f: &[f64], beta: f64, l_max: usize) -> Result<SpaceTimeFunction> {
    let g = cal.graph();
    let h = cal.delta_power(f, beta)?;
    let mut levels = Vec::with_capacity(l_max + 1);
    for_each_iterate(g, &h, l_max, |l, u| {
        let w = ((l + 1) as f64).powf(beta);
        levels.push(u.iter().map(|v| w * v).collect());
    });
    Ok(SpaceTimeFunction::from_levels(g.n(), levels))
}

#[cfg(test)]
mod tests;
