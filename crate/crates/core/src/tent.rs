//! Discrete tent spaces: tents over sets, `T¹₂` atoms, the stopping-time
//! atomic decomposition and the synthesis operator `π_{η,β}`.

use serde::{Deserialize, Serialize};

use crate::calculus::Calculus;
use crate::error::{Error, Result};
use crate::functions::{SpaceTimeFunction, VertexFunction};
use crate::graph::{Ball, WeightedGraph, INFINITE_DISTANCE};
use crate::operators::apply_p_into;
use crate::quadratic::tent_functional;

/// `(y, k) ∈ Ô` iff `d(y, Oᶜ)² > k`; an empty complement is infinitely far.
pub fn in_tent(dist_to_complement: u32, k: usize) -> bool {
    dist_to_complement == INFINITE_DISTANCE || (dist_to_complement as u64).pow(2) > k as u64
}

/// `Ô ∩ (Γ × {0..=l_max})` in level-major, ascending vertex order.
pub fn tent_of_set(g: &WeightedGraph, inside: &[bool], l_max: usize) -> Vec<(usize, usize)> {
    let dist = g.distance_to_complement(inside);
    let mut out = Vec::new();
    for k in 0..=l_max {
        for (y, &d) in dist.iter().enumerate() {
            if inside[y] && in_tent(d, k) {
                out.push((y, k));
            }
        }
    }
    out
}

pub fn tent(g: &WeightedGraph, b: &Ball, l_max: usize) -> Vec<(usize, usize)> {
    tent_of_set(g, &b.mask(g.n()), l_max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TentAtom {
    pub ball: Ball,
    pub values: SpaceTimeFunction,
    pub t22_norm: f64,
}

impl TentAtom {
    /// Exact support check against the tent of the ball, and
    /// `‖A‖²_{T²₂} ≤ (1 + 1e-12)/V(B)`.
    pub fn validate(&self, g: &WeightedGraph) -> Result<()> {
        let dist = g.distance_to_complement(&self.ball.mask(g.n()));
        for (y, k) in self.values.support() {
            if !in_tent(dist[y], k) {
                return Err(Error::ValidationFailed(format!(
                    "atom value at ({y}, {k}) outside the tent of B({}, {})",
                    self.ball.center, self.ball.radius
                )));
            }
        }
        let norm_sq = self.values.t22_norm_sq(g);
        if norm_sq > (1.0 + 1e-12) / self.ball.volume {
            return Err(Error::ValidationFailed(format!(
                "atom T²₂ norm² {norm_sq} exceeds 1/V(B) = {}",
                1.0 / self.ball.volume
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TentDecomposition {
    pub coefficients: Vec<(f64, TentAtom)>,
    pub residual_t22: f64,
    pub sum_abs_lambda: f64,
    /// `‖𝒜F‖₁`.
    pub t12_norm: f64,
    /// Dyadic level `k` of each atom (`O_k = {𝒜F > 2^k}`).
    pub atom_levels: Vec<i32>,
}

#[derive(Serialize, Deserialize)]
struct AtomSummary {
    center: usize,
    radius: usize,
    level: i32,
    lambda: f64,
}

#[derive(Serialize, Deserialize)]
struct DecompositionSummary {
    atoms: Vec<AtomSummary>,
    residual_t22: f64,
    sum_abs_lambda: f64,
    t12_norm: f64,
}

impl TentDecomposition {
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// `Σ λ_i A_i` with `levels` levels.
    pub fn reconstruct(&self, n: usize, l_max: usize) -> SpaceTimeFunction {
        let mut out = SpaceTimeFunction::zeros(n, l_max);
        for (lambda, atom) in &self.coefficients {
            for (l, level) in atom.values.levels().iter().enumerate().take(l_max + 1) {
                for (o, v) in out.level_mut(l).iter_mut().zip(level) {
                    *o += lambda * v;
                }
            }
        }
        out
    }

    /// `Σ|λ_i| / ‖𝒜F‖₁`.
    pub fn ratio(&self) -> f64 {
        if self.t12_norm == 0.0 {
            0.0
        } else {
            self.sum_abs_lambda / self.t12_norm
        }
    }

    pub fn to_json(&self) -> String {
        let summary = DecompositionSummary {
            atoms: self
                .coefficients
                .iter()
                .zip(&self.atom_levels)
                .map(|((lambda, atom), &level)| AtomSummary {
                    center: atom.ball.center,
                    radius: atom.ball.radius,
                    level,
                    lambda: *lambda,
                })
                .collect(),
            residual_t22: self.residual_t22,
            sum_abs_lambda: self.sum_abs_lambda,
            t12_norm: self.t12_norm,
        };
        serde_json::to_string_pretty(&summary).expect("plain data serializes")
    }
}

/// Ball used for a center of `O` at distance `rho` from `Oᶜ`; the whole graph
/// when `O = Γ`.
fn whitney_ball(g: &WeightedGraph, x: usize, rho: u32) -> Ball {
    if rho == INFINITE_DISTANCE {
        let c = 0;
        g.ball(c, g.eccentricity(c) as usize + 1)
    } else {
        g.ball(x, rho as usize)
    }
}

/// Stopping-time decomposition of `F` into `T¹₂` atoms.
///
/// With `a = 𝒜F` and `O_k = {a > 2^k}`, each support point `(y, l)` belongs
/// to the highest level `k` with `(y, l) ∈ Ô_k`. The points of one level are
/// grouped by the balls `B(x, d(x, O_kᶜ))`, largest radius first and
/// ascending center on ties; a point goes to the first ball whose tent holds
/// it. Each group, normalized by `‖·‖_{T²₂} V(B)^{1/2}`, is an atom.
pub fn atomic_decompose(g: &WeightedGraph, f: &SpaceTimeFunction, tol: f64) -> Result<TentDecomposition> {
    let n = g.n();
    let l_max = f.l_max();
    let a = tent_functional(g, f);
    let t12_norm = a.norm1(g);
    let support = f.support();
    if support.is_empty() {
        return Ok(TentDecomposition {
            coefficients: Vec::new(),
            residual_t22: 0.0,
            sum_abs_lambda: 0.0,
            t12_norm,
            atom_levels: Vec::new(),
        });
    }
    let min_pos = a.iter().copied().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
    let max_a = a.iter().copied().fold(0.0, f64::max);
    let k_lo = min_pos.log2().floor() as i32 - 1;
    let k_hi = max_a.log2().ceil() as i32;

    // distance to O_kᶜ for every level, lowest first
    let level_dists: Vec<Vec<u32>> = (k_lo..=k_hi)
        .map(|k| {
            let inside: Vec<bool> = a.iter().map(|&v| v > 2f64.powi(k)).collect();
            g.distance_to_complement(&inside)
        })
        .collect();

    // highest level whose tent holds each support point
    let mut by_level: Vec<Vec<(usize, usize)>> = vec![Vec::new(); level_dists.len()];
    for &(y, l) in &support {
        let idx = (0..level_dists.len())
            .rev()
            .find(|&i| in_tent(level_dists[i][y], l))
            .ok_or_else(|| Error::ValidationFailed(format!("support point ({y}, {l}) is in no tent")))?;
        by_level[idx].push((y, l));
    }

    let mut coefficients = Vec::new();
    let mut atom_levels = Vec::new();
    for (idx, points) in by_level.iter().enumerate() {
        if points.is_empty() {
            continue;
        }
        let k = k_lo + idx as i32;
        let dist = &level_dists[idx];
        let mut centers: Vec<usize> = (0..n).filter(|&x| dist[x] > 0).collect();
        centers.sort_by(|&x, &y| dist[y].cmp(&dist[x]).then(x.cmp(&y)));
        let mut assigned = vec![false; points.len()];
        let mut left = points.len();
        let mut seen_global = false;
        for &x in &centers {
            if left == 0 {
                break;
            }
            if dist[x] == INFINITE_DISTANCE {
                if seen_global {
                    continue;
                }
                seen_global = true;
            }
            let ball = whitney_ball(g, x, dist[x]);
            let to_out = g.distance_to_complement(&ball.mask(n));
            let mut piece: Option<SpaceTimeFunction> = None;
            for (i, &(y, l)) in points.iter().enumerate() {
                if !assigned[i] && in_tent(to_out[y], l) {
                    assigned[i] = true;
                    left -= 1;
                    let p = piece.get_or_insert_with(|| SpaceTimeFunction::zeros(n, 0));
                    if p.l_max() < l {
                        *p = grow(p, l);
                    }
                    p.set(y, l, f.get(y, l));
                }
            }
            if let Some(piece) = piece {
                let norm = piece.t22_norm(g);
                let lambda = norm * ball.volume.sqrt();
                let values = piece.scaled(1.0 / lambda);
                let t22_norm = values.t22_norm(g);
                coefficients.push((lambda, TentAtom { ball, values, t22_norm }));
                atom_levels.push(k);
            }
        }
        if left > 0 {
            return Err(Error::ValidationFailed(format!("{left} points of level {k} not covered")));
        }
    }

    let sum_abs_lambda = coefficients.iter().map(|(l, _)| l.abs()).sum();
    let mut decomposition =
        TentDecomposition { coefficients, residual_t22: 0.0, sum_abs_lambda, t12_norm, atom_levels };
    let back = decomposition.reconstruct(n, l_max);
    decomposition.residual_t22 = f.sub(&back).t22_norm(g);
    if decomposition.residual_t22 > tol {
        return Err(Error::NonConvergent { what: "atomic_decompose", achieved: decomposition.residual_t22, tol });
    }
    Ok(decomposition)
}

fn grow(f: &SpaceTimeFunction, l_max: usize) -> SpaceTimeFunction {
    let mut levels = f.levels().to_vec();
    levels.resize(l_max + 1, vec![0.0; f.n()]);
    SpaceTimeFunction::from_levels(f.n(), levels)
}

/// `c_1..=c_count` with `Σ_{l≥1} c_l z^{l−1} = (1 − z)^{-η}`.
pub fn pi_coefficients(eta: usize, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let mut c = 1.0;
    for l in 1..=count {
        out.push(c);
        c *= (l + eta - 1) as f64 / l as f64;
    }
    out
}

/// Levels `L` such that `π_{η,β}` applied to `[(l+1)Δ]^β P^l f`, `l ≤ L`,
/// reproduces `f` within `tol ‖f‖₂`, when `‖P‖ ≤ ρ` on mean-zero functions.
///
/// The defect is `sup_{|λ| ≤ ρ} (1−λ²)^η Σ_{k>L} c_{k+1} λ^{2k}`, the upper
/// tail of a negative binomial law with success probability `1 − ρ²`.
pub fn pi_truncation(eta: usize, rho: f64, tol: f64, cap: usize) -> usize {
    let x = rho * rho;
    if x == 0.0 {
        return 0;
    }
    let p = 1.0 - x;
    // pmf_k = c_{k+1} x^k p^η; accumulate until the remaining mass ≤ tol
    let mut pmf = p.powi(eta as i32);
    let mut cdf = 0.0;
    for k in 0..cap {
        cdf += pmf;
        if 1.0 - cdf <= tol {
            return k;
        }
        pmf *= (k + eta) as f64 / (k + 1) as f64 * x;
    }
    cap
}

/// `π_{η,β} F = Σ_{l=1}^{L+1} c_l^η / l^β · Δ^{η−β} (I+P)^η P^{l−1} F(·, l−1)`.
pub fn pi_synthesis(cal: &Calculus, f: &SpaceTimeFunction, eta: usize, beta: f64) -> Result<VertexFunction> {
    let v = pi_series(cal.graph(), f, eta, beta);
    let v = cal.plus_power(&v, eta as f64)?;
    cal.delta_power(&v, eta as f64 - beta)
}

/// `Σ_l c_l^η / l^β P^{l−1} F(·, l−1)` by Horner's scheme.
pub(crate) fn pi_series(g: &WeightedGraph, f: &SpaceTimeFunction, eta: usize, beta: f64) -> VertexFunction {
    let top = f.l_max() + 1;
    let c = pi_coefficients(eta, top);
    let mut acc = VertexFunction::zeros(g.n());
    let mut tmp = vec![0.0; g.n()];
    for l in (1..=top).rev() {
        if l < top {
            apply_p_into(g, &acc, &mut tmp);
            acc.copy_from_slice(&tmp);
        }
        let w = c[l - 1] / (l as f64).powf(beta);
        for (a, v) in acc.iter_mut().zip(f.level(l - 1)) {
            *a += w * v;
        }
    }
    acc
}

#[cfg(test)]
mod tests;
