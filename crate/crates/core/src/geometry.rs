//! Doubling, polynomial growth exponent and lower-bound diagnostics.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::WeightedGraph;

pub const DEFAULT_EXHAUSTIVE_LIMIT: usize = 2000;
const SAMPLE_SIZE: usize = 256;
const GROWTH_FACTORS: [usize; 3] = [2, 4, 8];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeometryReport {
    /// `sup V(x, 2r) / V(x, r)` over the inspected vertices and radii.
    pub doubling_constant: f64,
    /// Least-squares slope of `log mean V(x, λr)/V(x, r)` against `log λ`.
    pub d0_estimate: f64,
    /// `min p(x, x) m(x)`.
    pub eps_lb: f64,
    /// Maximal degree.
    pub m0: usize,
    pub exhaustive: bool,
    /// Number of vertices inspected.
    pub sample_size: usize,
}

/// Cumulative volumes `V(x, r)` for `r = 0..=ecc(x)+1`.
fn volume_profile(g: &WeightedGraph, x: usize) -> Vec<f64> {
    let dist = g.distances_from(x);
    let ecc = dist.iter().copied().max().unwrap_or(0) as usize;
    let mut shells = vec![0.0; ecc + 1];
    for (y, &d) in dist.iter().enumerate() {
        shells[d as usize] += g.m(y);
    }
    let mut profile = Vec::with_capacity(ecc + 2);
    profile.push(0.0);
    let mut acc = 0.0;
    for s in shells {
        acc += s;
        profile.push(acc);
    }
    profile
}

fn volume_at(profile: &[f64], r: usize) -> f64 {
    profile[r.min(profile.len() - 1)]
}

/// Geometry diagnostics; `p_diag[x]` must hold `p(x, x)`.
pub fn geometry_report(g: &WeightedGraph, p_diag: &[f64], exhaustive_limit: usize) -> GeometryReport {
    let exhaustive = g.n() <= exhaustive_limit;
    let vertices: Vec<usize> = if exhaustive {
        (0..g.n()).collect()
    } else {
        let mut all: Vec<usize> = (0..g.n()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0x6e6f);
        all.shuffle(&mut rng);
        all.truncate(SAMPLE_SIZE);
        all.sort_unstable();
        all
    };

    let mut doubling: f64 = 1.0;
    let mut ratio_sums = [0.0; GROWTH_FACTORS.len()];
    let mut ratio_counts = [0usize; GROWTH_FACTORS.len()];
    for &x in &vertices {
        let profile = volume_profile(g, x);
        let ecc = profile.len() - 2;
        for r in 1..=ecc.max(1) {
            let v = volume_at(&profile, r);
            doubling = doubling.max(volume_at(&profile, 2 * r) / v);
            for (i, &lambda) in GROWTH_FACTORS.iter().enumerate() {
                if lambda * r <= ecc {
                    ratio_sums[i] += volume_at(&profile, lambda * r) / v;
                    ratio_counts[i] += 1;
                }
            }
        }
    }

    let points: Vec<(f64, f64)> = GROWTH_FACTORS
        .iter()
        .enumerate()
        .filter(|(i, _)| ratio_counts[*i] > 0)
        .map(|(i, &lambda)| {
            let mean = ratio_sums[i] / ratio_counts[i] as f64;
            ((lambda as f64).ln(), mean.ln())
        })
        .collect();
    let d0_estimate = match points.len() {
        0 => 0.0,
        1 => points[0].1 / points[0].0,
        _ => ols_slope(&points),
    }
    .max(0.0);

    let eps_lb = (0..g.n()).map(|x| p_diag[x] * g.m(x)).fold(f64::INFINITY, f64::min).clamp(0.0, 1.0);

    GeometryReport {
        doubling_constant: doubling,
        d0_estimate,
        eps_lb,
        m0: g.max_degree(),
        exhaustive,
        sample_size: vertices.len(),
    }
}

fn ols_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::p_diagonal;
    use crate::zoo;

    fn report(g: &WeightedGraph) -> GeometryReport {
        geometry_report(g, &p_diagonal(g), DEFAULT_EXHAUSTIVE_LIMIT)
    }

    #[test]
    fn k2l_lower_bound() {
        let r = report(&zoo::k2l());
        assert_eq!(r.eps_lb, 0.5);
        assert_eq!(r.m0, 2);
        assert!(r.exhaustive);
    }

    #[test]
    fn lazy_cycle() {
        let r = report(&zoo::lazy_cycle(16, 2.0));
        assert_eq!(r.eps_lb, 0.5);
        assert!((r.d0_estimate - 1.0).abs() < 0.5, "{}", r.d0_estimate);
        assert!(r.doubling_constant >= 1.0 && r.doubling_constant <= 3.0);
    }

    #[test]
    fn torus_growth_exponent() {
        let r = report(&zoo::lazy_torus_2d(32, 4.0));
        assert!((r.d0_estimate - 2.0).abs() <= 0.2, "{}", r.d0_estimate);
        assert_eq!(r.eps_lb, 0.5);
    }

    #[test]
    fn tree_doubling_grows() {
        let small = report(&zoo::binary_tree(4, 1.0)).doubling_constant;
        let large = report(&zoo::binary_tree(8, 1.0)).doubling_constant;
        assert!(large > small);
    }

    #[test]
    fn sampled_mode() {
        let g = zoo::lazy_cycle(64, 2.0);
        let r = geometry_report(&g, &p_diagonal(&g), 10);
        assert!(!r.exhaustive);
        assert_eq!(r.sample_size, 64.min(SAMPLE_SIZE));
    }
}
