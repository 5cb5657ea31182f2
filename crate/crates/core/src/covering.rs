//! Ball coverings: maximal disjoint families (Vitali) and bounded-overlap
//! coverings of annuli.

use crate::graph::{scaled_radius, Ball, WeightedGraph};

/// Greedy maximal family of pairwise disjoint balls of radius `r` contained
/// in the region, scanning centers in ascending vertex order.
fn maximal_disjoint_balls(g: &WeightedGraph, region: &[bool], r: usize) -> Vec<Ball> {
    let mut taken = vec![false; g.n()];
    let mut out = Vec::new();
    for c in 0..g.n() {
        if !region[c] || taken[c] {
            continue;
        }
        let ball = g.ball(c, r);
        if ball.members.iter().all(|&y| region[y] && !taken[y]) {
            for &y in &ball.members {
                taken[y] = true;
            }
            out.push(ball);
        }
    }
    out
}

/// Pairwise disjoint balls of the radius of `b`, each inside `αB`, whose
/// triples cover `αB`.
pub fn vitali_cover(g: &WeightedGraph, b: &Ball, alpha: f64) -> Vec<Ball> {
    assert!(b.radius >= 1, "ball radius must be positive");
    assert!(alpha >= 1.0, "alpha must be at least 1");
    let region = b.scaled(g, alpha).mask(g.n());
    maximal_disjoint_balls(g, &region, b.radius)
}

/// Covering of `C_j(B)` by balls of the radius of `B`, contained in
/// `C_{j-1} ∪ C_j ∪ C_{j+1}` and with bounded overlap.
///
/// Radii 1 and 2 use every ball centered in `C_j(B)`. Larger radii take a
/// maximal disjoint family of radius `s = ⌊r/3⌋` in `2^{j+1}B`, keep the
/// members whose triple meets `C_j(B)`, and dilate them back to radius `r`.
pub fn annulus_cover(g: &WeightedGraph, b: &Ball, j: usize) -> Vec<Ball> {
    assert!(j >= 1, "annulus index starts at 1");
    let r = b.radius;
    assert!(r >= 1, "ball radius must be positive");
    let annulus = g.annuli(b, j).pop().expect("j >= 1").members;
    if annulus.is_empty() {
        return Vec::new();
    }
    if r <= 2 {
        return annulus.iter().map(|&x| g.ball(x, r)).collect();
    }
    let s = r / 3;
    let region = g.ball(b.center, scaled_radius(r, (1u64 << (j + 1)) as f64)).mask(g.n());
    let mut in_annulus = vec![false; g.n()];
    for &x in &annulus {
        in_annulus[x] = true;
    }
    maximal_disjoint_balls(g, &region, s)
        .into_iter()
        .filter(|small| g.ball(small.center, 3 * s).members.iter().any(|&y| in_annulus[y]))
        .map(|small| g.ball(small.center, r))
        .collect()
}

/// Largest number of balls containing a single vertex.
pub fn cover_multiplicity(g: &WeightedGraph, balls: &[Ball]) -> usize {
    let mut count = vec![0usize; g.n()];
    for b in balls {
        for &y in &b.members {
            count[y] += 1;
        }
    }
    count.into_iter().max().unwrap_or(0)
}

/// Packing bound on the overlap of [`annulus_cover`] for radius `r`.
///
/// For `r ≤ 2` a vertex lies in at most `max_x #B(x, r)` balls. Otherwise the
/// balls containing `x` have disjoint cores of radius `s` inside
/// `B(x, r + s)`, so their number is at most `max #B(x, r+s) / min #B(c, s)`.
pub fn annulus_overlap_bound(g: &WeightedGraph, r: usize) -> usize {
    let count = |x: usize, rad: usize| g.distances_from(x).iter().filter(|&&d| (d as usize) < rad).count();
    if r <= 2 {
        return (0..g.n()).map(|x| count(x, r)).max().unwrap_or(0);
    }
    let s = r / 3;
    let big = (0..g.n()).map(|x| count(x, r + s)).max().unwrap_or(0);
    let small = (0..g.n()).map(|x| count(x, s)).min().unwrap_or(1).max(1);
    big / small
}
