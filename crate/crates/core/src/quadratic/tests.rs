use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::calculus::{bz1_product, SpectralOracle};
use crate::operators::{apply_p_pow, differential};
use crate::zoo;

fn random_fn(g: &WeightedGraph, seed: u64) -> VertexFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..g.n()).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>().into()
}

fn ceil_sqrt(v: usize) -> usize {
    (0..).find(|r: &usize| r * r >= v).unwrap()
}

/// Triple loop over apex, level and vertex, straight from the definition.
fn naive_lusin(g: &WeightedGraph, o: &SpectralOracle, f: &[f64], beta: f64, l_max: usize) -> Vec<f64> {
    let h = o.delta_power(beta, f).unwrap();
    (0..g.n())
        .map(|x| {
            let mut s = 0.0;
            for l in 0..=l_max {
                let u = apply_p_pow(g, &h, l);
                let v = g.ball_volume(x, ceil_sqrt(l + 1));
                for y in 0..g.n() {
                    let d = g.distance(x, y) as usize;
                    if d * d <= l {
                        s += ((l + 1) as f64).powf(2.0 * beta - 1.0) / v * u[y] * u[y] * g.m(y);
                    }
                }
            }
            s.sqrt()
        })
        .collect()
}

fn naive_tent(g: &WeightedGraph, f: &SpaceTimeFunction) -> Vec<f64> {
    (0..g.n())
        .map(|x| {
            let mut s = 0.0;
            for k in 0..=f.l_max() {
                for y in 0..g.n() {
                    let d = g.distance(x, y) as usize;
                    if d * d <= k {
                        let v = g.ball_volume(x, ceil_sqrt(k + 1));
                        s += g.m(y) / ((k + 1) as f64 * v) * f.get(y, k).powi(2);
                    }
                }
            }
            s.sqrt()
        })
        .collect()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn k2l_hand_values() {
    let g = zoo::k2l();
    let cal = Calculus::new(&g, 1e-14);
    let f0 = [1.0, -1.0];
    let l = lusin(&cal, &f0, 1.0, 8).unwrap();
    assert!(max_diff(&l.values, &[1.0, 1.0]) < 1e-12);
    assert!((l.l1_norm(&g) - 4.0).abs() < 1e-12);
    let gl = g_littlewood(&cal, &f0, 1.0, 8).unwrap();
    assert!(max_diff(&gl.values, &[1.0, 1.0]) < 1e-12);
    // the k = 0 term carries the factor (0²Δ)^β = 0 and P^{k²} f₀ = 0 for k ≥ 1
    let lt = lusin_tilde(&cal, &f0, 1.0, 4).unwrap();
    assert!(lt.values.norm_inf() < 1e-12);
    let form = differential(&g, &f0);
    assert!((quad_norm_forms(&cal, &form, 1.0, 8).unwrap() - 4.0).abs() < 1e-12);
    assert_eq!(quad_norm_forms(&cal, &EdgeFunction::zeros(&g), 1.0, 8).unwrap(), 0.0);

    let mut f = SpaceTimeFunction::zeros(2, 3);
    f.set(0, 0, 1.0);
    assert_eq!(tent_functional(&g, &f).to_vec(), vec![1.0, 0.0]);
    assert_eq!(tent_functional(&g, &SpaceTimeFunction::zeros(2, 3)).to_vec(), vec![0.0, 0.0]);
}

#[test]
fn constants_vanish() {
    let g = zoo::lazy_cycle(10, 2.0);
    let cal = Calculus::new(&g, 1e-13);
    let c = vec![2.5; g.n()];
    for beta in [0.5, 1.0, 2.0] {
        assert!(lusin(&cal, &c, beta, 20).unwrap().values.norm_inf() < 1e-12);
        assert!(lusin_tilde(&cal, &c, beta, 5).unwrap().values.norm_inf() < 1e-12);
        assert!(g_littlewood(&cal, &c, beta, 20).unwrap().values.norm_inf() < 1e-12);
    }
}

#[test]
fn block_index() {
    for l in 0..2000 {
        let r = block_of(l);
        assert!(r * r <= l && l < (r + 1) * (r + 1));
        assert_eq!(ceil_sqrt(l + 1), r + 1);
    }
}

#[test]
fn matches_naive_on_cycle() {
    let g = zoo::lazy_cycle(16, 2.0);
    let o = SpectralOracle::new(&g);
    let cal = Calculus::with_oracle(&g, o.clone(), 1e-13);
    for seed in 0..5 {
        let f = random_fn(&g, seed);
        for beta in [0.5, 1.0] {
            let fast = lusin(&cal, &f, beta, 70).unwrap();
            let slow = naive_lusin(&g, &o, &f, beta, 70);
            assert!(max_diff(&fast.values, &slow) < 1e-12);
        }
        let st = lusin_space_time(&cal, &f, 1.0, 40).unwrap();
        assert!(max_diff(&tent_functional(&g, &st), &lusin(&cal, &f, 1.0, 40).unwrap().values) < 1e-12);
        assert!(max_diff(&tent_functional(&g, &st), &naive_tent(&g, &st)) < 1e-12);
    }
}

#[test]
fn truncation_tail_is_honest() {
    let g = zoo::lazy_cycle(12, 2.0);
    let cal = Calculus::new(&g, 1e-13);
    let f = random_fn(&g, 3);
    let long = lusin(&cal, &f, 1.0, 4000).unwrap();
    for l_max in [37, 100, 300] {
        let short = lusin(&cal, &f, 1.0, l_max).unwrap();
        for x in 0..g.n() {
            let gap = long.values[x].powi(2) - short.values[x].powi(2);
            assert!(gap >= -1e-12 && gap <= short.tail_bound + 1e-12);
        }
    }
    let l = default_l_max(&cal, 1.0, 1e-10, 100_000);
    assert!(l >= saturating_l_max(&g));
    assert!(lusin(&cal, &f, 1.0, l).unwrap().tail_bound <= 1e-10 * f.norm2(&g).powi(2) * 4.0);
}

#[test]
fn littlewood_paley_is_l2_bounded() {
    let g = zoo::lazy_cycle(16, 2.0);
    let cal = Calculus::new(&g, 1e-13);
    let mut ratios = Vec::new();
    for seed in 0..100 {
        let f = random_fn(&g, seed).remove_mean(&g);
        let gf = g_littlewood(&cal, &f, 1.0, 3000).unwrap();
        ratios.push(gf.values.norm2(&g) / f.norm2(&g));
    }
    // Σ_l l |λ^{l-1}(1−λ)|² ≤ 1 on [0,1], so the ratio is at most 1
    assert!(ratios.iter().all(|&r| r <= 1.0 + 1e-9), "{ratios:?}");
}

#[test]
fn exact_forms_identity() {
    let g = zoo::lazy_cycle(16, 2.0);
    let cal = Calculus::new(&g, 1e-13);
    for seed in 0..5 {
        let u = random_fn(&g, seed);
        let form = differential(&g, &u);
        let lhs = quad_norm_forms(&cal, &form, 1.0, 300).unwrap();
        let h = cal.inv_sqrt(&divergence(&g, &form)).unwrap();
        let rhs = lusin(&cal, &h, 1.0, 300).unwrap().l1_norm(&g);
        assert!((lhs - rhs).abs() < 1e-10);
        // Δ^{-1/2} d* d u = Δ^{1/2} u
        let half = cal.delta_power(&u, 0.5).unwrap();
        assert!(h.sub(&half).norm_inf() < 1e-10);
    }
}

#[test]
fn tilde_and_plain_are_comparable() {
    let mut ratios = Vec::new();
    for g in [zoo::lazy_cycle(16, 2.0), zoo::lazy_torus_2d(6, 4.0), zoo::lazy_path(12, 2.0)] {
        let cal = Calculus::new(&g, 1e-13);
        for seed in 0..10 {
            let f = random_fn(&g, seed).remove_mean(&g);
            let a = lusin(&cal, &f, 1.0, 2000).unwrap().l1_norm(&g);
            let b = lusin_tilde(&cal, &f, 1.0, 45).unwrap().l1_norm(&g);
            ratios.push(b / a);
        }
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    assert!(lo > 0.0 && hi / lo < 20.0, "{lo} {hi}");
}

#[test]
fn off_diagonal_decay_of_lusin() {
    let g = zoo::lazy_torus_2d(24, 4.0);
    let cal = Calculus::new(&g, 1e-12);
    let n = 24;
    let f = VertexFunction::indicator(g.n(), &[0]);
    let e: Vec<usize> = (0..g.n())
        .filter(|&x| {
            let (i, j) = (x / n, x % n);
            i.min(n - i) + j.min(n - j) >= 10
        })
        .collect();
    let d = g.set_distance(&e, &[0]) as f64;
    for m in [1usize, 2] {
        let mut pts = Vec::new();
        for s in [1usize, 2, 3, 4] {
            let a = bz1_product(&g, &f, &vec![s; m]);
            let l = lusin(&cal, &a, 1.0, 600).unwrap();
            let on_e = l.values.norm2_on(&g, &e) / f.norm2(&g);
            pts.push(((1.0 + d * d / s as f64).ln(), on_e.ln()));
        }
        let slope = -(pts[0].1 - pts[3].1) / (pts[0].0 - pts[3].0);
        assert!(slope >= m as f64 - 0.25, "M={m}: exponent {slope}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn homogeneity(seed in any::<u64>(), c in -5.0f64..5.0, beta in 0.3f64..2.0) {
        let g = zoo::lazy_cycle(12, 2.0);
        let cal = Calculus::new(&g, 1e-13);
        let f = random_fn(&g, seed);
        let a = lusin(&cal, &f, beta, 60).unwrap().values;
        let b = lusin(&cal, &f.scaled(c), beta, 60).unwrap().values;
        for x in 0..g.n() {
            prop_assert!((b[x] - c.abs() * a[x]).abs() <= 1e-10 * (1.0 + a[x]));
        }
    }

    #[test]
    fn tent_matches_naive(seed in any::<u64>(), l_max in 0usize..30) {
        let g = zoo::lazy_cycle(10, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let levels = (0..=l_max)
            .map(|_| (0..g.n()).map(|_| if rng.gen_bool(0.3) { rng.gen_range(-1.0..1.0) } else { 0.0 }).collect())
            .collect();
        let f = SpaceTimeFunction::from_levels(g.n(), levels);
        prop_assert!(max_diff(&tent_functional(&g, &f), &naive_tent(&g, &f)) < 1e-12);
    }
}
