use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::operators::apply_p;
use crate::quadratic::lusin_space_time;
use crate::zoo;

fn random_mean_zero(g: &WeightedGraph, seed: u64) -> VertexFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f: VertexFunction = (0..g.n()).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>().into();
    f.remove_mean(g)
}

/// Tent membership from pairwise distances only.
fn naive_tent(g: &WeightedGraph, b: &Ball, l_max: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for k in 0..=l_max {
        for y in 0..g.n() {
            if !b.contains(y) {
                continue;
            }
            let d = (0..g.n()).filter(|z| !b.contains(*z)).map(|z| g.distance(y, z) as usize).min();
            if d.is_none_or(|d| d * d > k) {
                out.push((y, k));
            }
        }
    }
    out
}

#[test]
fn tent_examples() {
    let g = zoo::k2l();
    assert_eq!(tent(&g, &g.ball(0, 1), 5), vec![(0, 0)]);
    let whole = g.ball(0, 2);
    assert_eq!(tent(&g, &whole, 2).len(), 6);
    let g = zoo::lazy_cycle(16, 2.0);
    for r in 1..=9 {
        let b = g.ball(0, r);
        assert_eq!(tent(&g, &b, 40), naive_tent(&g, &b, 40));
    }
    let b = g.ball(0, 3);
    // d(0, Bᶜ) = 3, d(±1, Bᶜ) = 2, d(±2, Bᶜ) = 1
    assert_eq!(tent(&g, &b, 100).len(), 9 + 2 * 4 + 2);
}

#[test]
fn atom_validation() {
    let g = zoo::lazy_cycle(16, 2.0);
    let ball = g.ball(0, 3);
    let mut values = SpaceTimeFunction::zeros(g.n(), 8);
    values.set(0, 8, 1.0);
    values.set(1, 2, -0.5);
    let norm = values.t22_norm(&g);
    let scale = 1.0 / (norm * ball.volume.sqrt());
    let atom = TentAtom { ball: ball.clone(), values: values.scaled(scale), t22_norm: 1.0 / ball.volume.sqrt() };
    atom.validate(&g).unwrap();
    let loud = TentAtom { values: values.scaled(scale * 1.001), ..atom.clone() };
    assert!(loud.validate(&g).is_err());
    let mut outside = atom.values.clone();
    outside.set(1, 4, 1e-9);
    let bad = TentAtom { values: outside, ..atom };
    assert!(bad.validate(&g).is_err());
}

#[test]
fn zero_function() {
    let g = zoo::lazy_cycle(8, 2.0);
    let d = atomic_decompose(&g, &SpaceTimeFunction::zeros(8, 5), 1e-12).unwrap();
    assert!(d.is_empty());
    assert_eq!(d.residual_t22, 0.0);
}

#[test]
fn single_atom_is_one_atom() {
    let g = zoo::lazy_cycle(32, 2.0);
    let ball = g.ball(10, 4);
    let mut values = SpaceTimeFunction::zeros(g.n(), 15);
    for (y, k) in tent(&g, &ball, 15) {
        values.set(y, k, 1.0 + (y + k) as f64 * 0.1);
    }
    let s = 1.0 / (values.t22_norm(&g) * ball.volume.sqrt());
    let atom = values.scaled(s);
    let d = atomic_decompose(&g, &atom, 1e-12).unwrap();
    for (_, a) in &d.coefficients {
        a.validate(&g).unwrap();
    }
    assert!(d.residual_t22 < 1e-14);
    assert!(d.sum_abs_lambda < 10.0, "{}", d.sum_abs_lambda);
}

#[test]
fn lusin_pipeline_round_trip() {
    let g = zoo::lazy_cycle(32, 2.0);
    let cal = Calculus::new(&g, 1e-13);
    let mut ratios = Vec::new();
    for seed in 0..8 {
        let f = random_mean_zero(&g, seed);
        let st = lusin_space_time(&cal, &f, 1.0, 400).unwrap();
        let d = atomic_decompose(&g, &st, 1e-8).unwrap();
        for (_, a) in &d.coefficients {
            a.validate(&g).unwrap();
        }
        let back = d.reconstruct(g.n(), st.l_max());
        assert!(st.sub(&back).t22_norm(&g) <= 1e-8);
        ratios.push(d.ratio());
        let json: serde_json::Value = serde_json::from_str(&d.to_json()).unwrap();
        assert_eq!(json["atoms"].as_array().unwrap().len(), d.len());
    }
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(hi / lo <= 20.0, "{ratios:?}");
}

#[test]
fn pi_coefficient_examples() {
    assert_eq!(pi_coefficients(1, 5), vec![1.0; 5]);
    assert_eq!(pi_coefficients(3, 4), vec![1.0, 3.0, 6.0, 10.0]);
}

#[test]
fn pi_single_level() {
    let g = zoo::lazy_cycle(10, 2.0);
    let cal = Calculus::new(&g, 1e-13);
    let f = random_mean_zero(&g, 1);
    let st = SpaceTimeFunction::from_levels(g.n(), vec![f.to_vec()]);
    let v = pi_synthesis(&cal, &st, 1, 1.0).unwrap();
    let expected = f.add(&apply_p(&g, &f));
    assert!(v.sub(&expected).norm_inf() < 1e-12);
}

#[test]
fn pi_reproduces_functions() {
    let g = zoo::lazy_cycle(16, 2.0);
    let cal = Calculus::new(&g, 1e-13);
    let rho = cal.bounds().rho();
    for (eta, beta) in [(1usize, 1.0), (3, 1.0), (4, 0.5), (2, 1.5)] {
        let l_max = pi_truncation(eta, rho, 1e-9, 1_000_000);
        for seed in 0..3 {
            let f = random_mean_zero(&g, seed);
            let st = lusin_space_time(&cal, &f, beta, l_max).unwrap();
            let back = pi_synthesis(&cal, &st, eta, beta).unwrap();
            assert!(back.sub(&f).norm2(&g) <= 1e-6 * f.norm2(&g), "eta={eta} beta={beta}");
        }
    }
}

#[test]
fn truncation_matches_spectral_defect() {
    let g = zoo::lazy_cycle(12, 2.0);
    let cal = Calculus::new(&g, 1e-13);
    let rho = cal.bounds().rho();
    let eta = 3;
    let l_max = pi_truncation(eta, rho, 1e-6, 1_000_000);
    let c = pi_coefficients(eta, l_max + 1);
    let partial = |l: f64| (1.0 - l * l).powi(eta as i32) * c.iter().rev().fold(0.0, |a, ci| a * l * l + ci);
    let defect =
        cal.oracle().unwrap().eigenvalues()[..g.n() - 1].iter().map(|&l| (1.0 - partial(l)).abs()).fold(0.0, f64::max);
    assert!(defect <= 1e-6);
    let c2 = pi_coefficients(eta, l_max / 2);
    let partial2 = |l: f64| (1.0 - l * l).powi(eta as i32) * c2.iter().rev().fold(0.0, |a, ci| a * l * l + ci);
    assert!((1.0 - partial2(rho)).abs() > 1e-6);
}

#[test]
fn pi_is_bounded() {
    let g = zoo::lazy_cycle(16, 2.0);
    let cal = Calculus::new(&g, 1e-13);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let levels = (0..60).map(|_| (0..g.n()).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let st = SpaceTimeFunction::from_levels(g.n(), levels);
        let v = pi_synthesis(&cal, &st, 2, 1.0).unwrap();
        worst = worst.max(v.norm2(&g) / st.t22_norm(&g));
    }
    assert!(worst.is_finite() && worst < 50.0, "{worst}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sparse_round_trip(seed in any::<u64>(), density in 0.05f64..0.6, l_max in 0usize..40) {
        let g = zoo::random_weights(&zoo::lazy_cycle(24, 2.0), seed % 7, (0.5, 2.0));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let levels = (0..=l_max)
            .map(|_| (0..g.n()).map(|_| if rng.gen_bool(density) { rng.gen_range(-2.0..2.0) } else { 0.0 }).collect())
            .collect();
        let f = SpaceTimeFunction::from_levels(g.n(), levels);
        let d = atomic_decompose(&g, &f, 1e-10).unwrap();
        for (_, a) in &d.coefficients {
            a.validate(&g).unwrap();
        }
        prop_assert!(d.residual_t22 <= 1e-12 * (1.0 + f.t22_norm(&g)));
        let with_more_levels = grow(&f, 2 * l_max + 1);
        let d2 = atomic_decompose(&g, &with_more_levels, 1e-10).unwrap();
        prop_assert!(d2.residual_t22 <= d.residual_t22 + 1e-14);
    }
}
