//! Quick invariant checks over the zoo, run by `graph-hardy selftest`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::calculus::{self, gaffney_fit, Calculus, GaffneyFamily, SpectralOracle};
use crate::covering::vitali_cover;
use crate::error::Result;
use crate::functions::VertexFunction;
use crate::graph::WeightedGraph;
use crate::hardy_bmo::{bmo_norm, molecular_decompose, validate_molecule, BmoKind, TuplePolicy};
use crate::operators::{differential, divergence, gradient, kernel, laplacian};
use crate::quadratic::{g_littlewood, lusin, lusin_space_time};
use crate::riesz::{riesz, riesz_h1_experiment};
use crate::tent::atomic_decompose;
use crate::zoo;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
    pub passed: bool,
}

fn random_mean_zero(g: &WeightedGraph, rng: &mut ChaCha8Rng) -> VertexFunction {
    let f: VertexFunction = (0..g.n()).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>().into();
    f.remove_mean(g)
}

fn check(name: &str, run: impl FnOnce() -> Result<(bool, String)>) -> Check {
    let (passed, detail) = match run() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    Check { name: name.into(), passed, detail }
}

fn kernel_laws() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    let mut negative = false;
    for g in [zoo::k2l(), zoo::lazy_cycle(16, 2.0), zoo::lazy_torus_2d(6, 4.0)] {
        let k4 = kernel(&g, 4, 64);
        let k8 = kernel(&g, 8, 64);
        let composed = k4.compose(&k4, &g);
        for x in 0..g.n() {
            for y in 0..g.n() {
                worst = worst.max((composed.get(x, y) - k8.get(x, y)).abs());
            }
        }
        worst = worst.max(k8.normalization_defect(&g)).max(k8.symmetry_defect());
        negative |= k8.min_entry() < 0.0;
    }
    Ok((worst <= 1e-12 && !negative, format!("max defect {worst:.2e}")))
}

fn operator_identities(seed: u64) -> Result<(bool, String)> {
    let g = zoo::by_name("lazy_cycle_16~1")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let f = random_mean_zero(&g, &mut rng);
        let df = differential(&g, &f);
        worst = worst.max(divergence(&g, &df).sub(&laplacian(&g, &f)).norm_inf());
        let grad = gradient(&g, &f);
        worst = worst.max((grad.norm2(&g).powi(2) - laplacian(&g, &f).inner(&g, &f)).abs());
        worst = worst.max(df.fiber_norms(&g).sub(&grad).norm_inf());
    }
    Ok((worst <= 1e-10, format!("max defect {worst:.2e}")))
}

fn spectral_vs_series(seed: u64) -> Result<(bool, String)> {
    let g = zoo::lazy_cycle(16, 2.0);
    let oracle = SpectralOracle::new(&g);
    let bounds = calculus::SpectralBounds::from_oracle(&oracle);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let f = random_mean_zero(&g, &mut rng);
        let norm = f.norm2(&g);
        let (s, op) = calculus::delta_power(&g, &f, 0.5, 1e-12, &bounds)?;
        let exact = oracle.delta_power(0.5, &f)?;
        worst = worst.max(s.sub(&exact).norm2(&g) - op.tail_bound * norm);
        let (s, op) = calculus::inv_sqrt(&g, &f, 1e-12, &bounds)?;
        let exact = oracle.delta_power(-0.5, &f)?;
        worst = worst.max(s.sub(&exact).norm2(&g) - op.tail_bound * norm);
    }
    Ok((worst <= 1e-9, format!("max excess over tail bound {worst:.2e}")))
}

fn k2l_values() -> Result<(bool, String)> {
    let g = zoo::k2l();
    let cal = Calculus::new(&g, 1e-12);
    let f0: VertexFunction = vec![1.0, -1.0].into();
    let l = lusin(&cal, &f0, 1.0, 16)?;
    let gl = g_littlewood(&cal, &f0, 1.0, 16)?;
    let r = riesz(&cal, &f0, Some(16))?;
    let err = [
        l.values.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max),
        (l.l1_norm(&g) - 4.0).abs(),
        gl.values.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max),
        (r.norms.output_l2 - 2.0).abs(),
        (r.norms.gradient_l1 / r.norms.input_h1.unwrap_or(f64::NAN) - 1.0).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Ok((err <= 1e-12, format!("max error {err:.2e}")))
}

fn tent_and_molecules(seed: u64) -> Result<(bool, String)> {
    let g = zoo::lazy_cycle(16, 2.0);
    let cal = Calculus::new(&g, 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = random_mean_zero(&g, &mut rng);
    let st = lusin_space_time(&cal, &f, 1.0, 200)?;
    let tent = atomic_decompose(&g, &st, 1e-8)?;
    let atoms_ok = tent.coefficients.iter().all(|(_, a)| a.validate(&g).is_ok());
    let d = molecular_decompose(&cal, &f, 1, 1.0, 1.0, 1.0, 1e-8)?;
    let molecules_ok = d.coefficients.iter().all(|(_, m)| validate_molecule(&cal, m).is_ok());
    Ok((
        atoms_ok && molecules_ok && tent.residual_t22 <= 1e-8 && d.l2_residual <= 1e-8,
        format!(
            "{} atoms (residual {:.2e}), {} molecules (residual {:.2e})",
            tent.len(),
            tent.residual_t22,
            d.len(),
            d.l2_residual
        ),
    ))
}

fn bmo_equivalence(seed: u64) -> Result<(bool, String)> {
    let g = zoo::lazy_cycle(16, 2.0);
    let cal = Calculus::new(&g, 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let policy = TuplePolicy { seed, ..TuplePolicy::default() };
    let mut ratios = Vec::new();
    for _ in 0..3 {
        let f = random_mean_zero(&g, &mut rng);
        let b1 = bmo_norm(&cal, &f, BmoKind::Bz1 { m: 1 }, 16, &policy)?.value;
        let b2 = bmo_norm(&cal, &f, BmoKind::Bz2 { m: 1 }, 16, &policy)?.value;
        ratios.push(b1 / b2);
    }
    let ok = ratios.iter().all(|r| (0.1..=10.0).contains(r));
    Ok((ok, format!("BZ1/BZ2 ratios {ratios:.3?}")))
}

fn riesz_chain(seed: u64) -> Result<(bool, String)> {
    let g = zoo::lazy_cycle(16, 2.0);
    let cal = Calculus::new(&g, 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let suite: Vec<(String, VertexFunction)> =
        (0..4).map(|i| (format!("random/{i}"), random_mean_zero(&g, &mut rng))).collect();
    let report = riesz_h1_experiment(&cal, &suite, 200)?;
    Ok((
        report.max_chain_defect <= 1e-10,
        format!("chain defect {:.2e}, max ratio {:.3}", report.max_chain_defect, report.max_ratio),
    ))
}

fn coverings() -> Result<(bool, String)> {
    let g = zoo::lazy_cycle(32, 2.0);
    let mut ok = true;
    for r in 1..=4 {
        let b = g.ball(0, r);
        let balls = vitali_cover(&g, &b, 4.0);
        let region = b.scaled(&g, 4.0);
        for (i, bi) in balls.iter().enumerate() {
            ok &= balls[i + 1..].iter().all(|bk| bi.members.iter().all(|y| !bk.contains(*y)));
        }
        let tripled: Vec<_> = balls.iter().map(|bi| bi.scaled(&g, 3.0)).collect();
        ok &= region.members.iter().all(|&y| tripled.iter().any(|t| t.contains(y)));
    }
    Ok((ok, "vitali disjointness and 3x cover".into()))
}

fn gaffney() -> Result<(bool, String)> {
    let g = zoo::lazy_cycle(32, 2.0);
    let bounds = calculus::SpectralBounds::for_graph(&g);
    let s_range: Vec<usize> = (1..=40).collect();
    let fit = gaffney_fit(&g, GaffneyFamily::Iterate, &[16], &[0], &s_range, 1e-12, &bounds)?;
    Ok((fit.c > 0.0 && fit.propagation_violations == 0, format!("c = {:.4}, rms {:.3}", fit.c, fit.residual_rms)))
}

/// Runs every check; `seed` drives the random inputs.
pub fn run(seed: u64) -> SelftestReport {
    let checks = vec![
        check("kernel laws", kernel_laws),
        check("operator identities", || operator_identities(seed)),
        check("spectral vs series", || spectral_vs_series(seed)),
        check("k2l analytic values", k2l_values),
        check("tent and molecular decompositions", || tent_and_molecules(seed)),
        check("bmo equivalence", || bmo_equivalence(seed)),
        check("riesz chain identity", || riesz_chain(seed)),
        check("coverings", coverings),
        check("gaffney decay", gaffney),
    ];
    let passed = checks.iter().all(|c| c.passed);
    SelftestReport { checks, passed }
}
