//! Truncated power series in `P` with computed tail bounds.

use serde::Serialize;

use super::spectral::{SpectralOracle, KERNEL_TOLERANCE, ORACLE_LIMIT};
use crate::error::{Error, Result};
use crate::functions::VertexFunction;
use crate::graph::WeightedGraph;
use crate::operators::{apply_p_into, laplacian_pow, p_diagonal};

pub const SERIES_N_MAX: usize = 2_000_000;

/// Spectral radius information for `P` on the mean-zero subspace.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpectralBounds {
    /// Lower bound on the spectrum of `P`.
    pub lambda_min: f64,
    /// Upper bound on the spectrum of `P` restricted to mean-zero functions.
    pub lambda_second: f64,
}

impl SpectralBounds {
    pub fn from_oracle(o: &SpectralOracle) -> Self {
        Self { lambda_min: o.lambda_min(), lambda_second: o.lambda_second() }
    }

    /// From a gap `1 − λ₂` and `ε = min p(x,x) m(x)`, which gives `λ_min ≥ −1 + 2ε`.
    pub fn from_gap(gap: f64, eps_lb: f64) -> Self {
        Self { lambda_min: -1.0 + 2.0 * eps_lb, lambda_second: 1.0 - gap }
    }

    /// No gap information: only the lower bound from the loops.
    pub fn gapless(g: &WeightedGraph) -> Self {
        Self::from_gap(0.0, eps_lb(g))
    }

    /// Exact bounds from an oracle when `n ≤ ORACLE_LIMIT`, otherwise gapless.
    pub fn for_graph(g: &WeightedGraph) -> Self {
        if g.n() <= ORACLE_LIMIT {
            Self::from_oracle(&SpectralOracle::new(g))
        } else {
            Self::gapless(g)
        }
    }

    /// `‖P‖` on the mean-zero subspace.
    pub fn rho(&self) -> f64 {
        self.lambda_min.abs().max(self.lambda_second).min(1.0)
    }

    pub fn gap(&self) -> f64 {
        1.0 - self.lambda_second
    }
}

fn eps_lb(g: &WeightedGraph) -> f64 {
    p_diagonal(g).iter().enumerate().map(|(x, p)| p * g.m(x)).fold(1.0, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeriesKind {
    DeltaPow { beta: f64 },
    Resolvent { s: f64, m: usize },
    ResolventPow { s: f64, alpha: f64 },
    InvSqrt,
    Reproducing { beta: f64, n: usize },
}

/// Bookkeeping of one truncated series application.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SeriesOperator {
    pub kind: SeriesKind,
    /// Highest power of `P` used.
    pub terms: usize,
    /// Bound on the operator norm of the truncation error on the relevant subspace.
    pub tail_bound: f64,
}

/// Taylor coefficients `b_0..=b_n` of `(1 − z)^a`.
pub fn binomial_coefficients(a: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut b = 1.0;
    for k in 0..=n {
        out.push(b);
        b *= (k as f64 - a) / (k as f64 + 1.0);
    }
    out
}

/// Tail `Σ_{k>N} |b_k| z^k` for the coefficients of `(1 − z)^a`, given the
/// next coefficient `b_{N+1}` and `0 ≤ z ≤ 1`.
fn binomial_tail(a: f64, next_coeff: f64, z: f64, n: usize) -> f64 {
    if next_coeff == 0.0 {
        return 0.0;
    }
    let k = (n + 1) as f64;
    let ratio = z * ((k - a).abs() / (k + 1.0)).max(1.0);
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    next_coeff.abs() * z.powf(k) / (1.0 - ratio)
}

/// `Σ_k b_k z^k P^k f` for `(1 − z)^a`, truncated once the tail bound for
/// `‖P‖ ≤ rho` drops to `tol`.
fn binomial_series(
    g: &WeightedGraph,
    f: &[f64],
    a: f64,
    z: f64,
    rho: f64,
    tol: f64,
    what: &'static str,
) -> Result<(VertexFunction, usize, f64)> {
    let zr = z * rho;
    let mut sum = VertexFunction::zeros(g.n());
    let mut cur = f.to_vec();
    let mut next = vec![0.0; g.n()];
    let mut b = 1.0;
    let mut zk = 1.0;
    for k in 0..=SERIES_N_MAX {
        let c = b * zk;
        for (s, v) in sum.iter_mut().zip(&cur) {
            *s += c * v;
        }
        b *= (k as f64 - a) / (k as f64 + 1.0);
        let tail = binomial_tail(a, b, zr, k);
        if tail <= tol {
            return Ok((sum, k, tail));
        }
        if tail.is_infinite() && k > 64 && zr >= 1.0 {
            break;
        }
        zk *= z;
        apply_p_into(g, &cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
    }
    Err(Error::NonConvergent { what, achieved: f64::INFINITY, tol })
}

fn mean_zero(g: &WeightedGraph, f: &[f64]) -> (f64, VertexFunction) {
    let v = VertexFunction::from(f.to_vec());
    let mean = v.mean(g);
    (mean, v.remove_mean(g))
}

fn check_mean_zero(g: &WeightedGraph, f: &[f64]) -> Result<VertexFunction> {
    let v = VertexFunction::from(f.to_vec());
    let relative_mean = v.relative_mean(g);
    if relative_mean >= KERNEL_TOLERANCE {
        return Err(Error::KernelComponent { relative_mean });
    }
    Ok(v.remove_mean(g))
}

/// `Δ^β f` for `β > 0`. Integer powers are applied exactly.
pub fn delta_power(
    g: &WeightedGraph,
    f: &[f64],
    beta: f64,
    tol: f64,
    bounds: &SpectralBounds,
) -> Result<(VertexFunction, SeriesOperator)> {
    if beta.is_nan() || beta <= 0.0 {
        return Err(Error::InvalidArgument(format!("beta must be positive, got {beta}")));
    }
    let kind = SeriesKind::DeltaPow { beta };
    if beta.fract() == 0.0 {
        let k = beta as usize;
        let out = laplacian_pow(g, f, k);
        return Ok((out, SeriesOperator { kind, terms: k, tail_bound: 0.0 }));
    }
    let (_, f0) = mean_zero(g, f);
    let (out, terms, tail_bound) = binomial_series(g, &f0, beta, 1.0, bounds.rho(), tol, "delta_power")?;
    Ok((out, SeriesOperator { kind, terms, tail_bound }))
}

/// `Δ^{-1/2} f` for mean-zero `f`.
pub fn inv_sqrt(
    g: &WeightedGraph,
    f: &[f64],
    tol: f64,
    bounds: &SpectralBounds,
) -> Result<(VertexFunction, SeriesOperator)> {
    let f0 = check_mean_zero(g, f)?;
    let (out, terms, tail_bound) = binomial_series(g, &f0, -0.5, 1.0, bounds.rho(), tol, "inv_sqrt")?;
    // the truncated sum leaks a tiny mean through round-off only
    Ok((out.remove_mean(g), SeriesOperator { kind: SeriesKind::InvSqrt, terms, tail_bound }))
}

/// `(I + sΔ)^{-α} f = (1+s)^{-α} (I − qP)^{-α} f` with `q = s/(1+s)`. The
/// constant part is passed through exactly.
pub fn resolvent_power(
    g: &WeightedGraph,
    f: &[f64],
    s: f64,
    alpha: f64,
    tol: f64,
    bounds: &SpectralBounds,
) -> Result<(VertexFunction, SeriesOperator)> {
    if s.is_nan() || s <= 0.0 || alpha < 0.0 {
        return Err(Error::InvalidArgument(format!("need s > 0 and alpha >= 0, got s={s}, alpha={alpha}")));
    }
    let kind = SeriesKind::ResolventPow { s, alpha };
    let (mean, f0) = mean_zero(g, f);
    let pre = (1.0 + s).powf(-alpha);
    let q = s / (1.0 + s);
    let (mut out, terms, tail) = binomial_series(g, &f0, -alpha, q, bounds.rho(), tol / pre, "resolvent_power")?;
    for v in out.iter_mut() {
        *v = pre * *v + mean;
    }
    Ok((out, SeriesOperator { kind, terms, tail_bound: pre * tail }))
}

/// `(I + sΔ)^{-M} f` as `M` Neumann series, each truncated at `tol / M`.
pub fn resolvent(
    g: &WeightedGraph,
    f: &[f64],
    s: f64,
    m: usize,
    tol: f64,
    bounds: &SpectralBounds,
) -> Result<(VertexFunction, SeriesOperator)> {
    let mut cur: VertexFunction = f.to_vec().into();
    let mut terms = 0;
    let mut tail_bound = 0.0;
    for _ in 0..m {
        let (next, op) = resolvent_power(g, &cur, s, 1.0, tol / m as f64, bounds)?;
        cur = next;
        terms = terms.max(op.terms);
        tail_bound += op.tail_bound;
    }
    Ok((cur, SeriesOperator { kind: SeriesKind::Resolvent { s, m }, terms, tail_bound }))
}

/// `‖Σ_{k≤N} a_k Δ^β P^k f − f‖₂` with `a_k` the coefficients of `(1 − z)^{-β}`.
///
/// With `squared`, uses `(I − P²)^β` and `P^{2k}` instead.
pub fn reproducing_check(
    g: &WeightedGraph,
    f: &[f64],
    beta: f64,
    n: usize,
    squared: bool,
    tol: f64,
    bounds: &SpectralBounds,
) -> Result<f64> {
    let f0 = check_mean_zero(g, f)?;
    let a = binomial_coefficients(-beta, n);
    let step = if squared { 2 } else { 1 };
    // Σ a_k P^{step k} f by Horner
    let mut acc = VertexFunction::zeros(g.n());
    let mut tmp = vec![0.0; g.n()];
    for k in (0..=n).rev() {
        for _ in 0..step {
            apply_p_into(g, &acc, &mut tmp);
            acc.copy_from_slice(&tmp);
        }
        acc.add_scaled(a[k], &f0);
    }
    let out = if squared {
        // (I − P²)^β = Δ^β (I + P)^β
        let (plus, _, _) = plus_power(g, &acc, beta, tol)?;
        delta_power(g, &plus, beta, tol, bounds)?.0
    } else {
        delta_power(g, &acc, beta, tol, bounds)?.0
    };
    Ok(out.sub(&f0).norm2(g))
}

/// `(I + P)^β f`.
pub fn plus_power(g: &WeightedGraph, f: &[f64], beta: f64, tol: f64) -> Result<(VertexFunction, usize, f64)> {
    if beta.fract() == 0.0 && beta >= 0.0 {
        let mut cur: VertexFunction = f.to_vec().into();
        let mut tmp = vec![0.0; g.n()];
        for _ in 0..beta as usize {
            apply_p_into(g, &cur, &mut tmp);
            for (c, t) in cur.iter_mut().zip(&tmp) {
                *c += t;
            }
        }
        return Ok((cur, beta as usize, 0.0));
    }
    // (I + P)^β = 2^β (I − (I − P)/2)^β; ‖(I − P)/2‖ ≤ 1 − ε_LB
    let pre = 2f64.powf(beta);
    let half_delta = |v: &[f64], out: &mut [f64]| {
        apply_p_into(g, v, out);
        for (o, x) in out.iter_mut().zip(v) {
            *o = 0.5 * (x - *o);
        }
    };
    let r = 1.0 - eps_lb(g);
    let mut sum = VertexFunction::zeros(g.n());
    let mut cur = f.to_vec();
    let mut next = vec![0.0; g.n()];
    let mut b = 1.0;
    for k in 0..=SERIES_N_MAX {
        for (s, v) in sum.iter_mut().zip(&cur) {
            *s += pre * b * v;
        }
        b *= (k as f64 - beta) / (k as f64 + 1.0);
        let tail = pre * binomial_tail(beta, b, r, k);
        if tail <= tol {
            return Ok((sum, k, tail));
        }
        half_delta(&cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
    }
    Err(Error::NonConvergent { what: "plus_power", achieved: f64::INFINITY, tol })
}
