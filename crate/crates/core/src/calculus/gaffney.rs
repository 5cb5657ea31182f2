//! Off-diagonal (Davies–Gaffney) decay measurements and fits.

use serde::{Deserialize, Serialize};

use super::series::{resolvent, resolvent_power, SpectralBounds};
use crate::error::{Error, Result};
use crate::functions::VertexFunction;
use crate::graph::WeightedGraph;
use crate::operators::{apply_p_pow, gradient, laplacian_pow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GaffneyFamily {
    /// `P^s`
    Iterate,
    /// `(sΔ)^M P^s`
    DeltaIterate { m: usize },
    /// `(I + sΔ)^{-M}`
    Resolvent { m: usize },
    /// `(I − (I + sΔ)^{-1})^M`
    ResolventDifference { m: usize },
    /// `√s ∇ P^s`
    GradientIterate,
    /// `s^{M+1/2} ∇ Δ^M (I + sΔ)^{-M-1/2}`
    GradientResolvent { m: usize },
}

impl GaffneyFamily {
    /// Exponent of `d²/s` in the expected decay.
    pub fn eta(&self) -> f64 {
        match self {
            Self::Iterate | Self::DeltaIterate { .. } | Self::GradientIterate => 1.0,
            _ => 0.5,
        }
    }

    /// Radius of the support of `A_s f` around that of `f`, if finite.
    pub fn propagation_radius(&self, s: usize) -> Option<usize> {
        match self {
            Self::Iterate => Some(s),
            Self::DeltaIterate { m } => Some(s + m),
            Self::GradientIterate => Some(s + 1),
            _ => None,
        }
    }

    pub fn parse(name: &str, m: usize) -> Result<Self> {
        Ok(match name {
            "iterate" | "heat" | "P^s" => Self::Iterate,
            "delta_iterate" => Self::DeltaIterate { m },
            "resolvent" => Self::Resolvent { m },
            "resolvent_difference" => Self::ResolventDifference { m },
            "gradient_iterate" => Self::GradientIterate,
            "gradient_resolvent" => Self::GradientResolvent { m },
            _ => return Err(Error::InvalidArgument(format!("unknown family `{name}`"))),
        })
    }
}

/// `A_s f`; gradient families return the pointwise gradient length.
pub fn apply_family(
    g: &WeightedGraph,
    f: &[f64],
    family: GaffneyFamily,
    s: usize,
    tol: f64,
    bounds: &SpectralBounds,
) -> Result<VertexFunction> {
    let sf = s as f64;
    Ok(match family {
        GaffneyFamily::Iterate => apply_p_pow(g, f, s),
        GaffneyFamily::DeltaIterate { m } => laplacian_pow(g, &apply_p_pow(g, f, s), m).scaled(sf.powi(m as i32)),
        GaffneyFamily::Resolvent { m } => resolvent(g, f, sf, m, tol, bounds)?.0,
        GaffneyFamily::ResolventDifference { m } => super::ops::bz2_power(g, f, sf, m, tol, bounds)?,
        GaffneyFamily::GradientIterate => gradient(g, &apply_p_pow(g, f, s)).scaled(sf.sqrt()),
        GaffneyFamily::GradientResolvent { m } => {
            let (r, _) = resolvent_power(g, f, sf, m as f64 + 0.5, tol, bounds)?;
            gradient(g, &laplacian_pow(g, &r, m)).scaled(sf.powf(m as f64 + 0.5))
        }
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaffneyPoint {
    pub s: usize,
    /// `sup_f ‖A_s f‖_{L²(E)} / ‖f‖₂` over the probe functions on `F`.
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaffneyFit {
    #[serde(rename = "C")]
    pub big_c: f64,
    pub c: f64,
    pub eta: f64,
    pub residual_rms: f64,
    pub n_points: usize,
    /// Spread of the fitted `log ratio` values.
    pub signal_range: f64,
    pub distance: u32,
    /// Points with `s` below the propagation radius whose ratio is not zero.
    pub propagation_violations: usize,
    pub points: Vec<GaffneyPoint>,
}

/// Measures `‖A_s f‖_{L²(E)}/‖f‖₂` for probes `f` on `F` and fits
/// `log ratio ≈ log C − c (d(E,F)²/s)^η` with `c ≥ 0`.
#[allow(clippy::too_many_arguments)]
pub fn gaffney_fit(
    g: &WeightedGraph,
    family: GaffneyFamily,
    e_set: &[usize],
    f_set: &[usize],
    s_range: &[usize],
    tol: f64,
    bounds: &SpectralBounds,
) -> Result<GaffneyFit> {
    let in_f: std::collections::HashSet<usize> = f_set.iter().copied().collect();
    if e_set.iter().any(|x| in_f.contains(x)) {
        return Err(Error::OverlappingSets);
    }
    if e_set.is_empty() || f_set.is_empty() {
        return Err(Error::InvalidArgument("E and F must be non-empty".into()));
    }
    let d = g.set_distance(e_set, f_set);
    let n = g.n();
    let mut probes = vec![VertexFunction::indicator(n, f_set)];
    if f_set.len() > 1 {
        probes.extend(f_set.iter().take(8).map(|&y| VertexFunction::indicator(n, &[y])));
    }

    let mut points = Vec::with_capacity(s_range.len());
    let mut violations = 0;
    for &s in s_range {
        let mut ratio: f64 = 0.0;
        for p in &probes {
            let out = apply_family(g, p, family, s, tol, bounds)?;
            ratio = ratio.max(out.norm2_on(g, e_set) / p.norm2(g));
        }
        if let Some(r) = family.propagation_radius(s) {
            if r < d as usize && ratio != 0.0 {
                violations += 1;
            }
        }
        points.push(GaffneyPoint { s, ratio });
    }

    let eta = family.eta();
    let data: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.ratio > 0.0 && p.s > 0)
        .map(|p| (((d as f64).powi(2) / p.s as f64).powf(eta), p.ratio.ln()))
        .collect();
    if data.len() < 2 {
        return Err(Error::InvalidArgument("need at least two nonzero ratios to fit".into()));
    }
    let (log_c, c) = nonnegative_decay_fit(&data);
    let residual_rms =
        (data.iter().map(|&(x, y)| (y - (log_c - c * x)).powi(2)).sum::<f64>() / data.len() as f64).sqrt();
    let ys = data.iter().map(|p| p.1);
    let signal_range = ys.clone().fold(f64::NEG_INFINITY, f64::max) - ys.fold(f64::INFINITY, f64::min);
    Ok(GaffneyFit {
        big_c: log_c.exp(),
        c,
        eta,
        residual_rms,
        n_points: data.len(),
        signal_range,
        distance: d,
        propagation_violations: violations,
        points,
    })
}

/// Least squares for `y = a − c x` subject to `c ≥ 0`.
fn nonnegative_decay_fit(data: &[(f64, f64)]) -> (f64, f64) {
    let n = data.len() as f64;
    let mx = data.iter().map(|p| p.0).sum::<f64>() / n;
    let my = data.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = data.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = data.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return (my, 0.0);
    }
    let c = (-sxy / sxx).max(0.0);
    (my + c * mx, c)
}

/// Root of `8c e^{8c} = ε`.
pub fn gradient_gaffney_c(eps: f64) -> f64 {
    assert!(eps > 0.0, "epsilon must be positive");
    let h = |c: f64| 8.0 * c * (8.0 * c).exp() - eps;
    let (mut lo, mut hi) = (0.0, 1.0);
    while h(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

/// `‖∇P^k f · e^{(c/2) d(·,F)²/(k+1)}‖₂` for `f` supported in `F`.
pub fn weighted_gradient_norm(g: &WeightedGraph, f: &[f64], f_set: &[usize], k: usize, c: f64) -> f64 {
    let dist = g.bfs(f_set);
    let grad = gradient(g, &apply_p_pow(g, f, k));
    let weighted: VertexFunction = grad
        .iter()
        .zip(&dist)
        .map(|(v, &d)| v * (0.5 * c * (d as f64).powi(2) / (k as f64 + 1.0)).exp())
        .collect::<Vec<_>>()
        .into();
    weighted.norm2(g)
}
