//! One entry point for fractional powers: the oracle when it exists,
//! truncated series otherwise.

use super::series::{self, SpectralBounds};
use super::spectral::{SpectralOracle, ORACLE_LIMIT};
use crate::error::{Error, Result};
use crate::functions::VertexFunction;
use crate::graph::WeightedGraph;
use crate::operators::laplacian_pow;

pub const DEFAULT_TOL: f64 = 1e-12;

pub struct Calculus<'g> {
    g: &'g WeightedGraph,
    oracle: Option<SpectralOracle>,
    bounds: SpectralBounds,
    tol: f64,
}

impl<'g> Calculus<'g> {
    /// Builds an oracle when `n ≤ ORACLE_LIMIT`.
    pub fn new(g: &'g WeightedGraph, tol: f64) -> Self {
        if g.n() <= ORACLE_LIMIT {
            Self::with_oracle(g, SpectralOracle::new(g), tol)
        } else {
            Self::series_only(g, SpectralBounds::gapless(g), tol)
        }
    }

    pub fn with_oracle(g: &'g WeightedGraph, oracle: SpectralOracle, tol: f64) -> Self {
        let bounds = SpectralBounds::from_oracle(&oracle);
        Self { g, oracle: Some(oracle), bounds, tol }
    }

    pub fn series_only(g: &'g WeightedGraph, bounds: SpectralBounds, tol: f64) -> Self {
        Self { g, oracle: None, bounds, tol }
    }

    pub fn graph(&self) -> &'g WeightedGraph {
        self.g
    }

    pub fn oracle(&self) -> Option<&SpectralOracle> {
        self.oracle.as_ref()
    }

    pub fn bounds(&self) -> &SpectralBounds {
        &self.bounds
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// `Δ^β f` for real `β`; negative powers need a mean-zero `f`.
    pub fn delta_power(&self, f: &[f64], beta: f64) -> Result<VertexFunction> {
        if beta == 0.0 {
            return Ok(f.to_vec().into());
        }
        if beta > 0.0 && beta.fract() == 0.0 {
            return Ok(laplacian_pow(self.g, f, beta as usize));
        }
        match (&self.oracle, beta) {
            (Some(o), _) => o.delta_power(beta, f),
            (None, b) if b > 0.0 => Ok(series::delta_power(self.g, f, b, self.tol, &self.bounds)?.0),
            (None, b) if (2.0 * b).fract() == 0.0 => {
                let mut cur: VertexFunction = f.to_vec().into();
                for _ in 0..(-2.0 * b) as usize {
                    cur = series::inv_sqrt(self.g, &cur, self.tol, &self.bounds)?.0;
                }
                Ok(cur)
            }
            (None, b) => Err(Error::InvalidArgument(format!("power {b} needs the spectral oracle"))),
        }
    }

    pub fn inv_sqrt(&self, f: &[f64]) -> Result<VertexFunction> {
        self.delta_power(f, -0.5)
    }

    /// `(I + sΔ)^{-α} f`.
    pub fn resolvent_power(&self, f: &[f64], s: f64, alpha: f64) -> Result<VertexFunction> {
        match &self.oracle {
            Some(o) => Ok(o.apply(|l| (1.0 + s * (1.0 - l)).powf(-alpha), f)),
            None => Ok(series::resolvent_power(self.g, f, s, alpha, self.tol, &self.bounds)?.0),
        }
    }

    /// `φ(P) f`; needs the oracle.
    pub fn apply_fn(&self, phi: impl Fn(f64) -> f64, f: &[f64]) -> Result<VertexFunction> {
        match &self.oracle {
            Some(o) => Ok(o.apply(phi, f)),
            None => Err(Error::InvalidArgument("this operator needs the spectral oracle (graph too large)".into())),
        }
    }

    /// `(I + P)^β f`.
    pub fn plus_power(&self, f: &[f64], beta: f64) -> Result<VertexFunction> {
        match &self.oracle {
            Some(o) if beta.fract() != 0.0 => Ok(o.apply(|l| (1.0 + l).max(0.0).powf(beta), f)),
            _ => Ok(series::plus_power(self.g, f, beta, self.tol)?.0),
        }
    }
}
