//! Averages `Q_s` and the cancellative operators behind molecules.

use serde::{Deserialize, Serialize};

use super::series::{resolvent, SpectralBounds};
use crate::error::{Error, Result};
use crate::functions::VertexFunction;
use crate::graph::WeightedGraph;
use crate::operators::{apply_p_into, apply_p_pow};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MoleculeOperator {
    /// `(I − P^{s_1}) … (I − P^{s_M})` with every `s_i ∈ [s, 2s]`.
    Bz1 { s: usize, tuple: Vec<usize> },
    /// `[I − (I + sΔ)^{-1}]^M`.
    Bz2 { s: usize, m: usize },
    /// `Q_s = (1/s) Σ_{k<s} P^k`.
    Qs { s: usize },
}

pub fn check_tuple(tuple: &[usize], lo: usize, hi: usize) -> Result<()> {
    for &v in tuple {
        if v < lo || v > hi {
            return Err(Error::BadTuple { value: v, lo, hi });
        }
    }
    Ok(())
}

/// `Q_s f`.
pub fn average(g: &WeightedGraph, f: &[f64], s: usize) -> VertexFunction {
    assert!(s >= 1, "Q_s needs s >= 1");
    let mut sum: VertexFunction = f.to_vec().into();
    let mut cur = f.to_vec();
    let mut next = vec![0.0; g.n()];
    for _ in 1..s {
        apply_p_into(g, &cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
        for (a, v) in sum.iter_mut().zip(&cur) {
            *a += v;
        }
    }
    sum.scaled(1.0 / s as f64)
}

/// `(I − P^{s_1}) … (I − P^{s_M}) f`.
pub fn bz1_product(g: &WeightedGraph, f: &[f64], tuple: &[usize]) -> VertexFunction {
    let mut cur: VertexFunction = f.to_vec().into();
    for &t in tuple {
        let pt = apply_p_pow(g, &cur, t);
        cur = cur.sub(&pt);
    }
    cur
}

/// `[I − (I + sΔ)^{-1}]^M f`.
pub fn bz2_power(
    g: &WeightedGraph,
    f: &[f64],
    s: f64,
    m: usize,
    tol: f64,
    bounds: &SpectralBounds,
) -> Result<VertexFunction> {
    let mut cur: VertexFunction = f.to_vec().into();
    for _ in 0..m {
        let (r, _) = resolvent(g, &cur, s, 1, tol / m.max(1) as f64, bounds)?;
        cur = cur.sub(&r);
    }
    Ok(cur)
}

/// Applies the operator; `BadTuple` if some `s_i ∉ [s, 2s]`.
pub fn apply_molecule_operator(
    g: &WeightedGraph,
    f: &[f64],
    op: &MoleculeOperator,
    tol: f64,
    bounds: &SpectralBounds,
) -> Result<VertexFunction> {
    match op {
        MoleculeOperator::Bz1 { s, tuple } => {
            check_tuple(tuple, *s, 2 * s)?;
            Ok(bz1_product(g, f, tuple))
        }
        MoleculeOperator::Bz2 { s, m } => bz2_power(g, f, *s as f64, *m, tol, bounds),
        MoleculeOperator::Qs { s } => {
            if *s == 0 {
                return Err(Error::InvalidArgument("Q_s needs s >= 1".into()));
            }
            Ok(average(g, f, *s))
        }
    }
}

/// `‖[I − (I+sΔ)^{-1}]^M f − (sΔ)^M (I+sΔ)^{-M} f‖₂`.
pub fn bz2_identity_defect(
    g: &WeightedGraph,
    f: &[f64],
    s: f64,
    m: usize,
    tol: f64,
    bounds: &SpectralBounds,
) -> Result<f64> {
    let lhs = bz2_power(g, f, s, m, tol, bounds)?;
    let (r, _) = resolvent(g, f, s, m, tol, bounds)?;
    let rhs = crate::operators::laplacian_pow(g, &r, m).scaled(s.powi(m as i32));
    Ok(lhs.sub(&rhs).norm2(g))
}
