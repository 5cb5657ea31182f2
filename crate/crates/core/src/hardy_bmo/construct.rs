use serde::Serialize;

use super::{annulus_constant, validate_molecule, Molecule, MoleculeKind, MoleculeValue};
use crate::calculus::{Calculus, KERNEL_TOLERANCE};
use crate::error::{Error, Result};
use crate::functions::{EdgeFunction, SpaceTimeFunction, VertexFunction};
use crate::graph::WeightedGraph;
use crate::operators::{apply_p_into, differential, divergence, laplacian, laplacian_pow};
use crate::quadratic::lusin_space_time;
use crate::tent::{atomic_decompose, pi_series, pi_truncation, TentAtom, TentDecomposition};

/// Upper bound on the number of tent levels a decomposition may use.
pub const LEVEL_CAP: usize = 200_000;

/// `η = ⌈d₀/4 + ε/2 + β⌉ + M + 1`.
pub fn bz2_eta(d0: f64, eps: f64, beta: f64, m: usize) -> usize {
    (d0 / 4.0 + eps / 2.0 + beta).ceil() as usize + m + 1
}

/// `η = ⌈d₀/4 + ε/2⌉ + M + 2`.
pub fn form_eta(d0: f64, eps: f64, m: usize) -> usize {
    (d0 / 4.0 + eps / 2.0).ceil() as usize + m + 2
}

/// `((I + sΔ)/s)^M f`.
fn shifted_pow(g: &WeightedGraph, f: &[f64], s: f64, m: usize) -> VertexFunction {
    let mut cur: VertexFunction = f.to_vec().into();
    for _ in 0..m {
        let lap = laplacian(g, &cur);
        for (c, l) in cur.iter_mut().zip(lap.iter()) {
            *c = (*c + s * l) / s;
        }
    }
    cur
}

fn check_eps(eps: f64) -> Result<()> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("ε must be positive and finite, got {eps}")))
    }
}

/// Divides `b` and `a` by `C = max_j ‖b‖_{L²(C_j)} 2^{jε} V(2^jB)^{1/2}` and
/// validates. Returns the molecule and `C` (0 for a zero atom).
fn normalize(cal: &Calculus, mol: Molecule, eps: f64) -> Result<(Molecule, f64)> {
    let g = cal.graph();
    let c = annulus_constant(g, &mol.ball, &mol.b, eps);
    if c == 0.0 {
        return Ok((mol, 0.0));
    }
    if !c.is_finite() {
        return Err(Error::ValidationFailed("non-finite normalization constant".into()));
    }
    let mol = Molecule::with_ball(g, mol.kind, mol.ball, mol.b.scaled(1.0 / c), mol.a.scaled(1.0 / c));
    validate_molecule(cal, &mol).map_err(|e| Error::ValidationFailed(e.to_string()))?;
    Ok((mol, c))
}

/// `(BZ₂, M, ε)`-molecule `a = π_{η,β} A / C` from a tent atom over a ball of
/// radius `r`, with `s = r²` and
/// `b = ((I + sΔ)/s)^M Δ^{η−β−M} (I+P)^η Σ_l c_l/l^β P^{l−1} A(·, l−1)`.
pub fn make_molecule_from_tent_atom(
    cal: &Calculus,
    atom: &TentAtom,
    m: usize,
    beta: f64,
    eps: f64,
    d0: f64,
) -> Result<(Molecule, f64)> {
    check_eps(eps)?;
    let g = cal.graph();
    let eta = bz2_eta(d0, eps, beta, m);
    let r = atom.ball.radius;
    let s = r * r;
    let sum = pi_series(g, &atom.values, eta, beta);
    let sum = cal.plus_power(&sum, eta as f64)?;
    let u = cal.delta_power(&sum, eta as f64 - beta - m as f64)?;
    let a = laplacian_pow(g, &u, m);
    let b = shifted_pow(g, &u, s as f64, m);
    let kind = MoleculeKind::Bz2 { m, eps: Some(eps), s };
    let mol = Molecule::with_ball(g, kind, atom.ball.clone(), b, MoleculeValue::Vertex(a));
    normalize(cal, mol, eps)
}

/// Form molecule `a = dΔ^{-1/2} π_{η,1/2} A / C`, with
/// `b = ((I + sΔ)/s)^{M+1/2} Δ^{η−1−M} (I+P)^η Σ_l c_l/√l P^{l−1} A(·, l−1)`.
pub fn make_form_molecule_from_tent_atom(
    cal: &Calculus,
    atom: &TentAtom,
    m: usize,
    eps: f64,
    d0: f64,
) -> Result<(Molecule, f64)> {
    check_eps(eps)?;
    let g = cal.graph();
    let eta = form_eta(d0, eps, m);
    let r = atom.ball.radius;
    let s = (r * r) as f64;
    let sum = pi_series(g, &atom.values, eta, 0.5);
    let sum = cal.plus_power(&sum, eta as f64)?;
    let u = laplacian_pow(g, &sum, eta - 1 - m);
    let alpha = m as f64 + 0.5;
    let b = cal.apply_fn(|l| ((1.0 + s * (1.0 - l)) / s).powf(alpha), &u)?;
    let a = differential(g, &laplacian_pow(g, &u, m));
    let kind = MoleculeKind::Form { m, eps: Some(eps), s: r * r };
    let mol = Molecule::with_ball(g, kind, atom.ball.clone(), b, MoleculeValue::Form(a));
    normalize(cal, mol, eps)
}

#[derive(Debug, Clone)]
pub struct MolecularDecomposition {
    /// `(λ_i, a_i)`; `λ_i` already carries the normalization constant.
    pub coefficients: Vec<(f64, Molecule)>,
    pub sum_abs_lambda: f64,
    pub l1_residual: f64,
    pub l2_residual: f64,
    /// Normalization constant `C_i` of each molecule.
    pub normalizations: Vec<f64>,
    pub eta: usize,
    pub l_max: usize,
    /// `‖𝒜F‖₁` of the tent function that was decomposed, i.e. the quadratic norm.
    pub quad_norm: f64,
}

#[derive(Serialize)]
struct MoleculeSummary<'a> {
    lambda: f64,
    #[serde(flatten)]
    kind: &'a MoleculeKind,
    center: usize,
    radius: usize,
    normalization: f64,
    a_l1: f64,
}

#[derive(Serialize)]
struct DecompositionSummary<'a> {
    molecules: Vec<MoleculeSummary<'a>>,
    count: usize,
    sum_abs_lambda: f64,
    quad_norm: f64,
    l1_residual: f64,
    l2_residual: f64,
    eta: usize,
    l_max: usize,
}

impl MolecularDecomposition {
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// `Σ λ_i a_i` for vertex molecules.
    pub fn reconstruct(&self, g: &WeightedGraph) -> Result<VertexFunction> {
        let mut out = VertexFunction::zeros(g.n());
        for (lambda, mol) in &self.coefficients {
            match &mol.a {
                MoleculeValue::Vertex(a) => out.add_scaled(*lambda, a),
                MoleculeValue::Form(_) => {
                    return Err(Error::InvalidArgument("decomposition holds form molecules".into()))
                }
            }
        }
        Ok(out)
    }

    /// `Σ λ_i a_i` for form molecules.
    pub fn reconstruct_form(&self, g: &WeightedGraph) -> Result<EdgeFunction> {
        let mut out = EdgeFunction::zeros(g);
        for (lambda, mol) in &self.coefficients {
            match &mol.a {
                MoleculeValue::Form(a) => out.add_scaled(*lambda, a),
                MoleculeValue::Vertex(_) => {
                    return Err(Error::InvalidArgument("decomposition holds vertex molecules".into()))
                }
            }
        }
        Ok(out)
    }

    /// `Σ|λ_i| / ‖𝒜F‖₁`.
    pub fn ratio(&self) -> f64 {
        if self.quad_norm == 0.0 {
            0.0
        } else {
            self.sum_abs_lambda / self.quad_norm
        }
    }

    pub fn to_json(&self, g: &WeightedGraph) -> String {
        let summary = DecompositionSummary {
            molecules: self
                .coefficients
                .iter()
                .zip(&self.normalizations)
                .map(|((lambda, mol), &c)| MoleculeSummary {
                    lambda: *lambda,
                    kind: &mol.kind,
                    center: mol.ball.center,
                    radius: mol.ball.radius,
                    normalization: c,
                    a_l1: mol.a.norm1(g),
                })
                .collect(),
            count: self.len(),
            sum_abs_lambda: self.sum_abs_lambda,
            quad_norm: self.quad_norm,
            l1_residual: self.l1_residual,
            l2_residual: self.l2_residual,
            eta: self.eta,
            l_max: self.l_max,
        };
        serde_json::to_string_pretty(&summary).expect("plain data serializes")
    }
}

fn levels_for(cal: &Calculus, eta: usize, tol: f64, norm: f64) -> Result<usize> {
    let rel = (0.25 * tol / norm).min(1e-3);
    let l_max = pi_truncation(eta, cal.bounds().rho(), rel, LEVEL_CAP);
    if l_max >= LEVEL_CAP {
        return Err(Error::NonConvergent { what: "tent level truncation", achieved: f64::NAN, tol });
    }
    Ok(l_max)
}

fn empty(eta: usize) -> MolecularDecomposition {
    MolecularDecomposition {
        coefficients: Vec::new(),
        sum_abs_lambda: 0.0,
        l1_residual: 0.0,
        l2_residual: 0.0,
        normalizations: Vec::new(),
        eta,
        l_max: 0,
        quad_norm: 0.0,
    }
}

type Collected = (Vec<(f64, Molecule)>, Vec<f64>);

fn collect<F>(tent: &TentDecomposition, mut make: F) -> Result<Collected>
where
    F: FnMut(&TentAtom) -> Result<(Molecule, f64)>,
{
    let mut coefficients = Vec::with_capacity(tent.len());
    let mut normalizations = Vec::with_capacity(tent.len());
    for (lambda, atom) in &tent.coefficients {
        let (mol, c) = make(atom)?;
        if c > 0.0 {
            coefficients.push((lambda * c, mol));
            normalizations.push(c);
        }
    }
    Ok((coefficients, normalizations))
}

/// Molecular decomposition of a mean-zero `f` through
/// `F(·, l) = [(l+1)Δ]^β P^l f`, its `T¹₂` atoms `A_i` and `π_{η,β} A_i`.
pub fn molecular_decompose(
    cal: &Calculus,
    f: &VertexFunction,
    m: usize,
    beta: f64,
    eps: f64,
    d0: f64,
    tol: f64,
) -> Result<MolecularDecomposition> {
    molecular_decompose_with_levels(cal, f, m, beta, eps, d0, tol, None)
}

/// As [`molecular_decompose`], with the number of time levels fixed by the
/// caller instead of derived from `tol`.
#[allow(clippy::too_many_arguments)]
pub fn molecular_decompose_with_levels(
    cal: &Calculus,
    f: &VertexFunction,
    m: usize,
    beta: f64,
    eps: f64,
    d0: f64,
    tol: f64,
    l_max: Option<usize>,
) -> Result<MolecularDecomposition> {
    let g = cal.graph();
    f.check_len(g)?;
    check_eps(eps)?;
    if beta <= 0.0 {
        return Err(Error::InvalidArgument(format!("β must be positive, got {beta}")));
    }
    let eta = bz2_eta(d0, eps, beta, m);
    let norm = f.norm2(g);
    if norm == 0.0 {
        return Ok(empty(eta));
    }
    let relative_mean = f.relative_mean(g);
    if relative_mean > KERNEL_TOLERANCE {
        return Err(Error::KernelComponent { relative_mean });
    }
    let l_max = match l_max {
        Some(l) => l,
        None => levels_for(cal, eta, tol, norm)?,
    };
    let space_time = lusin_space_time(cal, f, beta, l_max)?;
    let tent = atomic_decompose(g, &space_time, tol)?;
    let (coefficients, normalizations) =
        collect(&tent, |atom| make_molecule_from_tent_atom(cal, atom, m, beta, eps, d0))?;
    let mut out = MolecularDecomposition {
        sum_abs_lambda: coefficients.iter().map(|c| c.0.abs()).sum(),
        coefficients,
        normalizations,
        l1_residual: 0.0,
        l2_residual: 0.0,
        eta,
        l_max,
        quad_norm: tent.t12_norm,
    };
    let residual = f.sub(&out.reconstruct(g)?);
    out.l1_residual = residual.norm1(g);
    out.l2_residual = residual.norm2(g);
    if out.l2_residual > tol {
        return Err(Error::NonConvergent { what: "molecular_decompose", achieved: out.l2_residual, tol });
    }
    Ok(out)
}

/// Form-molecule decomposition of an exact form `F = dG` through
/// `F(·, l) = √(l+1) P^l d*F`.
pub fn form_molecular_decompose(
    cal: &Calculus,
    form: &EdgeFunction,
    m: usize,
    eps: f64,
    d0: f64,
    tol: f64,
) -> Result<MolecularDecomposition> {
    let g = cal.graph();
    if form.len() != g.edge_count() {
        return Err(Error::DimensionMismatch { expected: g.edge_count(), got: form.len() });
    }
    check_eps(eps)?;
    let eta = form_eta(d0, eps, m);
    let norm = form.norm2(g);
    if norm == 0.0 {
        return Ok(empty(eta));
    }
    let div = divergence(g, form);
    let potential = cal.delta_power(&div, -1.0).map_err(|e| match e {
        Error::KernelComponent { relative_mean } => Error::NotExactForm(relative_mean),
        other => other,
    })?;
    let defect = differential(g, &potential).sub(form).norm2(g);
    if defect > tol.max(1e-10 * norm) {
        return Err(Error::NotExactForm(defect));
    }

    let l_max = levels_for(cal, eta, tol, norm)?;
    let mut levels = Vec::with_capacity(l_max + 1);
    let mut cur = div.into_vec();
    let mut next = vec![0.0; g.n()];
    for l in 0..=l_max {
        let w = ((l + 1) as f64).sqrt();
        levels.push(cur.iter().map(|v| w * v).collect());
        if l < l_max {
            apply_p_into(g, &cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
    }
    let space_time = SpaceTimeFunction::from_levels(g.n(), levels);
    let tent = atomic_decompose(g, &space_time, tol)?;
    let (coefficients, normalizations) =
        collect(&tent, |atom| make_form_molecule_from_tent_atom(cal, atom, m, eps, d0))?;
    let mut out = MolecularDecomposition {
        sum_abs_lambda: coefficients.iter().map(|c| c.0.abs()).sum(),
        coefficients,
        normalizations,
        l1_residual: 0.0,
        l2_residual: 0.0,
        eta,
        l_max,
        quad_norm: tent.t12_norm,
    };
    let residual = form.sub(&out.reconstruct_form(g)?);
    out.l1_residual = residual.norm(g, 1.0);
    out.l2_residual = residual.norm2(g);
    if out.l2_residual > tol {
        return Err(Error::NonConvergent { what: "form_molecular_decompose", achieved: out.l2_residual, tol });
    }
    Ok(out)
}
