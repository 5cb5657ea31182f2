//! Molecules of the three kinds, molecular decompositions, BMO norms, the
//! `𝓜₀^{M,ε}` norm and the H¹–BMO pairing.

use serde::{Deserialize, Serialize};

use crate::calculus::{bz1_product, check_tuple, Calculus};
use crate::error::{Error, Result};
use crate::functions::{EdgeFunction, VertexFunction};
use crate::graph::{Ball, WeightedGraph};
use crate::operators::{differential, laplacian_pow};

mod bmo;
mod construct;

pub use bmo::{
    bmo_norm, bz1_via_bz2_defect, duality_pairing, m0_norm, m0_norm_of_preimage, BmoArgmax, BmoKind, BmoReport,
    TuplePolicy,
};
pub use construct::{
    bz2_eta, form_eta, form_molecular_decompose, make_form_molecule_from_tent_atom, make_molecule_from_tent_atom,
    molecular_decompose, molecular_decompose_with_levels, MolecularDecomposition,
};

/// Relative tolerance of the factorization check.
pub const FACTORIZATION_TOL: f64 = 1e-9;
const SIZE_SLACK: f64 = 1e-9;

/// `eps: None` marks an atom (support in `B`, `‖b‖₂ ≤ V(B)^{-1/2}`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MoleculeKind {
    /// `a = (I − P^{s_1}) … (I − P^{s_M}) b`.
    Bz1 { m: usize, eps: Option<f64>, s: usize, tuple: Vec<usize> },
    /// `a = [I − (I + sΔ)^{-1}]^M b`.
    Bz2 { m: usize, eps: Option<f64>, s: usize },
    /// `a = s^{M+1/2} dΔ^M (I + sΔ)^{-M-1/2} b`.
    Form { m: usize, eps: Option<f64>, s: usize },
}

impl MoleculeKind {
    pub fn s(&self) -> usize {
        match self {
            Self::Bz1 { s, .. } | Self::Bz2 { s, .. } | Self::Form { s, .. } => *s,
        }
    }

    pub fn m(&self) -> usize {
        match self {
            Self::Bz1 { m, .. } | Self::Bz2 { m, .. } | Self::Form { m, .. } => *m,
        }
    }

    pub fn eps(&self) -> Option<f64> {
        match self {
            Self::Bz1 { eps, .. } | Self::Bz2 { eps, .. } | Self::Form { eps, .. } => *eps,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Bz1 { .. } => "bz1",
            Self::Bz2 { .. } => "bz2",
            Self::Form { .. } => "form",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MoleculeValue {
    Vertex(VertexFunction),
    Form(EdgeFunction),
}

impl MoleculeValue {
    /// `x ↦ |a(x)|`, the fiber norm for forms.
    pub fn pointwise(&self, g: &WeightedGraph) -> VertexFunction {
        match self {
            Self::Vertex(f) => f.iter().map(|v| v.abs()).collect::<Vec<_>>().into(),
            Self::Form(f) => f.fiber_norms(g),
        }
    }

    pub fn norm1(&self, g: &WeightedGraph) -> f64 {
        self.pointwise(g).norm1(g)
    }

    pub fn norm2(&self, g: &WeightedGraph) -> f64 {
        match self {
            Self::Vertex(f) => f.norm2(g),
            Self::Form(f) => f.norm2(g),
        }
    }

    fn scaled(&self, c: f64) -> Self {
        match self {
            Self::Vertex(f) => Self::Vertex(f.scaled(c)),
            Self::Form(f) => Self::Form(f.scaled(c)),
        }
    }

    fn sub_norm2(&self, g: &WeightedGraph, other: &Self) -> Result<f64> {
        match (self, other) {
            (Self::Vertex(x), Self::Vertex(y)) => Ok(x.sub(y).norm2(g)),
            (Self::Form(x), Self::Form(y)) => Ok(x.sub(y).norm2(g)),
            _ => Err(Error::InvalidArgument("molecule value type does not match its kind".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Molecule {
    pub kind: MoleculeKind,
    /// Radius `⌈√s⌉`.
    pub ball: Ball,
    pub b: VertexFunction,
    pub a: MoleculeValue,
    /// `‖b‖_{L²(C_j(B))}` for `j = 1..` until the annuli cover the graph.
    pub annulus_profile: Vec<f64>,
}

pub(crate) fn ceil_sqrt(s: usize) -> usize {
    let mut r = (s as f64).sqrt() as usize;
    while r * r < s {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= s {
        r -= 1;
    }
    r
}

/// `‖u‖_{L²(C_j(B))}` for every annulus, with `V(2^j B)`.
fn annulus_norms(g: &WeightedGraph, ball: &Ball, u: &VertexFunction) -> Vec<(f64, f64)> {
    let j_max = g.covering_annulus_count(ball);
    g.annuli(ball, j_max)
        .into_iter()
        .map(|ann| {
            let dil = ball.radius.saturating_mul(1usize << ann.j.min(62));
            (u.norm2_on(g, &ann.members), g.ball_volume(ball.center, dil))
        })
        .collect()
}

/// `max_j ‖u‖_{L²(C_j(B))} 2^{jε} V(2^j B)^{1/2}`.
pub(crate) fn annulus_constant(g: &WeightedGraph, ball: &Ball, u: &VertexFunction, eps: f64) -> f64 {
    annulus_norms(g, ball, u)
        .into_iter()
        .enumerate()
        .map(|(i, (norm, vol))| norm * 2f64.powf((i + 1) as f64 * eps) * vol.sqrt())
        .fold(0.0, f64::max)
}

impl Molecule {
    /// Builds the molecule, taking the ball `B(center, ⌈√s⌉)` and filling in
    /// the annulus profile of `b`.
    pub fn new(g: &WeightedGraph, kind: MoleculeKind, center: usize, b: VertexFunction, a: MoleculeValue) -> Self {
        let ball = g.ball(center, ceil_sqrt(kind.s()).max(1));
        Self::with_ball(g, kind, ball, b, a)
    }

    pub(crate) fn with_ball(
        g: &WeightedGraph,
        kind: MoleculeKind,
        ball: Ball,
        b: VertexFunction,
        a: MoleculeValue,
    ) -> Self {
        let annulus_profile = annulus_norms(g, &ball, &b).into_iter().map(|p| p.0).collect();
        Self { kind, ball, b, a, annulus_profile }
    }

    /// Recomputes `a` from `b` with the operator of the kind.
    pub fn apply_operator(&self, cal: &Calculus) -> Result<MoleculeValue> {
        let g = cal.graph();
        match &self.kind {
            MoleculeKind::Bz1 { tuple, .. } => Ok(MoleculeValue::Vertex(bz1_product(g, &self.b, tuple))),
            MoleculeKind::Bz2 { m, s, .. } => {
                let r = cal.resolvent_power(&self.b, *s as f64, *m as f64)?;
                let lhs = laplacian_pow(g, &r, *m).scaled((*s as f64).powi(*m as i32));
                Ok(MoleculeValue::Vertex(lhs))
            }
            MoleculeKind::Form { m, s, .. } => {
                let alpha = *m as f64 + 0.5;
                let r = cal.resolvent_power(&self.b, *s as f64, alpha)?;
                let u = laplacian_pow(g, &r, *m);
                Ok(MoleculeValue::Form(differential(g, &u).scaled((*s as f64).powf(alpha))))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    /// `‖a − T b‖₂ / max(‖a‖₂, ‖b‖₂)`.
    pub factorization_defect: f64,
    /// `max_j ‖b‖_{L²(C_j)} / (2^{-jε} V(2^jB)^{-1/2})`, or `‖b‖₂ V(B)^{1/2}`
    /// for atoms; at most 1 on success.
    pub size_ratio: f64,
    /// Measured constant in `‖a‖₁ ≤ C`.
    pub a_l1: f64,
    /// `max_j ‖a‖_{L²(C_j)} 2^{jε} V(2^jB)^{1/2}` (`ε = 0` for atoms).
    pub a_annulus_constant: f64,
    pub warnings: Vec<String>,
}

/// Checks the factorization to relative `1e-9`, the size condition on `b`,
/// and measures the `L¹` and annulus constants of `a`.
pub fn validate_molecule(cal: &Calculus, mol: &Molecule) -> Result<ValidationReport> {
    let g = cal.graph();
    mol.b.check_len(g)?;
    let mut warnings = Vec::new();
    let s = mol.kind.s();
    if s == 0 {
        return Err(Error::InvalidArgument("molecule scale s must be at least 1".into()));
    }
    if mol.ball.radius != ceil_sqrt(s) {
        warnings.push(format!("ball radius {} differs from ⌈√s⌉ = {}", mol.ball.radius, ceil_sqrt(s)));
    }
    if let MoleculeKind::Bz1 { m, eps, tuple, .. } = &mol.kind {
        if tuple.len() != *m {
            return Err(Error::InvalidArgument(format!("tuple has {} entries, M = {m}", tuple.len())));
        }
        if eps.is_some() {
            check_tuple(tuple, s, 2 * s)?;
        } else if check_tuple(tuple, s, 2 * s).is_err() {
            check_tuple(tuple, 1, (2 * s).max(*m))?;
            warnings.push(format!("atom tuple {tuple:?} outside [{s}, {}]", 2 * s));
        }
    }

    let recomputed = mol.apply_operator(cal)?;
    let scale = mol.a.norm2(g).max(mol.b.norm2(g));
    let diff = mol.a.sub_norm2(g, &recomputed)?;
    let factorization_defect = if scale == 0.0 { diff } else { diff / scale };
    if factorization_defect > FACTORIZATION_TOL {
        return Err(Error::FactorizationMismatch(factorization_defect));
    }

    let size_ratio = match mol.kind.eps() {
        None => {
            let outside: Vec<usize> = (0..g.n()).filter(|&y| !mol.ball.contains(y)).collect();
            let out_norm = mol.b.norm2_on(g, &outside);
            if out_norm > 0.0 {
                return Err(Error::SizeBoundViolated { j: 1, measured: out_norm, bound: 0.0 });
            }
            let ratio = mol.b.norm2(g) * mol.ball.volume.sqrt();
            if ratio > 1.0 + SIZE_SLACK {
                return Err(Error::SizeBoundViolated {
                    j: 0,
                    measured: mol.b.norm2(g),
                    bound: mol.ball.volume.powf(-0.5),
                });
            }
            ratio
        }
        Some(eps) => {
            let mut worst: f64 = 0.0;
            for (i, (norm, vol)) in annulus_norms(g, &mol.ball, &mol.b).into_iter().enumerate() {
                let j = i + 1;
                let bound = 2f64.powf(-(j as f64) * eps) / vol.sqrt();
                if norm > bound * (1.0 + SIZE_SLACK) {
                    return Err(Error::SizeBoundViolated { j, measured: norm, bound });
                }
                worst = worst.max(norm / bound);
            }
            worst
        }
    };

    let pointwise = mol.a.pointwise(g);
    Ok(ValidationReport {
        factorization_defect,
        size_ratio,
        a_l1: pointwise.norm1(g),
        a_annulus_constant: annulus_constant(g, &mol.ball, &pointwise, mol.kind.eps().unwrap_or(0.0)),
        warnings,
    })
}
