//! The Riesz transform `dΔ^{-1/2}`, the projection onto exact forms and the
//! H¹ experiment for `∇Δ^{-1/2}`.

use serde::{Deserialize, Serialize};

use crate::calculus::{Calculus, KERNEL_TOLERANCE};
use crate::error::{Error, Result};
use crate::functions::{EdgeFunction, VertexFunction};
use crate::graph::WeightedGraph;
use crate::hardy_bmo::ceil_sqrt;
use crate::operators::{differential, divergence, gradient, laplacian_pow};
use crate::parallel::par_map;
use crate::quadratic::{lusin, quad_norm_forms};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RieszNorms {
    pub input_l2: f64,
    /// `‖dΔ^{-1/2} f‖_{L²(T_Γ)}`.
    pub output_l2: f64,
    /// `‖∇Δ^{-1/2} f‖₁`.
    pub gradient_l1: f64,
    /// `‖L₁ f‖₁`, when requested.
    pub input_h1: Option<f64>,
    /// `‖L₁ Δ^{-1/2} d* F‖₁` for the output form, when requested.
    pub output_h1: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RieszResult {
    pub input: VertexFunction,
    pub output: EdgeFunction,
    /// `x ↦ ‖output(x, ·)‖_{T_x}`.
    pub gradient_form: VertexFunction,
    pub norms: RieszNorms,
}

/// `dΔ^{-1/2} f` for mean-zero `f`. With `h1_levels`, also the quadratic H¹
/// norms (`β = 1`) of the input and of the output form.
pub fn riesz(cal: &Calculus, f: &VertexFunction, h1_levels: Option<usize>) -> Result<RieszResult> {
    let g = cal.graph();
    f.check_len(g)?;
    let h = cal.inv_sqrt(f)?;
    let output = differential(g, &h);
    let gradient_form = gradient(g, &h);
    let (input_h1, output_h1) = match h1_levels {
        Some(l_max) => (Some(lusin(cal, f, 1.0, l_max)?.l1_norm(g)), Some(quad_norm_forms(cal, &output, 1.0, l_max)?)),
        None => (None, None),
    };
    let norms = RieszNorms {
        input_l2: f.norm2(g),
        output_l2: output.norm2(g),
        gradient_l1: gradient_form.norm1(g),
        input_h1,
        output_h1,
    };
    Ok(RieszResult { input: f.clone(), output, gradient_form, norms })
}

/// `d*F` with its constant part removed (zero for antisymmetric `F`).
fn mean_zero_divergence(g: &WeightedGraph, form: &EdgeFunction) -> VertexFunction {
    let div = divergence(g, form);
    if div.relative_mean(g) > KERNEL_TOLERANCE {
        div.remove_mean(g)
    } else {
        div
    }
}

/// `dΔ^{-1} d* F`, the orthogonal projection onto exact forms.
pub fn h2_project(cal: &Calculus, form: &EdgeFunction) -> Result<EdgeFunction> {
    let g = cal.graph();
    if form.len() != g.edge_count() {
        return Err(Error::DimensionMismatch { expected: g.edge_count(), got: form.len() });
    }
    let div = mean_zero_divergence(g, form);
    if div.norm_inf() == 0.0 {
        return Ok(EdgeFunction::zeros(g));
    }
    let potential = cal.delta_power(&div, -1.0)?;
    Ok(differential(g, &potential))
}

/// `Δ^{-1/2} d* F`, the inverse Riesz transform on exact forms.
pub fn inverse_riesz(cal: &Calculus, form: &EdgeFunction) -> Result<VertexFunction> {
    let g = cal.graph();
    let div = mean_zero_divergence(g, form);
    if div.norm_inf() == 0.0 {
        return Ok(VertexFunction::zeros(g.n()));
    }
    cal.inv_sqrt(&div)
}

/// `‖d*F‖_p / ‖F‖_{L^p(T_Γ)}`; `p = ∞` allowed.
pub fn divergence_ratio(g: &WeightedGraph, form: &EdgeFunction, p: f64) -> f64 {
    let den = form.norm(g, p);
    if den == 0.0 {
        return 0.0;
    }
    divergence(g, form).norm(g, p) / den
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RieszEntry {
    pub label: String,
    /// `‖f‖_{H¹_{quad,1}}`.
    pub h1_input: f64,
    /// `‖dΔ^{-1/2} f‖_{H¹_{quad,1}(T_Γ)}`.
    pub h1_output: f64,
    /// `|h1_output − h1_input| / h1_input`.
    pub chain_defect: f64,
    /// `‖∇Δ^{-1/2} f‖₁`.
    pub gradient_l1: f64,
    /// `gradient_l1 / h1_input`.
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RieszReport {
    pub entries: Vec<RieszEntry>,
    pub max_ratio: f64,
    pub max_chain_defect: f64,
}

impl RieszReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,h1_input,h1_output,chain_defect,gradient_l1,ratio\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                e.label, e.h1_input, e.h1_output, e.chain_defect, e.gradient_l1, e.ratio
            ));
        }
        out
    }

    /// Largest ratio among entries whose label starts with `prefix`.
    pub fn max_ratio_for(&self, prefix: &str) -> f64 {
        self.entries.iter().filter(|e| e.label.starts_with(prefix)).map(|e| e.ratio).fold(0.0, f64::max)
    }
}

/// Runs the Riesz transform over a labelled suite of mean-zero inputs and
/// records `‖∇Δ^{-1/2} f‖₁ / ‖f‖_{H¹_{quad,1}}`.
pub fn riesz_h1_experiment(cal: &Calculus, suite: &[(String, VertexFunction)], l_max: usize) -> Result<RieszReport> {
    let g = cal.graph();
    let results = par_map(suite.len(), |i| -> Result<RieszEntry> {
        let (label, f) = &suite[i];
        let relative_mean = f.relative_mean(g);
        if relative_mean > KERNEL_TOLERANCE {
            return Err(Error::KernelComponent { relative_mean });
        }
        let r = riesz(cal, f, Some(l_max))?;
        let h1_input = r.norms.input_h1.unwrap_or(0.0);
        let h1_output = r.norms.output_h1.unwrap_or(0.0);
        let (chain_defect, ratio) = if h1_input == 0.0 {
            (h1_output, 0.0)
        } else {
            ((h1_output - h1_input).abs() / h1_input, r.norms.gradient_l1 / h1_input)
        };
        Ok(RieszEntry {
            label: label.clone(),
            h1_input,
            h1_output,
            chain_defect,
            gradient_l1: r.norms.gradient_l1,
            ratio,
        })
    });
    let entries = results.into_iter().collect::<Result<Vec<_>>>()?;
    let max_ratio = entries.iter().map(|e| e.ratio).fold(0.0, f64::max);
    let max_chain_defect = entries.iter().map(|e| e.chain_defect).fold(0.0, f64::max);
    Ok(RieszReport { entries, max_ratio, max_chain_defect })
}

/// BZ₂ molecules `a = [I − (I+sΔ)^{-1}]^M b` with `b` the normalized
/// indicator of `B(x, ⌈√s⌉)`, for every `s` and every center. Labels are
/// `s=<s>/x=<x>`.
pub fn molecule_suite(cal: &Calculus, scales: &[usize], m: usize) -> Result<Vec<(String, VertexFunction)>> {
    let g = cal.graph();
    let mut suite = Vec::with_capacity(scales.len() * g.n());
    for &s in scales {
        if s == 0 {
            return Err(Error::InvalidArgument("scales must be at least 1".into()));
        }
        for x in 0..g.n() {
            let ball = g.ball(x, ceil_sqrt(s));
            let ind = VertexFunction::indicator(g.n(), &ball.members);
            let b = ind.scaled(1.0 / (ind.norm2(g) * ball.volume.sqrt()));
            let r = cal.resolvent_power(&b, s as f64, m as f64)?;
            let a = laplacian_pow(g, &r, m).scaled((s as f64).powi(m as i32));
            suite.push((format!("s={s}/x={x}"), a));
        }
    }
    Ok(suite)
}
