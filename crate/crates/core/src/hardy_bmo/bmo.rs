use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{annulus_constant, ceil_sqrt, MolecularDecomposition, MoleculeValue};
use crate::calculus::{average, bz1_product, bz2_power, Calculus};
use crate::error::{Error, Result};
use crate::functions::VertexFunction;
use crate::graph::WeightedGraph;
use crate::operators::p_orbit;
use crate::parallel::par_map;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BmoKind {
    Bz1 { m: usize },
    Bz2 { m: usize },
}

impl BmoKind {
    pub fn m(&self) -> usize {
        match self {
            Self::Bz1 { m } | Self::Bz2 { m } => *m,
        }
    }
}

/// Tuples in `[s, 2s]^M` are enumerated when there are at most
/// `exhaustive_limit` of them; otherwise the corners `{s, 2s}^M` and
/// `samples` uniform draws are used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TuplePolicy {
    pub exhaustive_limit: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for TuplePolicy {
    fn default() -> Self {
        Self { exhaustive_limit: 4096, samples: 32, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BmoArgmax {
    pub s: usize,
    /// Empty for BZ2.
    pub tuple: Vec<usize>,
    pub center: usize,
    pub radius: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BmoReport {
    #[serde(flatten)]
    pub kind: BmoKind,
    /// `sup_{s, B} ((1/V(B)) Σ_{x∈B} |T_s f(x)|² m(x))^{1/2}`.
    pub value: f64,
    pub argmax: BmoArgmax,
    /// `exhaustive` or `sampled`.
    pub enumeration_policy: String,
}

/// Vertices of every ball, ordered by distance from the center.
struct BallIndex {
    order: Vec<Vec<u32>>,
    /// `counts[x][r] = #B(x, r)`.
    counts: Vec<Vec<u32>>,
}

impl BallIndex {
    fn new(g: &WeightedGraph) -> Self {
        let (order, counts) = (0..g.n())
            .map(|x| {
                let dist = g.distances_from(x);
                let mut ord: Vec<u32> = (0..g.n() as u32).collect();
                ord.sort_by_key(|&y| (dist[y as usize], y));
                let ecc = dist[*ord.last().expect("non-empty graph") as usize] as usize;
                let mut counts = vec![0u32; ecc + 2];
                for &y in &ord {
                    counts[dist[y as usize] as usize + 1] += 1;
                }
                for r in 1..counts.len() {
                    counts[r] += counts[r - 1];
                }
                (ord, counts)
            })
            .unzip();
        Self { order, counts }
    }

    /// `(1/V(B(x, r))) Σ_{y∈B(x,r)} h(y)² m(y)`.
    fn mean_sq(&self, g: &WeightedGraph, x: usize, r: usize, h: &[f64]) -> f64 {
        let c = &self.counts[x];
        let k = c[r.min(c.len() - 1)] as usize;
        let (mut num, mut vol) = (0.0, 0.0);
        for &y in &self.order[x][..k] {
            let y = y as usize;
            num += h[y] * h[y] * g.m(y);
            vol += g.m(y);
        }
        num / vol
    }

    /// Largest ball mean over all centers, with the first maximizing center.
    fn sup(&self, g: &WeightedGraph, r: usize, h: &[f64]) -> (f64, usize) {
        let mut best = (f64::NEG_INFINITY, 0);
        for x in 0..g.n() {
            let v = self.mean_sq(g, x, r, h);
            if v > best.0 {
                best = (v, x);
            }
        }
        best
    }
}

fn tuples_for(s: usize, m: usize, policy: &TuplePolicy) -> (Vec<Vec<usize>>, bool) {
    let exhaustive = (s + 1).checked_pow(m as u32).is_some_and(|c| c <= policy.exhaustive_limit);
    let mut out = Vec::new();
    if exhaustive {
        let mut t = vec![s; m];
        loop {
            out.push(t.clone());
            let mut i = 0;
            while i < m && t[i] == 2 * s {
                t[i] = s;
                i += 1;
            }
            if i == m {
                break;
            }
            t[i] += 1;
        }
    } else {
        for mask in 0..(1usize << m) {
            out.push((0..m).map(|i| if mask >> i & 1 == 1 { 2 * s } else { s }).collect());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(policy.seed ^ (s as u64).wrapping_mul(0x9e37_79b9));
        for _ in 0..policy.samples {
            out.push((0..m).map(|_| rng.gen_range(s..=2 * s)).collect());
        }
    }
    (out, exhaustive)
}

/// `(I − P^{s_1}) … (I − P^{s_M}) f` expanded over subsets, from a `P`-orbit.
fn product_from_orbit(orbit: &[VertexFunction], tuple: &[usize], out: &mut [f64]) {
    out.fill(0.0);
    for mask in 0..(1usize << tuple.len()) {
        let k: usize = (0..tuple.len()).filter(|i| mask >> i & 1 == 1).map(|i| tuple[i]).sum();
        let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        for (o, v) in out.iter_mut().zip(orbit[k].iter()) {
            *o += sign * v;
        }
    }
}

/// `[I − (I + sΔ)^{-1}]^M f`.
fn bz2_apply(cal: &Calculus, f: &[f64], s: f64, m: usize) -> Result<VertexFunction> {
    match cal.oracle() {
        Some(o) => Ok(o.apply(
            |l| {
                let t = s * (1.0 - l);
                (t / (1.0 + t)).powi(m as i32)
            },
            f,
        )),
        None => bz2_power(cal.graph(), f, s, m, cal.tol(), cal.bounds()),
    }
}

/// BMO norm of the given kind, over `s ∈ [1, s_max]` and all balls
/// `B(x, ⌈√s⌉)`.
pub fn bmo_norm(
    cal: &Calculus,
    f: &VertexFunction,
    kind: BmoKind,
    s_max: usize,
    policy: &TuplePolicy,
) -> Result<BmoReport> {
    let g = cal.graph();
    f.check_len(g)?;
    if s_max == 0 {
        return Err(Error::InvalidArgument("s_max must be at least 1".into()));
    }
    let index = BallIndex::new(g);
    let m = kind.m();
    type Best = (f64, BmoArgmax, bool);
    let per_s: Vec<Result<Best>> = match kind {
        BmoKind::Bz1 { .. } => {
            let orbit = p_orbit(g, f, 2 * s_max * m);
            par_map(s_max, |i| {
                let s = i + 1;
                let r = ceil_sqrt(s);
                let (tuples, exhaustive) = tuples_for(s, m, policy);
                let mut h = vec![0.0; g.n()];
                let mut best = (f64::NEG_INFINITY, None);
                for t in tuples {
                    product_from_orbit(&orbit, &t, &mut h);
                    let (v, x) = index.sup(g, r, &h);
                    if v > best.0 {
                        best = (v, Some((t, x)));
                    }
                }
                let (tuple, center) = best.1.expect("at least one tuple");
                Ok((best.0, BmoArgmax { s, tuple, center, radius: r }, exhaustive))
            })
        }
        BmoKind::Bz2 { .. } => par_map(s_max, |i| {
            let s = i + 1;
            let r = ceil_sqrt(s);
            let h = bz2_apply(cal, f, s as f64, m)?;
            let (v, center) = index.sup(g, r, &h);
            Ok((v, BmoArgmax { s, tuple: Vec::new(), center, radius: r }, true))
        }),
    };
    let mut best: Option<Best> = None;
    let mut all_exhaustive = true;
    for item in per_s {
        let item = item?;
        all_exhaustive &= item.2;
        if best.as_ref().is_none_or(|b| item.0 > b.0) {
            best = Some(item);
        }
    }
    let (value, argmax, _) = best.expect("s_max >= 1");
    Ok(BmoReport {
        kind,
        value: value.max(0.0).sqrt(),
        argmax,
        enumeration_policy: if all_exhaustive { "exhaustive" } else { "sampled" }.into(),
    })
}

/// `‖Π_i (I − P^{s_i}) f − Π_i [(s_i/s) Q_{s_i} + (I − P^{s_i})] [I − (I+sΔ)^{-1}]^M f‖₂`.
pub fn bz1_via_bz2_defect(cal: &Calculus, f: &VertexFunction, s: usize, tuple: &[usize]) -> Result<f64> {
    let g = cal.graph();
    if s == 0 || tuple.contains(&0) {
        return Err(Error::InvalidArgument("scales must be at least 1".into()));
    }
    let lhs = bz1_product(g, f, tuple);
    let mut rhs = bz2_apply(cal, f, s as f64, tuple.len())?;
    for &si in tuple {
        let q = average(g, &rhs, si).scaled(si as f64 / s as f64);
        let diff = bz1_product(g, &rhs, &[si]);
        rhs = q.add(&diff);
    }
    Ok(lhs.sub(&rhs).norm2(g))
}

/// `‖φ‖_{𝓜₀^{M,ε}}` through the mean-zero pre-image `φ̃ = Δ^{-M} φ`.
pub fn m0_norm(cal: &Calculus, phi: &VertexFunction, m: usize, eps: f64, x0: usize) -> Result<f64> {
    let g = cal.graph();
    phi.check_len(g)?;
    let pre = cal.delta_power(phi, -(m as f64))?;
    m0_norm_of_preimage(g, &pre, eps, x0)
}

/// `sup_{j≥1} 2^{jε} V(2^j B₀)^{1/2} ‖φ̃‖_{L²(C_j(B₀))}` with `B₀ = {x₀}`.
pub fn m0_norm_of_preimage(g: &WeightedGraph, pre: &VertexFunction, eps: f64, x0: usize) -> Result<f64> {
    pre.check_len(g)?;
    if x0 >= g.n() {
        return Err(Error::InvalidArgument(format!("vertex {x0} out of range")));
    }
    Ok(annulus_constant(g, &g.ball(x0, 1), pre, eps))
}

/// `⟨f, Σ λ_i a_i⟩` with the `m`-weighted pairing.
pub fn duality_pairing(g: &WeightedGraph, f: &VertexFunction, decomp: &MolecularDecomposition) -> Result<f64> {
    f.check_len(g)?;
    let mut total = 0.0;
    for (lambda, mol) in &decomp.coefficients {
        match &mol.a {
            MoleculeValue::Vertex(a) => total += lambda * f.inner(g, a),
            MoleculeValue::Form(_) => return Err(Error::InvalidArgument("pairing needs vertex molecules".into())),
        }
    }
    Ok(total)
}
