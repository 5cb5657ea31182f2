//! Dense eigendecomposition of `P`, used as the reference functional calculus.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::functions::VertexFunction;
use crate::graph::WeightedGraph;

/// Functions with a larger relative mean are said to touch `ker Δ`.
pub const KERNEL_TOLERANCE: f64 = 1e-9;

/// Graphs up to this size get an oracle by default.
pub const ORACLE_LIMIT: usize = 1500;

/// Eigenpairs of `S = D^{1/2} P D^{-1/2}`, `S_xy = μ_xy / √(m(x) m(y))`.
#[derive(Debug, Clone)]
pub struct SpectralOracle {
    sqrt_m: Vec<f64>,
    /// Ascending; the last one is the eigenvalue 1 of the constants.
    eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors of `S` as columns, in the same order.
    vectors: DMatrix<f64>,
}

impl SpectralOracle {
    pub fn new(g: &WeightedGraph) -> Self {
        let n = g.n();
        let sqrt_m: Vec<f64> = g.measure().iter().map(|m| m.sqrt()).collect();
        let mut s = DMatrix::<f64>::zeros(n, n);
        for x in 0..n {
            for e in g.edge_range(x) {
                let y = g.edge_target(e);
                s[(x, y)] = g.edge_weight(e) / (sqrt_m[x] * sqrt_m[y]);
            }
        }
        let eig = SymmetricEigen::new(s);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Self { sqrt_m, eigenvalues, vectors }
    }

    pub fn n(&self) -> usize {
        self.sqrt_m.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Largest eigenvalue on the mean-zero subspace.
    pub fn lambda_second(&self) -> f64 {
        let n = self.n();
        if n < 2 {
            -1.0
        } else {
            self.eigenvalues[n - 2]
        }
    }

    /// Coefficients of `f` in the eigenbasis.
    pub fn coefficients(&self, f: &[f64]) -> DVector<f64> {
        let h = DVector::from_iterator(self.n(), f.iter().zip(&self.sqrt_m).map(|(v, s)| v * s));
        self.vectors.tr_mul(&h)
    }

    /// Inverse of [`Self::coefficients`].
    pub fn synthesize(&self, coeffs: &DVector<f64>) -> VertexFunction {
        let h = &self.vectors * coeffs;
        h.iter().zip(&self.sqrt_m).map(|(v, s)| v / s).collect::<Vec<_>>().into()
    }

    /// `φ(P) f`; the kernel eigenvalue is mapped through `φ(1)` as usual.
    pub fn apply(&self, phi: impl Fn(f64) -> f64, f: &[f64]) -> VertexFunction {
        let mut c = self.coefficients(f);
        for (ci, &lambda) in c.iter_mut().zip(&self.eigenvalues) {
            *ci *= phi(lambda);
        }
        self.synthesize(&c)
    }

    /// `φ(P) f` for `φ` singular at `λ = 1`: `f` must be (numerically)
    /// orthogonal to the constants, whose component is then discarded.
    pub fn apply_singular(&self, phi: impl Fn(f64) -> f64, f: &[f64]) -> Result<VertexFunction> {
        let mut c = self.coefficients(f);
        let total = c.norm();
        let last = self.n() - 1;
        let relative_mean = if total > 0.0 { c[last].abs() / total } else { 0.0 };
        if relative_mean >= KERNEL_TOLERANCE {
            return Err(Error::KernelComponent { relative_mean });
        }
        c[last] = 0.0;
        for (ci, &lambda) in c.iter_mut().zip(&self.eigenvalues).take(last) {
            *ci *= phi(lambda);
        }
        Ok(self.synthesize(&c))
    }

    /// `Δ^β f`, `β` real; negative powers need a mean-zero `f`.
    pub fn delta_power(&self, beta: f64, f: &[f64]) -> Result<VertexFunction> {
        let phi = move |lambda: f64| (1.0 - lambda).max(0.0).powf(beta);
        if beta < 0.0 {
            self.apply_singular(phi, f)
        } else if beta == 0.0 {
            Ok(f.to_vec().into())
        } else {
            // the constants sit at 1 − λ ≈ 1e-16; map them to 0 exactly
            let last = self.n() - 1;
            let mut c = self.coefficients(f);
            c[last] = 0.0;
            for (ci, &lambda) in c.iter_mut().zip(&self.eigenvalues).take(last) {
                *ci *= phi(lambda);
            }
            Ok(self.synthesize(&c))
        }
    }

    /// Dense matrix of `φ(P)` acting on vertex values (column `y` is `φ(P) 1_y`).
    pub fn matrix(&self, phi: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let n = self.n();
        let mut scaled = self.vectors.clone();
        for (c, &lambda) in self.eigenvalues.iter().enumerate() {
            let v = phi(lambda);
            scaled.column_mut(c).scale_mut(v);
        }
        let mut a = scaled * self.vectors.transpose();
        for x in 0..n {
            for y in 0..n {
                a[(x, y)] *= self.sqrt_m[y] / self.sqrt_m[x];
            }
        }
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::apply_p;
    use crate::zoo;

    #[test]
    fn k2l_examples() {
        let g = zoo::k2l();
        let o = SpectralOracle::new(&g);
        assert!((o.eigenvalues()[0]).abs() < 1e-15);
        assert!((o.eigenvalues()[1] - 1.0).abs() < 1e-15);
        let pf = o.apply(|l| l, &[1.0, 0.0]);
        assert!((pf[0] - 0.5).abs() < 1e-15 && (pf[1] - 0.5).abs() < 1e-15);
        let f0 = [1.0, -1.0];
        let h = o.apply_singular(|l| (1.0 - l).sqrt(), &f0).unwrap();
        assert!((h[0] - 1.0).abs() < 1e-15 && (h[1] + 1.0).abs() < 1e-15);
        let err = o.apply_singular(|l| (1.0 - l).powf(-0.5), &[1.0, 1.0]);
        assert!(matches!(err, Err(Error::KernelComponent { .. })));
    }

    #[test]
    fn reconstructs_p_on_basis() {
        for g in [zoo::lazy_cycle(16, 2.0), zoo::random_weights(&zoo::lazy_torus_2d(5, 4.0), 1, (0.5, 2.0))] {
            let o = SpectralOracle::new(&g);
            assert!(o.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
            assert!(o.lambda_min() > -1.0 + 1e-3);
            for x in 0..g.n() {
                let e = VertexFunction::indicator(g.n(), &[x]);
                let diff = o.apply(|l| l, &e).sub(&apply_p(&g, &e));
                assert!(diff.norm2(&g) <= 1e-10);
            }
            let m = o.matrix(|l| l);
            for x in 0..g.n() {
                for y in 0..g.n() {
                    assert!((m[(x, y)] - g.weight(x, y) / g.m(x)).abs() < 1e-12);
                }
            }
        }
    }
}
