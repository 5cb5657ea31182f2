//! The elementary bound `((1+k)/(1+t))^m (t/(1+t))^k ≤ C_m e^{-c k/(1+t)}`.

/// Exponent used with [`decay_constant`].
pub const DECAY_RATE: f64 = 0.5;

/// `((1+k)/(1+t))^m (t/(1+t))^k`.
pub fn exp_decay_bound(m: f64, t: f64, k: u64) -> f64 {
    let k = k as f64;
    let lead = ((1.0 + k) / (1.0 + t)).powf(m);
    if k == 0.0 {
        return lead;
    }
    lead * (k * (t / (1.0 + t)).ln()).exp()
}

/// `C_m = sup_{u ≥ 0} (1+u)^m e^{-u/2}`.
///
/// `(t/(1+t))^k ≤ e^{-u}` with `u = k/(1+t)` and `(1+k)/(1+t) ≤ 1+u`, so the
/// left side is at most `(1+u)^m e^{-u} ≤ C_m e^{-u/2}`.
pub fn decay_constant(m: f64) -> f64 {
    let u = (2.0 * m - 1.0).max(0.0);
    (1.0 + u).powf(m) * (-u / 2.0).exp()
}

/// `C_m e^{-k/(2(1+t))}`.
pub fn exp_decay_majorant(m: f64, t: f64, k: u64) -> f64 {
    decay_constant(m) * (-DECAY_RATE * k as f64 / (1.0 + t)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(exp_decay_bound(0.0, 1.0, 10), 0.5f64.powi(10));
        assert!((exp_decay_bound(0.0, 1.0, 10) - 9.765625e-4).abs() < 1e-15);
        for m in [0.0, 1.0, 2.0] {
            for t in [0.0, 0.5, 3.0, 100.0] {
                assert!(exp_decay_bound(m, t, 0) <= 1.0);
            }
        }
        assert_eq!(decay_constant(0.0), 1.0);
        assert_eq!(decay_constant(0.5), 1.0);
        assert!((decay_constant(1.0) - 2.0 * (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn constant_is_a_supremum() {
        for m in [0.0, 0.7, 1.0, 2.0, 3.5] {
            let c = decay_constant(m);
            let best =
                (0..200_000).map(|i| i as f64 * 1e-4).map(|u| (1.0 + u).powf(m) * (-u / 2.0).exp()).fold(0.0, f64::max);
            assert!(best <= c * (1.0 + 1e-12));
            assert!(best >= c * (1.0 - 1e-6));
        }
    }
}
