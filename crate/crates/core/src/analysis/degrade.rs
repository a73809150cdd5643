use crate::channel_model::{full_convolution, ImpulseResponse};
use crate::error::{invalid, Error, Result};

/// Extra taps of `q` computed past the needed length; their mass is reported as `remainder`.
pub const GUARD_TAPS: usize = 4;
const NORMALIZED_TOL: f64 = 1e-9;

/// Outcome of factoring `p' = p * q` with `q >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegradednessReport {
    pub feasible: bool,
    /// Recovered factor, negative dust clamped to zero; meaningful only if `feasible`.
    pub q: Vec<f64>,
    /// `max_i |(p * q)_i - p'_i|` over the support of `p * q` and `p'`.
    pub residual: f64,
    /// `sum |q_i|` over the guard band, i.e. the mass the recursion keeps producing
    /// after `p'` is exhausted. Rounding is amplified there by up to `(max_j p_j / p_0)^i`.
    pub remainder: f64,
}

/// Recovers `q` from `p' = p * q` by forward substitution,
/// `q_i = (p'_i - sum_{j>=1} p_j q_{i-j}) / p_0`, over the length `p'` requires plus
/// [`GUARD_TAPS`] guard entries. The factorization is accepted when every `q_i >= -tol`,
/// `sum q <= 1 + tol` and the residual is `<= tol`. The residual covers the whole
/// product, so a non-terminating factor shows up there even when the guard entries,
/// which inherit the recursion's rounding growth, are too noisy to threshold.
pub fn check_degraded(
    p: &ImpulseResponse,
    p_prime: &ImpulseResponse,
    tol: f64,
) -> Result<DegradednessReport> {
    if !(tol >= 0.0 && tol.is_finite()) {
        return invalid(format!("tolerance must be nonnegative, got {tol}"));
    }
    for (name, r) in [("p", p), ("p'", p_prime)] {
        if (r.total() - 1.0).abs() > NORMALIZED_TOL {
            return invalid(format!(
                "{name} must be normalized, its taps sum to {}",
                r.total()
            ));
        }
    }
    let p = p.trimmed();
    let pp = p_prime.trimmed();
    let (a, b) = (p.taps(), pp.taps());
    if a[0] == 0.0 {
        return Err(Error::Unsupported(
            "p_0 = 0 makes the recursive deconvolution ill-posed".into(),
        ));
    }
    let needed = (b.len() + 1).saturating_sub(a.len()).max(1);
    let total_len = needed + GUARD_TAPS;
    let mut q = vec![0.0; total_len];
    for i in 0..total_len {
        let target = b.get(i).copied().unwrap_or(0.0);
        let mut acc = target;
        for j in 1..a.len().min(i + 1) {
            acc -= a[j] * q[i - j];
        }
        q[i] = acc / a[0];
    }
    let remainder = q[needed..].iter().map(|v| v.abs()).sum();
    let nonneg = q[..needed].iter().all(|v| *v >= -tol);
    let mut q: Vec<f64> = q[..needed].iter().map(|v| v.max(0.0)).collect();
    let mass_ok = q.iter().sum::<f64>() <= 1.0 + tol;
    let conv = full_convolution(a, &q);
    let len = conv.len().max(b.len());
    let residual = (0..len)
        .map(|i| (conv.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max);
    let feasible = nonneg && mass_ok && residual <= tol;
    if !feasible {
        q.clear();
    }
    Ok(DegradednessReport {
        feasible,
        q,
        residual,
        remainder,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ir(t: &[f64]) -> ImpulseResponse {
        ImpulseResponse::new(t.to_vec()).unwrap()
    }

    #[test]
    fn self_factor_is_identity() {
        let p = ir(&[0.6, 0.3, 0.1]);
        let r = check_degraded(&p, &p, 1e-10).unwrap();
        assert!(r.feasible);
        assert_eq!(r.q, vec![1.0]);
    }

    #[test]
    fn identity_filter_returns_p_prime() {
        let pp = ir(&[0.2, 0.5, 0.3]);
        let r = check_degraded(&ImpulseResponse::memoryless(), &pp, 1e-10).unwrap();
        assert!(r.feasible);
        assert_eq!(r.q, pp.taps());
    }

    #[test]
    fn recovers_known_factor() {
        let r = check_degraded(&ir(&[0.7, 0.3]), &ir(&[0.35, 0.5, 0.15]), 1e-10).unwrap();
        assert!(r.feasible);
        assert!((r.q[0] - 0.5).abs() < 1e-12 && (r.q[1] - 0.5).abs() < 1e-12);
        assert!(r.residual < 1e-12);
    }

    #[test]
    fn small_leading_tap_still_factors() {
        // the recursion grows rounding by 19^i; the residual stays at machine precision
        let p = ir(&[0.05, 0.95]);
        let q = [0.2, 0.3, 0.1, 0.15, 0.05, 0.2];
        let pp = ir(&p.convolve_with(&q));
        let r = check_degraded(&p, &pp, 1e-10).unwrap();
        assert!(r.feasible, "residual {}", r.residual);
        for (a, b) in r.q.iter().zip(q) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_non_factorizable() {
        // (0.5, 0.5) does not divide (0.9, 0.1): the quotient alternates in sign
        let r = check_degraded(&ir(&[0.5, 0.5]), &ir(&[0.9, 0.1]), 1e-10).unwrap();
        assert!(!r.feasible);
        // swapping a genuine pair is not a factorization either
        let r = check_degraded(&ir(&[0.35, 0.5, 0.15]), &ir(&[0.7, 0.3]), 1e-10).unwrap();
        assert!(!r.feasible);
    }

    #[test]
    fn zero_leading_tap_is_unsupported() {
        let e = check_degraded(&ir(&[0.0, 1.0]), &ir(&[0.0, 0.5, 0.5]), 1e-10);
        assert!(matches!(e, Err(Error::Unsupported(_))));
    }

    #[test]
    fn unnormalized_inputs_are_rejected() {
        assert!(check_degraded(&ir(&[0.5, 0.3]), &ir(&[0.5, 0.5]), 1e-10).is_err());
    }
}
