//! Truncated Poisson output laws.

use crate::error::{invalid, Result};

/// A Poisson pmf restricted to `{0, ..., ymax}` and renormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedPmf {
    pub pmf: Vec<f64>,
    /// Probability mass beyond `ymax` that was dropped before renormalizing.
    pub removed_mass: f64,
}

impl TruncatedPmf {
    pub fn ymax(&self) -> usize {
        self.pmf.len() - 1
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !lambda.is_finite() {
        return invalid(format!("Poisson intensity must be finite, got {lambda}"));
    }
    if lambda < 0.0 {
        return invalid(format!("Poisson intensity must be nonnegative, got {lambda}"));
    }
    Ok(())
}

/// Unnormalized pmf values `P(Y = y)` for `y = 0..=ymax`, evaluated in log space.
pub(crate) fn raw_pmf(lambda: f64, ymax: usize) -> Vec<f64> {
    if lambda == 0.0 {
        let mut v = vec![0.0; ymax + 1];
        v[0] = 1.0;
        return v;
    }
    let ln_lambda = lambda.ln();
    let mut ln_fact = 0.0;
    let mut out = Vec::with_capacity(ymax + 1);
    for y in 0..=ymax {
        if y > 0 {
            ln_fact += (y as f64).ln();
        }
        out.push((-lambda + y as f64 * ln_lambda - ln_fact).exp());
    }
    out
}

/// Far enough past the mean that the remaining mass is far below any useful tolerance.
fn search_bound(lambda: f64) -> usize {
    (lambda + 40.0 * lambda.sqrt() + 60.0).ceil() as usize
}

/// Smallest `ymax` whose upper tail `P(Y > ymax)` is below `tail_eps`, with that tail mass.
pub fn truncation_point(lambda: f64, tail_eps: f64) -> Result<(usize, f64)> {
    check_lambda(lambda)?;
    if !(tail_eps > 0.0 && tail_eps < 1.0) {
        return invalid(format!("tail_eps must lie in (0, 1), got {tail_eps}"));
    }
    if lambda == 0.0 {
        return Ok((0, 0.0));
    }
    let raw = raw_pmf(lambda, search_bound(lambda));
    // suffix[y] = P(Y >= y), summed from the far end so small tails keep their precision
    let mut suffix = vec![0.0; raw.len() + 1];
    for y in (0..raw.len()).rev() {
        suffix[y] = suffix[y + 1] + raw[y];
    }
    let ymax = (0..raw.len())
        .find(|&y| suffix[y + 1] < tail_eps)
        .unwrap_or(raw.len() - 1);
    Ok((ymax, suffix[ymax + 1]))
}

/// Poisson(`lambda`) pmf on `{0, ..., ymax}`, renormalized to sum to one.
pub fn poisson_pmf_on(lambda: f64, ymax: usize) -> Result<TruncatedPmf> {
    check_lambda(lambda)?;
    let mut pmf = raw_pmf(lambda, ymax);
    let kept: f64 = pmf.iter().sum();
    // exp(-lambda) underflows for huge intensities; those are outside the model's range
    if !(kept > 0.0) {
        return invalid(format!("Poisson({lambda}) has no representable mass on 0..={ymax}"));
    }
    pmf.iter_mut().for_each(|v| *v /= kept);
    Ok(TruncatedPmf {
        pmf,
        removed_mass: (1.0 - kept).max(0.0),
    })
}

/// Poisson(`lambda`) pmf truncated at the smallest `ymax` with tail mass below `tail_eps`,
/// renormalized. `lambda = 0` gives the point mass at zero.
pub fn poisson_pmf(lambda: f64, tail_eps: f64) -> Result<Vec<f64>> {
    let (ymax, _) = truncation_point(lambda, tail_eps)?;
    Ok(poisson_pmf_on(lambda, ymax)?.pmf)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent route: the multiplicative recurrence pmf(k) = pmf(k-1) * lambda / k.
    fn recurrence_pmf(lambda: f64, n: usize) -> Vec<f64> {
        let mut v = vec![(-lambda).exp()];
        for k in 1..n {
            let prev = v[k - 1];
            v.push(prev * lambda / k as f64);
        }
        v
    }

    #[test]
    fn zero_intensity_is_point_mass() {
        assert_eq!(poisson_pmf(0.0, 1e-12).unwrap(), vec![1.0]);
    }

    #[test]
    fn unit_intensity_head() {
        let (ymax, _) = truncation_point(1.0, 1e-12).unwrap();
        let raw = raw_pmf(1.0, ymax);
        assert!((raw[0] - (-1.0f64).exp()).abs() < 1e-15);
        assert!((raw[0] - 0.367879).abs() < 1e-6);
    }

    #[test]
    fn mean_matches_recurrence_oracle() {
        let pmf = poisson_pmf(45.0, 1e-12).unwrap();
        let oracle = recurrence_pmf(45.0, 400);
        let oracle_mean: f64 = oracle.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        let mean: f64 = pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        assert!((oracle_mean - 45.0).abs() < 1e-9);
        assert!((mean - oracle_mean).abs() < 1e-8, "{mean} vs {oracle_mean}");
        for (a, b) in pmf.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn truncation_is_minimal_and_removes_less_than_eps() {
        for &lambda in &[0.3, 5.0, 45.0, 300.0] {
            let eps = 1e-10;
            let (ymax, tail) = truncation_point(lambda, eps).unwrap();
            assert!(tail < eps);
            let oracle = recurrence_pmf(lambda, ymax + 1);
            let head: f64 = oracle.iter().take(ymax).sum();
            // one fewer point would leave too much mass behind
            assert!(1.0 - head >= eps * 0.999, "lambda={lambda}");
            let t = poisson_pmf_on(lambda, ymax).unwrap();
            assert!(t.removed_mass < eps);
            assert!((t.pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_finite() {
        assert!(poisson_pmf(f64::NAN, 1e-10).is_err());
        assert!(poisson_pmf(f64::INFINITY, 1e-10).is_err());
        assert!(poisson_pmf(-1.0, 1e-10).is_err());
    }
}
