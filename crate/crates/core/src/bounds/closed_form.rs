//! Closed-form symmetrized-KL bounds for the Poisson and Gaussian channels.

use crate::error::{invalid, Result};

/// A finitely supported input law.
#[derive(Debug, Clone, PartialEq)]
pub struct InputLaw {
    pub points: Vec<f64>,
    pub masses: Vec<f64>,
}

impl InputLaw {
    pub fn new(points: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != masses.len() {
            return invalid("input law needs matching, nonempty points and masses");
        }
        if points.iter().chain(&masses).any(|v| !v.is_finite()) {
            return invalid("input law entries must be finite");
        }
        if masses.iter().any(|m| *m < 0.0) {
            return invalid("input law masses must be nonnegative");
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return invalid(format!("input law masses sum to {total}, not 1"));
        }
        Ok(Self { points, masses })
    }

    pub fn point_mass(x: f64) -> Self {
        Self {
            points: vec![x],
            masses: vec![1.0],
        }
    }

    /// Mass `t` at `hi`, `1 - t` at `lo`.
    pub fn two_point(lo: f64, hi: f64, t: f64) -> Result<Self> {
        Self::new(vec![lo, hi], vec![1.0 - t, t])
    }

    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points.iter().zip(&self.masses).map(|(x, m)| m * f(*x)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.expect(|x| x)
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        self.expect(|x| (x - mu) * (x - mu))
    }
}

/// `max D_sym` for `Y ~ Poisson(X + lambda0)` with `0 <= X <= A`, `E[X] <= alpha`:
/// `(alpha/A)(A - alpha) log(A/lambda0 + 1)` for `alpha < A/2`, else `(A/4) log(A/lambda0 + 1)`.
pub fn a_poisson_closed_form(amax: f64, alpha: f64, lambda0: f64) -> Result<f64> {
    if !(amax.is_finite() && amax > 0.0) {
        return invalid(format!("A must be positive, got {amax}"));
    }
    if !(alpha >= 0.0 && alpha <= amax) {
        return invalid(format!("alpha must lie in [0, A], got {alpha}"));
    }
    if !(lambda0.is_finite() && lambda0 > 0.0) {
        return invalid(format!(
            "the bound diverges unless lambda0 > 0, got {lambda0}"
        ));
    }
    let log_term = (amax / lambda0).ln_1p();
    Ok(if alpha < amax / 2.0 {
        alpha / amax * (amax - alpha) * log_term
    } else {
        amax / 4.0 * log_term
    })
}

/// `Cov(X + lambda0, log(X + lambda0))`, the symmetrized-KL value of the Poisson channel.
pub fn cov_bound_poisson(law: &InputLaw, lambda0: f64) -> Result<f64> {
    if !(lambda0.is_finite() && lambda0 > 0.0) {
        return invalid(format!("lambda0 must be positive, got {lambda0}"));
    }
    if law.points.iter().any(|x| *x < 0.0) {
        return invalid("Poisson inputs must be nonnegative");
    }
    let e_xlogx = law.expect(|x| (x + lambda0) * (x + lambda0).ln());
    let e_x = law.expect(|x| x + lambda0);
    let e_logx = law.expect(|x| (x + lambda0).ln());
    Ok((e_xlogx - e_x * e_logx).max(0.0))
}

/// `Var(X) / sigma^2`, the symmetrized-KL value of `Y = X + N`, `N ~ Normal(mu, sigma^2)`.
/// The noise mean drops out.
pub fn gaussian_sym_bound(law: &InputLaw, sigma: f64, _mu: f64) -> Result<f64> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return invalid(format!("sigma must be positive, got {sigma}"));
    }
    Ok(law.variance() / (sigma * sigma))
}
