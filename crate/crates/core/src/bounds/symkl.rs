//! Symmetrized-KL upper bounds on mutual information.
//!
//! For a channel `W` and input `p`,
//! `D_sym(p(x,y) || p(x)p(y)) = sum_{x,y} [p(x,y) - p(x)p(y)] log W(y|x)`,
//! which dominates `I(X;Y)` and is a quadratic in `p`:
//! `F(p) = sum_x p(x) d(x) - sum_{x,x'} p(x) p(x') g(x,x')` with
//! `d(x) = sum_y W(y|x) log W(y|x)` and `g(x,x') = sum_y W(y|x') log W(y|x)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::capacity_solver::{check_distribution, output_distribution, SolverConfig};
use crate::channel_model::DiscreteChannel;
use crate::error::{invalid, Result};

/// Random restarts used by [`sym_kl_max`] on top of its deterministic starts.
pub const SYMKL_RANDOM_STARTS: usize = 8;
const SYMKL_SEED: u64 = 0x5eed_5e1f;
const COST_SLACK: f64 = 1e-12;

/// A symmetrized-KL evaluation. `divergent` is set (and `value` is `+inf`) when some
/// `W(y|x) = 0` meets positive reference mass, so the reverse divergence is infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymKlValue {
    pub value: f64,
    pub divergent: bool,
}

impl SymKlValue {
    fn finite(value: f64) -> Self {
        Self {
            value,
            divergent: false,
        }
    }

    fn infinite() -> Self {
        Self {
            value: f64::INFINITY,
            divergent: true,
        }
    }
}

/// `sum_{x,y} [p(x,y) - p(x)q(y)] log W(y|x)` in nats.
pub fn sym_kl_generic(channel: &DiscreteChannel, input: &[f64]) -> Result<SymKlValue> {
    check_distribution(input, channel.n_inputs())?;
    let q = output_distribution(channel, input);
    let mut total = 0.0;
    for (row, &px) in channel.rows().zip(input) {
        if px == 0.0 {
            continue;
        }
        for (w, qy) in row.iter().zip(&q) {
            if *w > 0.0 {
                total += px * (w - qy) * w.ln();
            } else if *qy > 0.0 {
                return Ok(SymKlValue::infinite());
            }
        }
    }
    Ok(SymKlValue::finite(total.max(0.0)))
}

/// `D(p(x,y) || p(x)r(y)) + D(p(x)r(y) || p(x,y))` for an arbitrary output law `r`.
pub fn topsoe_mixed_bound(
    channel: &DiscreteChannel,
    input: &[f64],
    reference: &[f64],
) -> Result<SymKlValue> {
    check_distribution(input, channel.n_inputs())?;
    check_distribution(reference, channel.n_outputs())?;
    let mut total = 0.0;
    for (row, &px) in channel.rows().zip(input) {
        if px == 0.0 {
            continue;
        }
        for (w, ry) in row.iter().zip(reference) {
            match (*w > 0.0, *ry > 0.0) {
                (true, true) => total += px * (w - ry) * (w / ry).ln(),
                (false, false) => {}
                _ => return Ok(SymKlValue::infinite()),
            }
        }
    }
    Ok(SymKlValue::finite(total.max(0.0)))
}

/// Result of maximizing the symmetrized-KL functional over inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct SymKlResult {
    /// Best value found, nats (`+inf` when `divergent`).
    pub value: f64,
    pub input_dist: Vec<f64>,
    pub divergent: bool,
    /// Number of projected-gradient starts that were run.
    pub starts: usize,
}

impl SymKlResult {
    /// Support of the maximizer as `(input index, mass)` pairs.
    pub fn support(&self, min_mass: f64) -> Vec<(usize, f64)> {
        self.input_dist
            .iter()
            .enumerate()
            .filter(|(_, m)| **m > min_mass)
            .map(|(i, m)| (i, *m))
            .collect()
    }
}

/// The quadratic's coefficients.
struct Quadratic {
    n: usize,
    d: Vec<f64>,
    /// Row-major `g(x, x')`; `-inf` marks a diverging pair.
    g: Vec<f64>,
}

impl Quadratic {
    fn new(channel: &DiscreteChannel) -> Self {
        let n = channel.n_inputs();
        let logs: Vec<Vec<f64>> = channel
            .rows()
            .map(|row| row.iter().map(|w| if *w > 0.0 { w.ln() } else { f64::NEG_INFINITY }).collect())
            .collect();
        let g: Vec<f64> = (0..n * n)
            .into_par_iter()
            .map(|ij| {
                let (x, xp) = (ij / n, ij % n);
                let mut s = 0.0;
                for (wp, lw) in channel.row(xp).iter().zip(&logs[x]) {
                    if *wp > 0.0 {
                        s += wp * lw;
                    }
                }
                s
            })
            .collect();
        let d = (0..n).map(|x| g[x * n + x]).collect();
        Self { n, d, g }
    }

    fn g(&self, x: usize, xp: usize) -> f64 {
        self.g[x * self.n + xp]
    }

    fn value(&self, p: &[f64]) -> f64 {
        let mut v: f64 = p.iter().zip(&self.d).map(|(a, b)| a * b).sum();
        for x in 0..self.n {
            if p[x] == 0.0 {
                continue;
            }
            for xp in 0..self.n {
                if p[xp] != 0.0 {
                    v -= p[x] * p[xp] * self.g(x, xp);
                }
            }
        }
        v
    }

    fn gradient(&self, p: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|x| {
                let mut s = self.d[x];
                for xp in 0..self.n {
                    s -= (self.g(x, xp) + self.g(xp, x)) * p[xp];
                }
                s
            })
            .collect()
    }

    /// Frobenius norm of the curvature restricted to the simplex's tangent space.
    fn curvature_bound(&self) -> f64 {
        let n = self.n;
        let h: Vec<f64> = (0..n * n)
            .map(|ij| self.g(ij / n, ij % n) + self.g(ij % n, ij / n))
            .collect();
        let row_mean: Vec<f64> = (0..n).map(|i| h[i * n..(i + 1) * n].iter().sum::<f64>() / n as f64).collect();
        let total_mean = row_mean.iter().sum::<f64>() / n as f64;
        let mut fro = 0.0;
        for i in 0..n {
            for j in 0..n {
                // H is symmetric, so column means equal row means
                let c = h[i * n + j] - row_mean[i] - row_mean[j] + total_mean;
                fro += c * c;
            }
        }
        fro.sqrt()
    }
}

/// Euclidean projection onto the probability simplex.
pub(crate) fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, ui) in u.iter().enumerate() {
        cumsum += ui;
        let t = (cumsum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|vi| (vi - theta).max(0.0)).collect()
}

/// Euclidean projection onto `{p in simplex : cost . p <= alpha}`.
///
/// The solution is the simplex projection of `v - mu * cost` for the multiplier
/// `mu >= 0` that makes the cost constraint tight (or `mu = 0` if it is slack).
pub(crate) fn project_cost_simplex(v: &[f64], cost: &[f64], alpha: Option<f64>) -> Vec<f64> {
    let p = project_simplex(v);
    let alpha = match alpha {
        Some(a) => a,
        None => return p,
    };
    let c = |p: &[f64]| p.iter().zip(cost).map(|(a, b)| a * b).sum::<f64>();
    if c(&p) <= alpha {
        return p;
    }
    let shifted = |mu: f64| -> Vec<f64> {
        let w: Vec<f64> = v.iter().zip(cost).map(|(vi, ci)| vi - mu * ci).collect();
        project_simplex(&w)
    };
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut p_hi = shifted(hi);
    while c(&p_hi) > alpha && hi < 1e300 {
        lo = hi;
        hi *= 2.0;
        p_hi = shifted(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let p_mid = shifted(mid);
        if c(&p_mid) > alpha {
            lo = mid;
        } else {
            hi = mid;
            p_hi = p_mid;
        }
    }
    p_hi
}

fn feasible_mass_interval(ci: f64, cj: f64, alpha: Option<f64>) -> Option<(f64, f64)> {
    // mass t on i, 1 - t on j, needs t ci + (1 - t) cj <= alpha
    let a = match alpha {
        None => return Some((0.0, 1.0)),
        Some(a) => a + COST_SLACK,
    };
    if ci.max(cj) <= a {
        return Some((0.0, 1.0));
    }
    if ci.min(cj) > a {
        return None;
    }
    if ci > cj {
        Some((0.0, ((a - cj) / (ci - cj)).clamp(0.0, 1.0)))
    } else {
        Some((((cj - a) / (cj - ci)).clamp(0.0, 1.0), 1.0))
    }
}

/// Maximizes the symmetrized-KL functional over inputs with `E[cost] <= alpha`.
///
/// On a two-point support `{i, j}` the functional reduces to
/// `t (1 - t) D_sym(W_i || W_j)`, so every pair is solved exactly; projected-gradient
/// ascent from the best pair, the uniform law and seeded random starts then looks for
/// better points with larger support. The result is the best value found; it is a
/// certified global maximum only when two-point laws are known to suffice.
pub fn sym_kl_max(
    channel: &DiscreteChannel,
    alpha: Option<f64>,
    config: &SolverConfig,
) -> Result<SymKlResult> {
    config.validate()?;
    let n = channel.n_inputs();
    let cost = channel.cost();
    if let Some(a) = alpha {
        if !a.is_finite() || a < channel.min_cost() - COST_SLACK {
            return invalid(format!("alpha={a} admits no input distribution"));
        }
    }
    let quad = Quadratic::new(channel);

    // exhaustive two-point search; single points score zero
    let cheapest = (0..n).min_by(|&a, &b| cost[a].total_cmp(&cost[b])).unwrap_or(0);
    let mut best_val = 0.0;
    let mut best = vec![0.0; n];
    best[cheapest] = 1.0;
    for i in 0..n {
        for j in i + 1..n {
            let Some((tl, th)) = feasible_mass_interval(cost[i], cost[j], alpha) else {
                continue;
            };
            if th <= 0.0 || tl >= 1.0 {
                continue;
            }
            let dsym = quad.d[i] + quad.d[j] - quad.g(i, j) - quad.g(j, i);
            let t = 0.5f64.clamp(tl, th);
            if dsym.is_infinite() {
                let mut p = vec![0.0; n];
                p[i] = t;
                p[j] = 1.0 - t;
                return Ok(SymKlResult {
                    value: f64::INFINITY,
                    input_dist: p,
                    divergent: true,
                    starts: 0,
                });
            }
            let v = t * (1.0 - t) * dsym;
            if v > best_val {
                best_val = v;
                best = vec![0.0; n];
                best[i] = t;
                best[j] = 1.0 - t;
            }
        }
    }
    if n <= 2 {
        return Ok(SymKlResult {
            value: best_val,
            input_dist: best,
            divergent: false,
            starts: 0,
        });
    }

    let mut starts = vec![best.clone(), project_cost_simplex(&vec![1.0 / n as f64; n], cost, alpha)];
    let mut rng = ChaCha20Rng::seed_from_u64(SYMKL_SEED);
    for _ in 0..SYMKL_RANDOM_STARTS {
        // exponential weights give a uniform draw on the simplex
        let w: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
        let s: f64 = w.iter().sum();
        let w: Vec<f64> = w.iter().map(|x| x / s).collect();
        starts.push(project_cost_simplex(&w, cost, alpha));
    }
    let step = 1.0 / quad.curvature_bound().max(1e-12);
    let n_starts = starts.len();
    let refined: Vec<(f64, Vec<f64>)> = starts
        .into_par_iter()
        .map(|p0| projected_ascent(&quad, cost, alpha, p0, step, config))
        .collect();
    for (v, p) in refined {
        if v > best_val {
            best_val = v;
            best = p;
        }
    }
    Ok(SymKlResult {
        value: best_val.max(0.0),
        input_dist: best,
        divergent: false,
        starts: n_starts,
    })
}

fn projected_ascent(
    quad: &Quadratic,
    cost: &[f64],
    alpha: Option<f64>,
    mut p: Vec<f64>,
    step: f64,
    config: &SolverConfig,
) -> (f64, Vec<f64>) {
    let mut val = quad.value(&p);
    let max_iters = config.max_iters.min(100_000);
    for _ in 0..max_iters {
        let grad = quad.gradient(&p);
        let v: Vec<f64> = p.iter().zip(&grad).map(|(pi, gi)| pi + step * gi).collect();
        let next = project_cost_simplex(&v, cost, alpha);
        let next_val = quad.value(&next);
        let moved = p.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if next_val < val {
            break;
        }
        p = next;
        let improved = next_val - val;
        val = next_val;
        if moved < 1e-14 || improved < config.tol * 1e-6 {
            break;
        }
    }
    (val, p)
}

/// Gaussian channel `Y = X + N`, `N ~ Normal(mu, sigma^2)`, with the output line cut
/// into bins of width `step` covering `span` standard deviations past the extreme
/// inputs. Rows are normalized densities at bin centers; cost of `x` is `x^2`.
pub fn gaussian_channel(
    points: &[f64],
    sigma: f64,
    mu: f64,
    step: f64,
    span: f64,
) -> Result<DiscreteChannel> {
    if points.is_empty() {
        return invalid("gaussian channel needs input points");
    }
    if !(sigma > 0.0 && step > 0.0 && span > 0.0) {
        return invalid("sigma, step and span must be positive");
    }
    let lo = points.iter().copied().fold(f64::INFINITY, f64::min) + mu - span * sigma;
    let hi = points.iter().copied().fold(f64::NEG_INFINITY, f64::max) + mu + span * sigma;
    let n_out = ((hi - lo) / step).ceil() as usize + 1;
    let mut t = Vec::with_capacity(points.len() * n_out);
    for &x in points {
        let row: Vec<f64> = (0..n_out)
            .map(|k| {
                let z = (lo + k as f64 * step - x - mu) / sigma;
                (-0.5 * z * z).exp()
            })
            .collect();
        let s: f64 = row.iter().sum();
        t.extend(row.into_iter().map(|w| w / s));
    }
    DiscreteChannel::from_dense(
        points.len(),
        n_out,
        t,
        points.iter().map(|x| x * x).collect(),
    )
}
