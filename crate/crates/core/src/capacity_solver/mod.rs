//! Capacity and capacity-cost computation for finite channels.
//!
//! [`ba_capacity`] runs Blahut-Arimoto from the uniform input and stops on the
//! Csiszar duality gap `max_x D(W(.|x) || q) - I(p) <= tol`, so every result
//! carries a certified interval `[value, value + gap]`. An average-cost
//! constraint is handled with a Lagrange multiplier `s` on the cost, found by
//! bisection (capacity-cost is concave, so the optimal cost is monotone in `s`).

mod info;

pub use info::{
    binary_entropy_bits, entropy, mutual_information, output_distribution, row_divergence,
};
pub(crate) use info::check_distribution;
use info::{floored_ln, PAR_THRESHOLD};

use rayon::prelude::*;

use crate::channel_model::DiscreteChannel;
use crate::error::{invalid, Error, Result};

/// Input weights below this are set to zero.
const CLAMP_FLOOR: f64 = 1e-300;
/// Cost comparisons are made with this slack.
const COST_SLACK: f64 = 1e-12;
/// Uniform weight mixed into warm starts between multiplier updates.
const WARM_MIX: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Duality-gap stopping threshold, nats.
    pub tol: f64,
    pub max_iters: usize,
    /// Relative tolerance on `|E[cost] - alpha|` for the multiplier bisection.
    pub lagrange_bisect_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iters: 1_000_000,
            lagrange_bisect_tol: 1e-9,
        }
    }
}

impl SolverConfig {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return invalid(format!("solver tol must be positive, got {}", self.tol));
        }
        if self.max_iters == 0 {
            return invalid("max_iters must be at least 1");
        }
        if !(self.lagrange_bisect_tol > 0.0) {
            return invalid("lagrange_bisect_tol must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityResult {
    /// Mutual information of `input_dist`, nats per channel use.
    pub value: f64,
    pub input_dist: Vec<f64>,
    pub achieved_cost: f64,
    /// Blahut-Arimoto iterations summed over all inner solves.
    pub iterations: usize,
    /// Certified gap: the capacity (at this cost) lies in `[value, value + gap]`.
    pub gap: f64,
    /// Lagrange multiplier on the cost; zero when the constraint is inactive.
    pub multiplier: f64,
}

struct Run {
    dist: Vec<f64>,
    info: f64,
    cost: f64,
    /// `max_x (D_x - s c_x)` at the final iterate.
    upper: f64,
    gap: f64,
    iterations: usize,
}

/// `sum_y W(y|x) log W(y|x)` per row; fixed for the whole solve.
fn row_neg_entropies(channel: &DiscreteChannel) -> Vec<f64> {
    let f = |row: &[f64]| row.iter().filter(|w| **w > 0.0).map(|w| w * w.ln()).sum::<f64>();
    if channel.transition().len() >= PAR_THRESHOLD {
        channel.transition().par_chunks_exact(channel.n_outputs()).map(f).collect()
    } else {
        channel.rows().map(f).collect()
    }
}

/// `D(W(.|x) || q)` for every row as `negent_x - sum_y W(y|x) log q(y)`.
fn fast_divergences(channel: &DiscreteChannel, negent: &[f64], q: &[f64]) -> Vec<f64> {
    let log_q: Vec<f64> = q.iter().map(|v| floored_ln(*v)).collect();
    let f = |(row, h): (&[f64], &f64)| {
        let mut cross = 0.0;
        for (w, lq) in row.iter().zip(&log_q) {
            if *w > 0.0 {
                cross += w * lq;
            }
        }
        h - cross
    };
    if channel.transition().len() >= PAR_THRESHOLD {
        channel
            .transition()
            .par_chunks_exact(channel.n_outputs())
            .zip(negent.par_iter())
            .map(f)
            .collect()
    } else {
        channel.rows().zip(negent).map(f).collect()
    }
}

/// Blahut-Arimoto for `max_p I(p) - s E_p[cost]`, restricted to `allowed` inputs.
/// Starts from `init` when given, else from the uniform law on the allowed inputs.
fn blahut_arimoto(
    channel: &DiscreteChannel,
    negent: &[f64],
    s: f64,
    allowed: Option<&[bool]>,
    init: Option<&[f64]>,
    config: &SolverConfig,
    mut trace: Option<&mut Vec<(f64, f64)>>,
) -> Result<Run> {
    let n = channel.n_inputs();
    let cost = channel.cost();
    let is_allowed = |x: usize| allowed.is_none_or(|a| a[x]);
    let support = (0..n).filter(|&x| is_allowed(x)).count();
    if support == 0 {
        return invalid("no admissible input symbols");
    }
    let mut p: Vec<f64> = match init {
        Some(p0) => p0.to_vec(),
        None => (0..n)
            .map(|x| if is_allowed(x) { 1.0 / support as f64 } else { 0.0 })
            .collect(),
    };
    let mut gap = f64::INFINITY;
    for it in 0..config.max_iters {
        let q = output_distribution(channel, &p);
        let d = fast_divergences(channel, negent, &q);
        let info: f64 = p.iter().zip(&d).filter(|(px, _)| **px > 0.0).map(|(px, dx)| px * dx).sum();
        let mean_cost: f64 = p.iter().zip(cost).map(|(px, c)| px * c).sum();
        let lagr: Vec<f64> = d.iter().zip(cost).map(|(dx, c)| dx - s * c).collect();
        let upper = (0..n)
            .filter(|&x| is_allowed(x))
            .map(|x| lagr[x])
            .fold(f64::NEG_INFINITY, f64::max);
        gap = upper - (info - s * mean_cost);
        if let Some(t) = trace.as_deref_mut() {
            t.push((info, info + gap));
        }
        if gap <= config.tol {
            return Ok(Run {
                dist: p,
                info: info.max(0.0),
                cost: mean_cost,
                upper,
                gap: gap.max(0.0),
                iterations: it + 1,
            });
        }
        for x in 0..n {
            if p[x] > 0.0 {
                p[x] *= (lagr[x] - upper).exp();
            }
        }
        let total: f64 = p.iter().sum();
        for px in p.iter_mut() {
            *px /= total;
            if *px < CLAMP_FLOOR {
                *px = 0.0;
            }
        }
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|px| *px /= total);
    }
    Err(Error::NonConvergence {
        iterations: config.max_iters,
        gap,
    })
}

/// Warm start for the next multiplier: the previous law lightly mixed with the
/// uniform one so no symbol is stuck at zero.
fn warm_start(prev: &[f64]) -> Vec<f64> {
    let n = prev.len() as f64;
    prev.iter().map(|p| (1.0 - WARM_MIX) * p + WARM_MIX / n).collect()
}

fn into_result(run: Run, multiplier: f64, alpha: Option<f64>, iterations: usize) -> CapacityResult {
    // C(alpha) <= max_x (D_x - s c_x) + s alpha for any s >= 0
    let gap = match alpha {
        Some(a) if multiplier > 0.0 => (run.upper + multiplier * a - run.info).max(0.0),
        _ => run.gap,
    };
    CapacityResult {
        value: run.info,
        input_dist: run.dist,
        achieved_cost: run.cost,
        iterations,
        gap,
        multiplier,
    }
}

/// Capacity of `channel`, optionally under `E[cost] <= alpha`.
///
/// Without a constraint this is plain Blahut-Arimoto. With one, the unconstrained
/// optimum is returned if it is already feasible; otherwise the multiplier `s` is
/// bisected until the optimal cost is within `lagrange_bisect_tol * alpha` of `alpha`
/// from below.
pub fn ba_capacity(
    channel: &DiscreteChannel,
    alpha: Option<f64>,
    config: &SolverConfig,
) -> Result<CapacityResult> {
    config.validate()?;
    let negent = row_neg_entropies(channel);
    let free = blahut_arimoto(channel, &negent, 0.0, None, None, config, None)?;
    let alpha = match alpha {
        None => {
            let it = free.iterations;
            return Ok(into_result(free, 0.0, None, it));
        }
        Some(a) => a,
    };
    if !alpha.is_finite() {
        return invalid(format!("alpha must be finite, got {alpha}"));
    }
    if free.cost <= alpha + COST_SLACK {
        let it = free.iterations;
        return Ok(into_result(free, 0.0, Some(alpha), it));
    }
    constrained(channel, &negent, alpha, config, free.iterations)
}

fn constrained(
    channel: &DiscreteChannel,
    negent: &[f64],
    alpha: f64,
    config: &SolverConfig,
    mut iterations: usize,
) -> Result<CapacityResult> {
    let min_cost = channel.min_cost();
    if alpha < min_cost - COST_SLACK {
        return invalid(format!("alpha={alpha} is below the cheapest input cost {min_cost}"));
    }
    if alpha <= min_cost + COST_SLACK {
        // only the cheapest symbols are feasible
        let mask: Vec<bool> = channel.cost().iter().map(|c| *c <= min_cost + COST_SLACK).collect();
        let run = blahut_arimoto(channel, negent, 0.0, Some(&mask), None, config, None)?;
        iterations += run.iterations;
        return Ok(into_result(run, 0.0, None, iterations));
    }

    let target = |run: &Run| (run.cost - alpha).abs() <= config.lagrange_bisect_tol * alpha;
    let mut s_lo = 0.0;
    let mut s_hi = 1.0 / channel.max_cost().max(f64::MIN_POSITIVE);
    let mut hi = blahut_arimoto(channel, negent, s_hi, None, None, config, None)?;
    iterations += hi.iterations;
    let mut doublings = 0;
    while hi.cost > alpha {
        s_lo = s_hi;
        s_hi *= 2.0;
        doublings += 1;
        if doublings > 200 {
            return invalid(format!("no multiplier brings the cost down to alpha={alpha}"));
        }
        hi = blahut_arimoto(channel, negent, s_hi, None, Some(&warm_start(&hi.dist)), config, None)?;
        iterations += hi.iterations;
    }
    let mut last = hi.dist.clone();
    while !target(&hi) && s_hi - s_lo > 1e-15 * s_hi {
        let mid = 0.5 * (s_lo + s_hi);
        let run = blahut_arimoto(channel, negent, mid, None, Some(&warm_start(&last)), config, None)?;
        iterations += run.iterations;
        last.clone_from(&run.dist);
        if run.cost > alpha {
            s_lo = mid;
        } else {
            s_hi = mid;
            hi = run;
        }
    }
    Ok(into_result(hi, s_hi, Some(alpha), iterations))
}

/// Capacity-cost values at each of `alphas` (ascending).
pub fn capacity_cost_curve(
    channel: &DiscreteChannel,
    alphas: &[f64],
    config: &SolverConfig,
) -> Result<Vec<CapacityResult>> {
    config.validate()?;
    if alphas.windows(2).any(|w| w[1] < w[0]) {
        return invalid("alphas must be sorted ascending");
    }
    let negent = row_neg_entropies(channel);
    let free = blahut_arimoto(channel, &negent, 0.0, None, None, config, None)?;
    let free_iters = free.iterations;
    let free_cost = free.cost;
    let free = into_result(free, 0.0, None, free_iters);
    alphas
        .iter()
        .map(|&a| {
            if free_cost <= a + COST_SLACK {
                Ok(free.clone())
            } else {
                constrained(channel, &negent, a, config, 0)
            }
        })
        .collect()
}

/// Per-iteration `(I(p_t), I(p_t) + gap_t)` of unconstrained Blahut-Arimoto.
pub fn ba_trace(channel: &DiscreteChannel, config: &SolverConfig) -> Result<Vec<(f64, f64)>> {
    config.validate()?;
    let mut trace = Vec::new();
    let negent = row_neg_entropies(channel);
    blahut_arimoto(channel, &negent, 0.0, None, None, config, Some(&mut trace))?;
    Ok(trace)
}
