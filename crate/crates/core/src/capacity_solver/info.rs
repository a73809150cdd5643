use crate::channel_model::DiscreteChannel;
use crate::error::{invalid, Result};

const DIST_SUM_TOL: f64 = 1e-9;
/// Below this many matrix entries the row loops stay serial.
pub(crate) const PAR_THRESHOLD: usize = 1 << 16;

pub(crate) fn check_distribution(dist: &[f64], n: usize) -> Result<()> {
    if dist.len() != n {
        return invalid(format!("distribution has {} entries, expected {n}", dist.len()));
    }
    if dist.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return invalid("distribution has a negative or non-finite entry");
    }
    let s: f64 = dist.iter().sum();
    if (s - 1.0).abs() > DIST_SUM_TOL {
        return invalid(format!("distribution sums to {s}, not 1"));
    }
    Ok(())
}

/// `q(y) = sum_x p(x) W(y|x)`.
pub fn output_distribution(channel: &DiscreteChannel, input: &[f64]) -> Vec<f64> {
    let mut q = vec![0.0; channel.n_outputs()];
    for (row, &px) in channel.rows().zip(input) {
        if px == 0.0 {
            continue;
        }
        for (qy, w) in q.iter_mut().zip(row) {
            *qy += px * w;
        }
    }
    q
}

/// `ln q`, with `q` raised to the smallest normal float first. Output masses that
/// underflow (a denormal row entry times a tiny input weight) would otherwise turn a
/// negligible term into an infinite divergence.
pub(crate) fn floored_ln(q: f64) -> f64 {
    q.max(f64::MIN_POSITIVE).ln()
}

/// `D(W(.|x) || q)` for one row, in nats. Terms with `W = 0` vanish; `q` is floored
/// as in [`floored_ln`], so the result is finite.
pub fn row_divergence(row: &[f64], q: &[f64]) -> f64 {
    row.iter()
        .zip(q)
        .filter(|(w, _)| **w > 0.0)
        .map(|(w, qy)| w * (w.ln() - floored_ln(*qy)))
        .sum()
}

/// `I(X;Y) = sum_{x,y} p(x) W(y|x) log(W(y|x)/q(y))` in nats.
pub fn mutual_information(channel: &DiscreteChannel, input: &[f64]) -> Result<f64> {
    check_distribution(input, channel.n_inputs())?;
    let q = output_distribution(channel, input);
    let value: f64 = channel
        .rows()
        .zip(input)
        .filter(|(_, p)| **p > 0.0)
        .map(|(row, p)| p * row_divergence(row, &q))
        .sum();
    Ok(value.max(0.0))
}

/// Shannon entropy in nats.
pub fn entropy(dist: &[f64]) -> f64 {
    -dist
        .iter()
        .filter(|p| **p > 0.0)
        .map(|p| p * p.ln())
        .sum::<f64>()
}

/// Binary entropy in bits.
pub fn binary_entropy_bits(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}
