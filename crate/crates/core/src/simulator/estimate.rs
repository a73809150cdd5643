use crate::capacity_solver::check_distribution;
use crate::channel_model::DiscreteChannel;
use crate::error::{invalid, Result};

use super::sampler::stream_rng;
use rand::Rng;

/// Plug-in mutual information of an empirical joint histogram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiEstimate {
    /// Plug-in estimate, nats (not bias corrected).
    pub value: f64,
    /// Delete-one jackknife standard error.
    pub std_error: f64,
    /// First-order bias `(|X| - 1)(|Y| - 1) / (2n)` over the observed symbols.
    pub bias: f64,
    pub n_samples: usize,
}

fn xlogx(c: f64) -> f64 {
    if c > 0.0 {
        c * c.ln()
    } else {
        0.0
    }
}

fn cumulative(dist: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    dist.iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect()
}

fn invert(cdf: &[f64], u: f64) -> usize {
    // first index with cdf > u; rounding short of 1 falls back to the last symbol
    cdf.partition_point(|c| *c <= u).min(cdf.len() - 1)
}

/// Samples `n_samples` i.i.d. pairs `x ~ input`, `y ~ W(.|x)` and returns the plug-in
/// mutual information with a jackknife standard error. The estimator is biased
/// upward by `O(|X||Y|/n)`; the first-order term is reported, not subtracted.
pub fn plugin_mi_estimate(
    channel: &DiscreteChannel,
    input: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<MiEstimate> {
    check_distribution(input, channel.n_inputs())?;
    let (nx, ny) = (channel.n_inputs(), channel.n_outputs());
    if n_samples < 10 * nx * ny {
        return invalid(format!(
            "n_samples={n_samples} is below 10 * |X| * |Y| = {}",
            10 * nx * ny
        ));
    }
    let in_cdf = cumulative(input);
    let row_cdfs: Vec<Vec<f64>> = channel.rows().map(cumulative).collect();
    let mut joint = vec![0u64; nx * ny];
    let mut rng = stream_rng(seed, 0);
    for _ in 0..n_samples {
        let x = invert(&in_cdf, rng.gen());
        let y = invert(&row_cdfs[x], rng.gen());
        joint[x * ny + y] += 1;
    }

    let mut cx = vec![0.0; nx];
    let mut cy = vec![0.0; ny];
    for x in 0..nx {
        for y in 0..ny {
            let c = joint[x * ny + y] as f64;
            cx[x] += c;
            cy[y] += c;
        }
    }
    let n = n_samples as f64;
    let sxy: f64 = joint.iter().map(|c| xlogx(*c as f64)).sum();
    let sx: f64 = cx.iter().map(|c| xlogx(*c)).sum();
    let sy: f64 = cy.iter().map(|c| xlogx(*c)).sum();
    let mi = |sxy: f64, sx: f64, sy: f64, n: f64| (sxy - sx - sy + xlogx(n)) / n;
    let value = mi(sxy, sx, sy, n).max(0.0);

    // leaving out one sample of cell (x, y) changes three counts and n
    let mut loo = Vec::new();
    for x in 0..nx {
        for y in 0..ny {
            let c = joint[x * ny + y] as f64;
            if c == 0.0 {
                continue;
            }
            let th = mi(
                sxy - xlogx(c) + xlogx(c - 1.0),
                sx - xlogx(cx[x]) + xlogx(cx[x] - 1.0),
                sy - xlogx(cy[y]) + xlogx(cy[y] - 1.0),
                n - 1.0,
            );
            loo.push((c, th));
        }
    }
    let mean_loo: f64 = loo.iter().map(|(c, th)| c * th).sum::<f64>() / n;
    let ss: f64 = loo.iter().map(|(c, th)| c * (th - mean_loo) * (th - mean_loo)).sum();
    let std_error = ((n - 1.0) / n * ss).sqrt();

    let seen_x = cx.iter().filter(|c| **c > 0.0).count() as f64;
    let seen_y = cy.iter().filter(|c| **c > 0.0).count() as f64;
    Ok(MiEstimate {
        value,
        std_error,
        bias: (seen_x - 1.0).max(0.0) * (seen_y - 1.0).max(0.0) / (2.0 * n),
        n_samples,
    })
}
