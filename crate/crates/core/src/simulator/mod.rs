//! Monte Carlo simulation of the LTI-Poisson channel and its network law.
//!
//! Trial `t` of a run with seed `s` draws from ChaCha20 stream `t` of key `s`, so
//! trials are independent, can run in any order or in parallel, and a run is
//! reproduced exactly by its seed.

mod estimate;
mod sampler;

pub use estimate::{plugin_mi_estimate, MiEstimate};
pub use sampler::{sample_poisson, stream_rng, INVERSION_LIMIT};

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, DiscreteCDF, Poisson};

use crate::channel_model::{convolve, ChannelSpec, NetworkSpec};
use crate::error::{invalid, Result};

const PEAK_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub seed: u64,
    pub n_slots: usize,
    pub n_trials: usize,
}

impl SimConfig {
    pub fn new(seed: u64, n_slots: usize, n_trials: usize) -> Result<Self> {
        if n_slots == 0 || n_trials == 0 {
            return invalid("n_slots and n_trials must be at least 1");
        }
        Ok(Self {
            seed,
            n_slots,
            n_trials,
        })
    }
}

/// One trial: transmitter intensities and receiver counts, slot-aligned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    /// `inputs[l][i]`, bit patterns of the intensities so traces compare exactly.
    inputs: Vec<Vec<u64>>,
    pub outputs: Vec<Vec<u64>>,
}

impl Trace {
    pub fn inputs(&self) -> Vec<Vec<f64>> {
        self.inputs
            .iter()
            .map(|x| x.iter().map(|b| f64::from_bits(*b)).collect())
            .collect()
    }

    pub fn n_slots(&self) -> usize {
        self.outputs.first().map_or(0, Vec::len)
    }
}

fn pad(inputs: &[f64], n_slots: usize) -> Result<Vec<f64>> {
    if inputs.len() > n_slots {
        return invalid(format!(
            "{} inputs do not fit in {n_slots} slots",
            inputs.len()
        ));
    }
    let mut x = inputs.to_vec();
    x.resize(n_slots, 0.0);
    Ok(x)
}

fn check_peak(x: &[f64], amax: f64) -> Result<()> {
    if let Some(v) = x.iter().find(|v| !(v.is_finite() && **v >= 0.0 && **v <= amax + PEAK_SLACK)) {
        return invalid(format!("input {v} lies outside [0, {amax}]"));
    }
    Ok(())
}

/// Draws counts for every trial given per-receiver intensity sequences.
fn draw(intensities: &[Vec<f64>], inputs: &[Vec<f64>], sim: &SimConfig) -> Vec<Trace> {
    let inputs: Vec<Vec<u64>> = inputs
        .iter()
        .map(|x| x.iter().map(|v| v.to_bits()).collect())
        .collect();
    (0..sim.n_trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(sim.seed, t as u64);
            let mut outputs = vec![vec![0; sim.n_slots]; intensities.len()];
            for i in 0..sim.n_slots {
                for (j, lam) in intensities.iter().enumerate() {
                    outputs[j][i] = sample_poisson(&mut rng, lam[i]);
                }
            }
            Trace {
                inputs: inputs.clone(),
                outputs,
            }
        })
        .collect()
}

/// Point-to-point simulation. `inputs` (within `[0, amax]`) are zero-padded to
/// `n_slots`; slot `i` counts `Poisson(lambda0 + (x * p)_i)`.
pub fn simulate_p2p(spec: &ChannelSpec, inputs: &[f64], sim: &SimConfig) -> Result<Vec<Trace>> {
    let x = pad(inputs, sim.n_slots)?;
    check_peak(&x, spec.amax)?;
    let lam: Vec<f64> = convolve(&x, &spec.impulse)
        .into_iter()
        .map(|s| spec.lambda0 + s)
        .collect();
    Ok(draw(&[lam], &[x], sim))
}

/// Network simulation: receiver `j` counts `Poisson(lambda0 + sum_l (x_l * p_{l,j})_i)`,
/// receivers independent given the inputs. Each transmitter's padded sequence must
/// respect its peak and its average constraint.
pub fn simulate_network(
    net: &NetworkSpec,
    inputs: &[Vec<f64>],
    sim: &SimConfig,
) -> Result<Vec<Trace>> {
    if inputs.len() != net.transmitters() {
        return invalid(format!(
            "expected {} input sequences, got {}",
            net.transmitters(),
            inputs.len()
        ));
    }
    let padded: Vec<Vec<f64>> = inputs
        .iter()
        .map(|x| pad(x, sim.n_slots))
        .collect::<Result<_>>()?;
    for (x, &(amax, alpha)) in padded.iter().zip(&net.constraints) {
        check_peak(x, amax)?;
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        if mean > alpha + PEAK_SLACK {
            return invalid(format!("average input {mean} exceeds alpha={alpha}"));
        }
    }
    let lam = net.intensities(&padded)?;
    Ok(draw(&lam, &padded, sim))
}

/// Per-slot sample mean and standard error of receiver `rx` across trials.
pub fn slot_means(traces: &[Trace], rx: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = traces.len();
    if n < 2 {
        return invalid("need at least two trials for standard errors");
    }
    let slots = traces[0].n_slots();
    let mut means = vec![0.0; slots];
    let mut ses = vec![0.0; slots];
    for i in 0..slots {
        let ys: Vec<f64> = traces.iter().map(|t| t.outputs[rx][i] as f64).collect();
        let m = ys.iter().sum::<f64>() / n as f64;
        let var = ys.iter().map(|y| (y - m) * (y - m)).sum::<f64>() / (n - 1) as f64;
        means[i] = m;
        ses[i] = (var / n as f64).sqrt();
    }
    Ok((means, ses))
}

/// Releases `Poisson(x)` molecules and routes each independently to slot `j` with
/// probability `taps[j]` (or loses it with the remaining probability).
pub fn thinning_split<R: Rng + ?Sized>(rng: &mut R, x: f64, taps: &[f64]) -> Vec<u64> {
    let mut counts = vec![0; taps.len()];
    for _ in 0..sample_poisson(rng, x) {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (c, p) in counts.iter_mut().zip(taps) {
            acc += p;
            if u < acc {
                *c += 1;
                break;
            }
        }
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Chi-square goodness of fit of [`thinning_split`] counts against independent
/// `Poisson(x p_j)` slots, over the joint histogram of per-slot counts. Each slot's
/// counts above its 99.9% quantile share one tail bin, and cells expecting fewer than
/// five hits are pooled.
pub fn thinning_chi_square(x: f64, taps: &[f64], n_trials: usize, seed: u64) -> Result<ChiSquareTest> {
    if taps.is_empty() || taps.iter().any(|p| !(*p > 0.0)) || taps.iter().sum::<f64>() > 1.0 + 1e-12 {
        return invalid("taps must be positive and sum to at most 1");
    }
    if !(x > 0.0 && x.is_finite()) {
        return invalid("release intensity must be positive");
    }
    let laws: Vec<Poisson> = taps
        .iter()
        .map(|p| Poisson::new(x * p).expect("positive rate"))
        .collect();
    let caps: Vec<u64> = laws.iter().map(|d| d.inverse_cdf(0.999)).collect();
    // per-slot bin probabilities, last bin is the tail
    let bins: Vec<Vec<f64>> = laws
        .iter()
        .zip(&caps)
        .map(|(d, &cap)| {
            let mut b: Vec<f64> = (0..cap).map(|y| d.pmf(y)).collect();
            b.push(d.sf(cap - 1));
            b
        })
        .collect();
    let sizes: Vec<usize> = bins.iter().map(Vec::len).collect();
    let cells: usize = sizes.iter().product();
    let cell_of = |counts: &[u64]| {
        counts
            .iter()
            .zip(&caps)
            .zip(&sizes)
            .fold(0, |acc, ((c, cap), n)| acc * n + (*c).min(*cap) as usize)
    };
    let mut observed = vec![0.0; cells];
    let mut rng = stream_rng(seed, 0);
    for _ in 0..n_trials {
        observed[cell_of(&thinning_split(&mut rng, x, taps))] += 1.0;
    }
    let mut expected = vec![0.0; cells];
    for (c, e) in expected.iter_mut().enumerate() {
        let mut rest = c;
        let mut prob = 1.0;
        for (b, n) in bins.iter().zip(&sizes).rev() {
            prob *= b[rest % n];
            rest /= n;
        }
        *e = prob * n_trials as f64;
    }
    let (mut stat, mut kept) = (0.0, 0usize);
    let (mut pool_o, mut pool_e) = (0.0, 0.0);
    for (o, e) in observed.iter().zip(&expected) {
        if *e >= 5.0 {
            stat += (o - e) * (o - e) / e;
            kept += 1;
        } else {
            pool_o += o;
            pool_e += e;
        }
    }
    if pool_e > 0.0 {
        stat += (pool_o - pool_e) * (pool_o - pool_e) / pool_e;
        kept += 1;
    }
    if kept < 2 {
        return invalid("too few trials for a chi-square test");
    }
    let dof = kept - 1;
    let p_value = ChiSquared::new(dof as f64)
        .expect("positive dof")
        .sf(stat);
    Ok(ChiSquareTest {
        statistic: stat,
        dof,
        p_value,
    })
}

/// Writes `trial,slot,tx_id,x` and `trial,slot,rx_id,y` tables (slots 1-indexed),
/// each preceded by `comment` when given.
pub fn write_trace_csv(
    traces: &[Trace],
    tx_path: &Path,
    rx_path: &Path,
    comment: Option<&str>,
) -> Result<()> {
    let mut tx = std::io::BufWriter::new(std::fs::File::create(tx_path)?);
    let mut rx = std::io::BufWriter::new(std::fs::File::create(rx_path)?);
    if let Some(c) = comment {
        writeln!(tx, "{c}")?;
        writeln!(rx, "{c}")?;
    }
    writeln!(tx, "trial,slot,tx_id,x")?;
    writeln!(rx, "trial,slot,rx_id,y")?;
    for (t, trace) in traces.iter().enumerate() {
        for (l, x) in trace.inputs().iter().enumerate() {
            for (i, v) in x.iter().enumerate() {
                writeln!(tx, "{t},{},{l},{v}", i + 1)?;
            }
        }
        for (j, y) in trace.outputs.iter().enumerate() {
            for (i, v) in y.iter().enumerate() {
                writeln!(rx, "{t},{},{j},{v}", i + 1)?;
            }
        }
    }
    tx.flush()?;
    rx.flush()?;
    Ok(())
}
