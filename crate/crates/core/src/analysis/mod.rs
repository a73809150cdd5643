//! Structural analyses: degradedness of impulse responses, capacity ordering,
//! monotonicity sweeps and the intensity sufficient statistic.

mod degrade;

pub use degrade::{check_degraded, DegradednessReport, GUARD_TAPS};

use rayon::prelude::*;

use crate::bounds::{theorem1_bounds, SandwichBound};
use crate::capacity_solver::{check_distribution, SolverConfig};
use crate::channel_model::{
    BlockChannelSpec, ChannelSpec, DiscreteChannel, ImpulseResponse, InputGrid, TupleIndexer,
};
use crate::error::{invalid, Result};

/// Tolerance used to decide degradedness inside [`capacity_ordering_check`].
pub const DEGRADE_TOL: f64 = 1e-10;
/// Slack allowed against the predicted direction in [`monotonicity_sweep`].
pub const MONOTONE_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Consistent,
    /// The computable surrogates disagree; retry at larger `r`.
    Flagged,
    /// `p'` is not a degraded version of `p`.
    NotApplicable,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Consistent => "consistent",
            Verdict::Flagged => "flagged",
            Verdict::NotApplicable => "not-applicable",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderingReport {
    pub verdict: Verdict,
    pub degradedness: DegradednessReport,
    /// Block bounds for `p` and `p'`; absent when the check is not applicable.
    pub original: Option<SandwichBound>,
    pub degraded: Option<SandwichBound>,
}

/// Compares the size-`r` block bounds of `p` and of a degraded `p' = p * q`
/// on otherwise identical instances (`base` supplies `lambda0`, `amax`, `alpha`).
/// Consistent when `lower(p) <= upper(p)` and `C_r(p) >= C_r(p') - config.tol`.
///
/// Both block channels use the memory order of the longer response (`p` is padded
/// with zero taps), so the per-slot cost is averaged over the same `k + r` inputs.
pub fn capacity_ordering_check(
    p: &ImpulseResponse,
    p_prime: &ImpulseResponse,
    base: &ChannelSpec,
    grid: &InputGrid,
    r: usize,
    tail_eps: f64,
    config: &SolverConfig,
) -> Result<OrderingReport> {
    let degradedness = check_degraded(p, p_prime, DEGRADE_TOL)?;
    if !degradedness.feasible {
        return Ok(OrderingReport {
            verdict: Verdict::NotApplicable,
            degradedness,
            original: None,
            degraded: None,
        });
    }
    let len = p.taps().len().max(p_prime.taps().len());
    let bounds = |imp: &ImpulseResponse| -> Result<SandwichBound> {
        let mut taps = imp.taps().to_vec();
        taps.resize(len, 0.0);
        let spec = ChannelSpec::new(ImpulseResponse::new(taps)?, base.lambda0, base.amax, base.alpha)?;
        theorem1_bounds(&BlockChannelSpec::new(spec, grid.clone(), r, tail_eps)?, config)
    };
    let original = bounds(p)?;
    let degraded = bounds(p_prime)?;
    let ok = original.lower <= original.upper && original.upper >= degraded.upper - config.tol;
    Ok(OrderingReport {
        verdict: if ok { Verdict::Consistent } else { Verdict::Flagged },
        degradedness,
        original: Some(original),
        degraded: Some(degraded),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Alpha,
    Amax,
    Lambda0,
}

impl SweepAxis {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "alpha" => Ok(Self::Alpha),
            "amax" | "A" => Ok(Self::Amax),
            "lambda0" => Ok(Self::Lambda0),
            other => invalid(format!("unknown sweep axis '{other}' (alpha, amax, lambda0)")),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Alpha => "alpha",
            Self::Amax => "amax",
            Self::Lambda0 => "lambda0",
        }
    }

    /// Report label of the monotonicity verdict.
    pub fn verdict_label(&self) -> &'static str {
        match self {
            Self::Alpha => "monotone-α",
            Self::Amax => "monotone-A",
            Self::Lambda0 => "monotone-λ0",
        }
    }

    /// Capacity grows along alpha and amax and shrinks along lambda0.
    pub fn increasing(&self) -> bool {
        !matches!(self, Self::Lambda0)
    }

    pub fn apply(&self, spec: &ChannelSpec, value: f64) -> Result<ChannelSpec> {
        match self {
            Self::Alpha => spec.with_alpha(value),
            Self::Amax => spec.with_amax(value),
            Self::Lambda0 => spec.with_lambda0(value),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub bound: SandwichBound,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint>,
    /// Whether the block upper bounds move in the predicted direction within [`MONOTONE_SLACK`].
    pub monotone: bool,
}

/// Block bounds of size `r` along `axis`, on `grid_points` uniform points over
/// `[0, amax]`. Along the `amax` axis the grid at each value is the union of the
/// uniform grids of every value up to it, so feasible sets are nested and the
/// computed bounds can only grow; independent uniform grids coarsen as `amax` grows.
pub fn monotonicity_sweep(
    spec: &ChannelSpec,
    axis: SweepAxis,
    values: &[f64],
    grid_points: usize,
    r: usize,
    tail_eps: f64,
    config: &SolverConfig,
) -> Result<SweepReport> {
    if values.is_empty() {
        return invalid("sweep needs at least one value");
    }
    if values.windows(2).any(|w| w[1] < w[0]) {
        return invalid("sweep values must be sorted ascending");
    }
    let grids = sweep_grids(spec, axis, values, grid_points)?;
    let points = values
        .par_iter()
        .zip(grids)
        .map(|(&v, grid)| {
            let s = axis.apply(spec, v)?;
            let bound = theorem1_bounds(&BlockChannelSpec::new(s, grid, r, tail_eps)?, config)?;
            Ok(SweepPoint { value: v, bound })
        })
        .collect::<Result<Vec<_>>>()?;
    let monotone = points.windows(2).all(|w| {
        let (a, b) = (w[0].bound.upper, w[1].bound.upper);
        if axis.increasing() {
            b >= a - MONOTONE_SLACK
        } else {
            b <= a + MONOTONE_SLACK
        }
    });
    Ok(SweepReport {
        axis,
        points,
        monotone,
    })
}

fn sweep_grids(
    spec: &ChannelSpec,
    axis: SweepAxis,
    values: &[f64],
    grid_points: usize,
) -> Result<Vec<InputGrid>> {
    if axis != SweepAxis::Amax {
        let grid = InputGrid::uniform(spec.amax, grid_points)?;
        return Ok(vec![grid; values.len()]);
    }
    let mut acc: Vec<f64> = Vec::new();
    values
        .iter()
        .map(|&a| {
            acc.extend(InputGrid::uniform(a, grid_points)?.points());
            acc.sort_by(f64::total_cmp);
            acc.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * a);
            InputGrid::new(acc.clone())
        })
        .collect()
}

/// Channel intensity `lambda0 + sum_j p_j x_{k+1-j}` of every tuple in `grid^{k+1}`.
pub fn window_intensities(spec: &ChannelSpec, grid: &InputGrid) -> Vec<f64> {
    let k = spec.memory();
    let taps = spec.impulse.taps();
    let ix = TupleIndexer::new(grid.len(), k + 1);
    (0..ix.count())
        .map(|t| {
            let d = ix.decode(t);
            spec.lambda0 + (0..=k).map(|j| taps[j] * grid.points()[d[k - j]]).sum::<f64>()
        })
        .collect()
}

/// Merges inputs of `channel` that share an intensity (within `1e-9`): returns the
/// channel from `S` to `Y` and the law of `S` induced by `input`. Rows of merged
/// inputs are averaged with their input weights.
pub fn aggregate_by_intensity(
    channel: &DiscreteChannel,
    intensities: &[f64],
    input: &[f64],
) -> Result<(DiscreteChannel, Vec<f64>)> {
    check_distribution(input, channel.n_inputs())?;
    if intensities.len() != channel.n_inputs() {
        return invalid("one intensity per input is required");
    }
    let mut order: Vec<usize> = (0..intensities.len()).collect();
    order.sort_by(|&a, &b| intensities[a].total_cmp(&intensities[b]));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &x in &order {
        match groups.last_mut() {
            Some(g) if (intensities[x] - intensities[g[0]]).abs() <= 1e-9 => g.push(x),
            _ => groups.push(vec![x]),
        }
    }
    let ny = channel.n_outputs();
    let mut rows = Vec::with_capacity(groups.len());
    let mut law = Vec::with_capacity(groups.len());
    let mut cost = Vec::with_capacity(groups.len());
    for g in &groups {
        let mass: f64 = g.iter().map(|&x| input[x]).sum();
        let mut row = vec![0.0; ny];
        for &x in g {
            let w = if mass > 0.0 { input[x] / mass } else { 1.0 / g.len() as f64 };
            for (r, v) in row.iter_mut().zip(channel.row(x)) {
                *r += w * v;
            }
        }
        rows.push(row);
        law.push(mass);
        cost.push(intensities[g[0]]);
    }
    Ok((DiscreteChannel::from_rows(rows, cost)?, law))
}
