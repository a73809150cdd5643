//! LTI-Poisson problem instances and their finite discrete channels.
//!
//! An instance is an impulse response `p` (hitting probabilities), a background
//! intensity `lambda0`, a peak constraint `amax` and an average constraint
//! `alpha`. The output in slot `i` is `Poisson(lambda0 + sum_j p_j x_{i-j})`.
//! Solvers never see the continuous model: they consume a [`DiscreteChannel`],
//! a row-stochastic matrix over a finite input grid and a truncated output
//! alphabet, together with a per-input cost vector.

mod block;
mod network;
mod poisson;
mod problem;

pub use block::{build_block_channel, BlockChannelSpec, TupleIndexer, DEFAULT_ENTRY_BUDGET};
pub use network::NetworkSpec;
pub use poisson::{poisson_pmf, poisson_pmf_on, truncation_point, TruncatedPmf};
pub use problem::ProblemFile;

use crate::error::{invalid, Result};

/// Default output truncation tolerance.
pub const DEFAULT_TAIL_EPS: f64 = 1e-10;
/// Default number of grid points on `[0, amax]`.
pub const DEFAULT_GRID_POINTS: usize = 9;

const ROW_SUM_TOL: f64 = 1e-9;

/// Nonnegative hitting probabilities `(p_0, ..., p_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseResponse {
    taps: Vec<f64>,
}

impl ImpulseResponse {
    pub fn new(taps: Vec<f64>) -> Result<Self> {
        if taps.is_empty() {
            return invalid("impulse response needs at least one tap");
        }
        if let Some(t) = taps.iter().find(|t| !t.is_finite() || **t < 0.0) {
            return invalid(format!("impulse taps must be finite and nonnegative, got {t}"));
        }
        let sum: f64 = taps.iter().sum();
        if sum > 1.0 + 1e-12 {
            return invalid(format!("hitting probabilities sum to {sum} > 1"));
        }
        Ok(Self { taps })
    }

    /// The identity filter `p = (1)`: the memoryless Poisson channel.
    pub fn memoryless() -> Self {
        Self { taps: vec![1.0] }
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Memory order `k`, i.e. the number of taps minus one.
    pub fn memory(&self) -> usize {
        self.taps.len() - 1
    }

    pub fn total(&self) -> f64 {
        self.taps.iter().sum()
    }

    /// Rescales the taps to sum to one.
    pub fn normalize(&self) -> Result<Self> {
        let total = self.total();
        if total <= 0.0 {
            return invalid("cannot normalize an all-zero impulse response");
        }
        let mut taps: Vec<f64> = self.taps.iter().map(|t| t / total).collect();
        let resid = 1.0 - taps.iter().sum::<f64>();
        // push the rounding residue into the largest tap so the sum is 1 to the last ulp
        let imax = (0..taps.len())
            .max_by(|&a, &b| taps[a].total_cmp(&taps[b]))
            .unwrap_or(0);
        taps[imax] += resid;
        Ok(Self { taps })
    }

    /// Drops trailing zero taps (keeps at least one tap).
    pub fn trimmed(&self) -> Self {
        let mut taps = self.taps.clone();
        while taps.len() > 1 && taps.last() == Some(&0.0) {
            taps.pop();
        }
        Self { taps }
    }

    /// Full linear convolution of the two tap sequences.
    pub fn convolve_with(&self, other: &[f64]) -> Vec<f64> {
        full_convolution(&self.taps, other)
    }
}

pub(crate) fn full_convolution(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Truncated convolution `s_i = sum_{j=0}^{min(i-1,k)} p_j x_{i-j}` (1-indexed),
/// i.e. the first `n` terms of `x * p` with `x_j = 0` before the first slot.
pub fn convolve(inputs: &[f64], impulse: &ImpulseResponse) -> Vec<f64> {
    let taps = impulse.taps();
    (0..inputs.len())
        .map(|i| {
            taps.iter()
                .take(i + 1)
                .enumerate()
                .map(|(j, p)| p * inputs[i - j])
                .sum()
        })
        .collect()
}

/// A complete LTI-Poisson problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    pub impulse: ImpulseResponse,
    pub lambda0: f64,
    pub amax: f64,
    pub alpha: f64,
}

impl ChannelSpec {
    pub fn new(impulse: ImpulseResponse, lambda0: f64, amax: f64, alpha: f64) -> Result<Self> {
        if !(lambda0.is_finite() && lambda0 >= 0.0) {
            return invalid(format!("lambda0 must be finite and nonnegative, got {lambda0}"));
        }
        if !(amax.is_finite() && amax > 0.0) {
            return invalid(format!("amax must be finite and positive, got {amax}"));
        }
        if !(alpha.is_finite() && (0.0..=amax).contains(&alpha)) {
            return invalid(format!("alpha must lie in [0, amax={amax}], got {alpha}"));
        }
        Ok(Self {
            impulse,
            lambda0,
            amax,
            alpha,
        })
    }

    pub fn memory(&self) -> usize {
        self.impulse.memory()
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(self.impulse.clone(), self.lambda0, self.amax, alpha)
    }

    pub fn with_lambda0(&self, lambda0: f64) -> Result<Self> {
        Self::new(self.impulse.clone(), lambda0, self.amax, self.alpha)
    }

    pub fn with_amax(&self, amax: f64) -> Result<Self> {
        Self::new(self.impulse.clone(), self.lambda0, amax, self.alpha)
    }
}

/// `C(A, alpha, p, lambda0) = C(beta A, beta alpha, p / beta, lambda0)`: returns the
/// rescaled instance. Fails when a rescaled tap would leave the probability range.
pub fn scale_invariance_transform(spec: &ChannelSpec, beta: f64) -> Result<ChannelSpec> {
    if !(beta.is_finite() && beta > 0.0) {
        return invalid(format!("beta must be finite and positive, got {beta}"));
    }
    let taps: Vec<f64> = spec.impulse.taps().iter().map(|t| t / beta).collect();
    if let Some(t) = taps.iter().find(|t| **t > 1.0) {
        return invalid(format!("rescaled tap {t} exceeds 1"));
    }
    ChannelSpec::new(
        ImpulseResponse::new(taps)?,
        spec.lambda0,
        beta * spec.amax,
        beta * spec.alpha,
    )
}

/// Finite input alphabet: strictly increasing points starting at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct InputGrid {
    points: Vec<f64>,
}

impl InputGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return invalid("input grid is empty");
        }
        if points[0] != 0.0 {
            return invalid(format!("input grid must start at 0, starts at {}", points[0]));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return invalid("input grid points must be finite");
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("input grid must be strictly increasing");
        }
        Ok(Self { points })
    }

    /// `m` equally spaced points on `[0, amax]`, both endpoints included exactly.
    pub fn uniform(amax: f64, m: usize) -> Result<Self> {
        if m < 2 {
            return invalid(format!("a uniform grid needs at least 2 points, got {m}"));
        }
        if !(amax.is_finite() && amax > 0.0) {
            return invalid(format!("amax must be finite and positive, got {amax}"));
        }
        let mut points: Vec<f64> = (0..m).map(|i| amax * i as f64 / (m - 1) as f64).collect();
        points[m - 1] = amax;
        Self::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn max(&self) -> f64 {
        *self.points.last().expect("grid is nonempty")
    }

    /// Multiplies every point by `beta`.
    pub fn scaled(&self, beta: f64) -> Result<Self> {
        Self::new(self.points.iter().map(|p| p * beta).collect())
    }

    pub(crate) fn check_within(&self, amax: f64) -> Result<()> {
        if self.max() > amax * (1.0 + 1e-12) {
            return invalid(format!(
                "grid point {} exceeds the peak constraint {amax}",
                self.max()
            ));
        }
        Ok(())
    }
}

/// Row-stochastic transition matrix `W(y|x)` with a cost per input symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteChannel {
    n_inputs: usize,
    n_outputs: usize,
    /// Row-major, `n_inputs * n_outputs`.
    transition: Vec<f64>,
    cost: Vec<f64>,
    input_labels: Vec<String>,
    output_labels: Vec<String>,
}

impl DiscreteChannel {
    /// Builds a channel from rows, with index labels.
    pub fn from_rows(rows: Vec<Vec<f64>>, cost: Vec<f64>) -> Result<Self> {
        let n_inputs = rows.len();
        if n_inputs == 0 {
            return invalid("channel needs at least one input");
        }
        let n_outputs = rows[0].len();
        if rows.iter().any(|r| r.len() != n_outputs) {
            return invalid("channel rows have different lengths");
        }
        let transition = rows.into_iter().flatten().collect();
        Self::from_dense(n_inputs, n_outputs, transition, cost)
    }

    /// Builds a channel from a row-major matrix, with index labels.
    pub fn from_dense(
        n_inputs: usize,
        n_outputs: usize,
        transition: Vec<f64>,
        cost: Vec<f64>,
    ) -> Result<Self> {
        let input_labels = (0..n_inputs).map(|i| i.to_string()).collect();
        let output_labels = (0..n_outputs).map(|i| i.to_string()).collect();
        Self::with_labels(
            n_inputs,
            n_outputs,
            transition,
            cost,
            input_labels,
            output_labels,
        )
    }

    pub fn with_labels(
        n_inputs: usize,
        n_outputs: usize,
        transition: Vec<f64>,
        cost: Vec<f64>,
        input_labels: Vec<String>,
        output_labels: Vec<String>,
    ) -> Result<Self> {
        if n_inputs == 0 || n_outputs == 0 {
            return invalid("channel alphabets must be nonempty");
        }
        if transition.len() != n_inputs * n_outputs {
            return invalid(format!(
                "transition has {} entries, expected {}x{}",
                transition.len(),
                n_inputs,
                n_outputs
            ));
        }
        if cost.len() != n_inputs {
            return invalid(format!(
                "cost vector has length {}, expected {n_inputs}",
                cost.len()
            ));
        }
        if input_labels.len() != n_inputs || output_labels.len() != n_outputs {
            return invalid("label count does not match the alphabet sizes");
        }
        if cost.iter().any(|c| !c.is_finite()) {
            return invalid("costs must be finite");
        }
        for (x, row) in transition.chunks(n_outputs).enumerate() {
            if row.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                return invalid(format!("row {x} has a negative or non-finite entry"));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > ROW_SUM_TOL {
                return invalid(format!("row {x} sums to {s}, not 1"));
            }
        }
        Ok(Self {
            n_inputs,
            n_outputs,
            transition,
            cost,
            input_labels,
            output_labels,
        })
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.transition[x * self.n_outputs..(x + 1) * self.n_outputs]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.transition.chunks_exact(self.n_outputs)
    }

    pub fn transition(&self) -> &[f64] {
        &self.transition
    }

    pub fn cost(&self) -> &[f64] {
        &self.cost
    }

    pub fn input_labels(&self) -> &[String] {
        &self.input_labels
    }

    pub fn output_labels(&self) -> &[String] {
        &self.output_labels
    }

    pub fn min_cost(&self) -> f64 {
        self.cost.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_cost(&self) -> f64 {
        self.cost.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Same transitions, different cost vector.
    pub fn with_cost(&self, cost: Vec<f64>) -> Result<Self> {
        Self::with_labels(
            self.n_inputs,
            self.n_outputs,
            self.transition.clone(),
            cost,
            self.input_labels.clone(),
            self.output_labels.clone(),
        )
    }

    /// Kronecker product: inputs and outputs are pairs, costs add.
    pub fn product(&self, other: &DiscreteChannel) -> Result<Self> {
        let n_in = self.n_inputs * other.n_inputs;
        let n_out = self.n_outputs * other.n_outputs;
        let mut t = Vec::with_capacity(n_in * n_out);
        let mut cost = Vec::with_capacity(n_in);
        for a in 0..self.n_inputs {
            for b in 0..other.n_inputs {
                cost.push(self.cost[a] + other.cost[b]);
                for wa in self.row(a) {
                    for wb in other.row(b) {
                        t.push(wa * wb);
                    }
                }
            }
        }
        Self::from_dense(n_in, n_out, t, cost)
    }
}

/// Memoryless Poisson channel on `grid`: row `x` is `Poisson(lambda0 + p_0 x)`,
/// all rows evaluated on the common alphabet `{0, ..., ymax}` where `ymax` is the
/// largest per-row truncation point. Cost of `x` is `x`.
pub fn build_memoryless_channel(
    spec: &ChannelSpec,
    grid: &InputGrid,
    tail_eps: f64,
) -> Result<DiscreteChannel> {
    if spec.memory() != 0 {
        return invalid(format!(
            "memoryless channel needs a single tap, impulse has memory {}",
            spec.memory()
        ));
    }
    grid.check_within(spec.amax)?;
    let gain = spec.impulse.taps()[0];
    let intensities: Vec<f64> = grid.points().iter().map(|x| spec.lambda0 + gain * x).collect();
    let mut ymax = 0;
    for &lam in &intensities {
        ymax = ymax.max(truncation_point(lam, tail_eps)?.0);
    }
    let mut transition = Vec::with_capacity(grid.len() * (ymax + 1));
    for &lam in &intensities {
        transition.extend(poisson_pmf_on(lam, ymax)?.pmf);
    }
    DiscreteChannel::with_labels(
        grid.len(),
        ymax + 1,
        transition,
        grid.points().to_vec(),
        grid.points().iter().map(|x| format!("{x}")).collect(),
        (0..=ymax).map(|y| y.to_string()).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tv(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len().max(b.len());
        (0..n)
            .map(|i| (a.get(i).unwrap_or(&0.0) - b.get(i).unwrap_or(&0.0)).abs())
            .sum::<f64>()
            / 2.0
    }

    #[test]
    fn impulse_validation() {
        assert!(ImpulseResponse::new(vec![]).is_err());
        assert!(ImpulseResponse::new(vec![0.5, -0.1]).is_err());
        assert!(ImpulseResponse::new(vec![0.7, 0.4]).is_err());
        assert!(ImpulseResponse::new(vec![0.3, 0.2]).is_ok());
        let p = ImpulseResponse::new(vec![0.3, 0.2, 0.0, 0.0]).unwrap();
        assert_eq!(p.trimmed().taps(), &[0.3, 0.2]);
        let n = p.normalize().unwrap();
        assert!((n.total() - 1.0).abs() < 1e-12);
        assert!((n.taps()[0] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn convolve_examples() {
        let id = ImpulseResponse::memoryless();
        assert_eq!(convolve(&[5.0, 0.0, 0.0], &id), vec![5.0, 0.0, 0.0]);
        let p = ImpulseResponse::new(vec![0.7, 0.3]).unwrap();
        let s = convolve(&[10.0, 20.0], &p);
        assert!((s[0] - 7.0).abs() < 1e-12 && (s[1] - 17.0).abs() < 1e-12);
        assert_eq!(convolve(&[0.0; 4], &p), vec![0.0; 4]);
    }

    #[test]
    fn spec_validation() {
        let p = ImpulseResponse::memoryless();
        assert!(ChannelSpec::new(p.clone(), -1.0, 40.0, 5.0).is_err());
        assert!(ChannelSpec::new(p.clone(), 5.0, 0.0, 0.0).is_err());
        assert!(ChannelSpec::new(p.clone(), 5.0, 40.0, 41.0).is_err());
        assert!(ChannelSpec::new(p, 5.0, 40.0, 40.0).is_ok());
    }

    #[test]
    fn grid_validation() {
        assert!(InputGrid::new(vec![1.0, 2.0]).is_err());
        assert!(InputGrid::new(vec![0.0, 2.0, 2.0]).is_err());
        let g = InputGrid::uniform(40.0, 9).unwrap();
        assert_eq!(g.points()[0], 0.0);
        assert_eq!(g.max(), 40.0);
        assert_eq!(g.points()[1], 5.0);
        assert!(InputGrid::uniform(40.0, 1).is_err());
    }

    #[test]
    fn scale_transform_examples() {
        let spec = ChannelSpec::new(ImpulseResponse::memoryless(), 5.0, 40.0, 5.0).unwrap();
        assert_eq!(scale_invariance_transform(&spec, 1.0).unwrap(), spec);
        let t = scale_invariance_transform(&spec, 2.0).unwrap();
        assert_eq!((t.amax, t.alpha, t.lambda0), (80.0, 10.0, 5.0));
        assert_eq!(t.impulse.taps(), &[0.5]);
        assert!(scale_invariance_transform(&spec, 0.5).is_err());
        assert!(scale_invariance_transform(&spec, 0.0).is_err());
    }

    #[test]
    fn memoryless_degenerate() {
        let spec = ChannelSpec::new(ImpulseResponse::memoryless(), 0.0, 40.0, 5.0).unwrap();
        let ch = build_memoryless_channel(&spec, &InputGrid::new(vec![0.0]).unwrap(), 1e-10)
            .unwrap();
        assert_eq!((ch.n_inputs(), ch.n_outputs()), (1, 1));
        assert_eq!(ch.row(0), &[1.0]);
        assert_eq!(ch.cost(), &[0.0]);
    }

    #[test]
    fn memoryless_rows_are_poisson() {
        let spec = ChannelSpec::new(ImpulseResponse::memoryless(), 5.0, 40.0, 5.0).unwrap();
        let grid = InputGrid::new(vec![0.0, 40.0]).unwrap();
        let ch = build_memoryless_channel(&spec, &grid, 1e-10).unwrap();
        let ymax = ch.n_outputs() - 1;
        assert_eq!(ymax, truncation_point(45.0, 1e-10).unwrap().0);
        assert_eq!(ch.row(0), poisson_pmf_on(5.0, ymax).unwrap().pmf.as_slice());
        assert_eq!(ch.row(1), poisson_pmf(45.0, 1e-10).unwrap().as_slice());
        assert_eq!(ch.cost(), &[0.0, 40.0]);
    }

    #[test]
    fn rows_merge_as_background_grows() {
        let grid = InputGrid::new(vec![0.0, 40.0]).unwrap();
        let mut last = f64::INFINITY;
        for &l0 in &[5.0, 50.0, 500.0] {
            let spec = ChannelSpec::new(ImpulseResponse::memoryless(), l0, 40.0, 5.0).unwrap();
            let ch = build_memoryless_channel(&spec, &grid, 1e-10).unwrap();
            let d = tv(ch.row(0), ch.row(1));
            assert!(d < last, "TV {d} at lambda0={l0} not below {last}");
            last = d;
        }
    }

    #[test]
    fn channel_rejects_bad_rows() {
        assert!(DiscreteChannel::from_rows(vec![vec![0.5, 0.4]], vec![0.0]).is_err());
        assert!(DiscreteChannel::from_rows(vec![vec![1.5, -0.5]], vec![0.0]).is_err());
        assert!(DiscreteChannel::from_rows(vec![vec![1.0, 0.0]], vec![0.0, 1.0]).is_err());
    }
}
