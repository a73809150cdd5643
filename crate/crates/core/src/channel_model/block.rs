use rayon::prelude::*;

use super::{poisson_pmf_on, truncation_point, ChannelSpec, DiscreteChannel, InputGrid};
use crate::error::{invalid, Error, Result};

/// Largest matrix (in entries) the block builder will materialize by default.
pub const DEFAULT_ENTRY_BUDGET: u128 = 200_000_000;

/// Mixed-radix indexing of tuples in `grid^len`, first coordinate most significant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TupleIndexer {
    pub base: usize,
    pub len: usize,
}

impl TupleIndexer {
    pub fn new(base: usize, len: usize) -> Self {
        Self { base, len }
    }

    pub fn count(&self) -> usize {
        self.base.pow(self.len as u32)
    }

    /// Digits `(d_1, ..., d_len)` of `index`.
    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.len];
        for d in digits.iter_mut().rev() {
            *d = index % self.base;
            index /= self.base;
        }
        digits
    }

    pub fn encode(&self, digits: &[usize]) -> usize {
        digits.iter().fold(0, |acc, d| acc * self.base + d)
    }
}

/// The block memoryless channel of size `r`: one use takes `k + r` inputs and
/// emits the `r` outputs of slots `k+1, ..., k+r`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockChannelSpec {
    pub base: ChannelSpec,
    pub grid: InputGrid,
    pub r: usize,
    pub tail_eps: f64,
    pub entry_budget: u128,
}

impl BlockChannelSpec {
    pub fn new(base: ChannelSpec, grid: InputGrid, r: usize, tail_eps: f64) -> Result<Self> {
        if r == 0 {
            return invalid("block length r must be at least 1");
        }
        if !(tail_eps > 0.0 && tail_eps <= 1e-3) {
            return invalid(format!("tail_eps must lie in (0, 1e-3], got {tail_eps}"));
        }
        grid.check_within(base.amax)?;
        Ok(Self {
            base,
            grid,
            r,
            tail_eps,
            entry_budget: DEFAULT_ENTRY_BUDGET,
        })
    }

    pub fn with_budget(mut self, entry_budget: u128) -> Self {
        self.entry_budget = entry_budget;
        self
    }

    pub fn memory(&self) -> usize {
        self.base.memory()
    }

    /// Number of inputs per block use, `k + r`.
    pub fn block_inputs(&self) -> usize {
        self.memory() + self.r
    }

    pub fn input_indexer(&self) -> TupleIndexer {
        TupleIndexer::new(self.grid.len(), self.block_inputs())
    }

    /// Per-slot output truncation point, set by the largest reachable intensity.
    pub fn slot_ymax(&self) -> Result<usize> {
        let peak = self.base.lambda0 + self.base.impulse.total() * self.grid.max();
        Ok(truncation_point(peak, self.tail_eps)?.0)
    }
}

/// Materializes the block channel.
///
/// Inputs are all tuples `(x_1, ..., x_{k+r})` over the grid; outputs are tuples
/// `(y_{k+1}, ..., y_{k+r})` with each slot on `{0, ..., ymax}`. The transition is
/// the product over slots of `Poisson(lambda0 + sum_j p_j x_{i-j})`, and the cost of
/// an input tuple is its per-slot average intensity.
pub fn build_block_channel(bspec: &BlockChannelSpec) -> Result<DiscreteChannel> {
    let k = bspec.memory();
    let r = bspec.r;
    let m = bspec.grid.len();
    let ymax = bspec.slot_ymax()?;
    let slot_len = ymax + 1;

    let budget = bspec.entry_budget;
    let n_in = (m as u128).checked_pow((k + r) as u32);
    let n_out = (slot_len as u128).checked_pow(r as u32);
    let (n_in, n_out) = match (n_in, n_out) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::BudgetExceeded {
                dimension: "alphabet size".into(),
                requested: u128::MAX,
                budget,
            })
        }
    };
    if n_in > budget {
        return Err(Error::BudgetExceeded {
            dimension: format!("input tuples ({m}^{})", k + r),
            requested: n_in,
            budget,
        });
    }
    if n_out > budget {
        return Err(Error::BudgetExceeded {
            dimension: format!("output tuples ({slot_len}^{r})"),
            requested: n_out,
            budget,
        });
    }
    let entries = n_in.saturating_mul(n_out);
    if entries > budget {
        return Err(Error::BudgetExceeded {
            dimension: format!("transition matrix ({n_in} x {n_out})"),
            requested: entries,
            budget,
        });
    }
    let (n_in, n_out) = (n_in as usize, n_out as usize);

    // one pmf per window (x_{i-k}, ..., x_i); windows share the mixed-radix layout
    let taps = bspec.base.impulse.taps();
    let points = bspec.grid.points();
    let window = TupleIndexer::new(m, k + 1);
    let window_pmfs: Vec<Vec<f64>> = (0..window.count())
        .map(|w| {
            let digits = window.decode(w);
            // digits[k] is the current input x_i, digits[k - j] is x_{i-j}
            let s: f64 = (0..=k).map(|j| taps[j] * points[digits[k - j]]).sum();
            poisson_pmf_on(bspec.base.lambda0 + s, ymax).map(|t| t.pmf)
        })
        .collect::<Result<_>>()?;

    let inputs = bspec.input_indexer();
    let mut transition = vec![0.0; n_in * n_out];
    transition
        .par_chunks_mut(n_out)
        .enumerate()
        .for_each(|(idx, row)| {
            let digits = inputs.decode(idx);
            let slot_pmfs: Vec<&[f64]> = (0..r)
                .map(|s| window_pmfs[window.encode(&digits[s..s + k + 1])].as_slice())
                .collect();
            kron_into(&slot_pmfs, row);
        });

    let cost: Vec<f64> = (0..n_in)
        .map(|idx| {
            let digits = inputs.decode(idx);
            digits.iter().map(|&d| points[d]).sum::<f64>() / (k + r) as f64
        })
        .collect();
    let input_labels = (0..n_in)
        .map(|idx| {
            let xs: Vec<String> = inputs.decode(idx).iter().map(|&d| format!("{}", points[d])).collect();
            format!("({})", xs.join(","))
        })
        .collect();
    let outputs = TupleIndexer::new(slot_len, r);
    let output_labels = (0..n_out)
        .map(|idx| {
            let ys: Vec<String> = outputs.decode(idx).iter().map(|y| y.to_string()).collect();
            format!("({})", ys.join(","))
        })
        .collect();
    DiscreteChannel::with_labels(n_in, n_out, transition, cost, input_labels, output_labels)
}

/// Writes the Kronecker product of `factors` into `out` (first factor most significant).
fn kron_into(factors: &[&[f64]], out: &mut [f64]) {
    out[0] = 1.0;
    let mut len = 1;
    for f in factors {
        let n = f.len();
        // expand in place from the back so earlier entries are still unread
        for i in (0..len).rev() {
            let v = out[i];
            for (j, fj) in f.iter().enumerate().rev() {
                out[i * n + j] = v * fj;
            }
        }
        len *= n;
    }
}
