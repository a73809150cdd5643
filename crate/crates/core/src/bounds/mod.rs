//! Capacity bounds: block sandwich bounds, stationary single-letter bounds and
//! symmetrized-KL upper bounds.
//!
//! Bounds computed on an input grid bound the grid-restricted channel. The block
//! lower bound is a valid lower bound on the true capacity ("grid lower bound");
//! the block upper bound is the upper bound of the discretized problem and can
//! under-estimate the true `C_r`.

mod closed_form;
mod stationary;
mod symkl;

pub use closed_form::{a_poisson_closed_form, cov_bound_poisson, gaussian_sym_bound, InputLaw};
pub use stationary::{
    theorem2_bounds, theorem2_lower, theorem2_upper, StationaryBound, StationaryObjective,
    StationaryProblem, StationaryResult, FW_MAX_ITERS,
};
pub use symkl::{
    gaussian_channel, sym_kl_generic, sym_kl_max, topsoe_mixed_bound, SymKlResult, SymKlValue,
    SYMKL_RANDOM_STARTS,
};

use crate::capacity_solver::{ba_capacity, SolverConfig};
use crate::channel_model::{build_block_channel, BlockChannelSpec};
use crate::error::Result;

/// Label for block lower bounds computed on a grid.
pub const GRID_LOWER_LABEL: &str = "grid lower bound";
/// Label for block upper bounds computed on a grid.
pub const GRID_UPPER_LABEL: &str = "grid upper bound of the discretized problem";

/// `(r/(k+r)) C_r <= C <= C_r` for one block length.
#[derive(Debug, Clone, PartialEq)]
pub struct SandwichBound {
    pub r: usize,
    /// `C_r`, nats per channel use.
    pub upper: f64,
    /// `r/(k+r) C_r`.
    pub lower: f64,
    /// Optimizing law over `grid^{k+r}`.
    pub input_dist: Vec<f64>,
    /// Solver duality gap on `r C_r`.
    pub gap: f64,
    pub iterations: usize,
}

/// Builds the size-`r` block channel, solves it under the per-slot average cost
/// constraint and returns the sandwich pair.
pub fn theorem1_bounds(bspec: &BlockChannelSpec, config: &SolverConfig) -> Result<SandwichBound> {
    let channel = build_block_channel(bspec)?;
    let cap = ba_capacity(&channel, Some(bspec.base.alpha), config)?;
    let r = bspec.r;
    let k = bspec.memory();
    let upper = cap.value / r as f64;
    Ok(SandwichBound {
        r,
        upper,
        lower: upper * r as f64 / (k + r) as f64,
        input_dist: cap.input_dist,
        gap: cap.gap,
        iterations: cap.iterations,
    })
}
