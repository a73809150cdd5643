use serde::{Deserialize, Serialize};

use super::{ChannelSpec, ImpulseResponse, InputGrid, DEFAULT_GRID_POINTS, DEFAULT_TAIL_EPS};
use crate::error::Result;

/// JSON problem file:
/// `{"impulse": [..], "lambda0": .., "amax": .., "alpha": .., "grid_points": m, "tail_eps": ..}`.
/// `grid_points` and `tail_eps` may be omitted; unknown fields are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub impulse: Vec<f64>,
    pub lambda0: f64,
    pub amax: f64,
    pub alpha: f64,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default = "default_tail_eps")]
    pub tail_eps: f64,
}

fn default_grid_points() -> usize {
    DEFAULT_GRID_POINTS
}

fn default_tail_eps() -> f64 {
    DEFAULT_TAIL_EPS
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn spec(&self) -> Result<ChannelSpec> {
        ChannelSpec::new(
            ImpulseResponse::new(self.impulse.clone())?,
            self.lambda0,
            self.amax,
            self.alpha,
        )
    }

    pub fn grid(&self) -> Result<InputGrid> {
        InputGrid::uniform(self.amax, self.grid_points)
    }
}
