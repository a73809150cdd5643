//! Capacity bounds for the discrete-time LTI-Poisson channel.
//!
//! Instances are impulse responses with background intensity and peak/average
//! constraints ([`channel_model`]). They are discretized into finite channels,
//! solved with Blahut-Arimoto ([`capacity_solver`]) and bracketed by block,
//! stationary and symmetrized-KL bounds ([`bounds`]). A Monte Carlo simulator
//! ([`simulator`]) and structural checks ([`analysis`]) cross-validate the
//! numbers; [`cli`] drives batch runs and writes CSV reports ([`report`]).

pub mod bounds;
pub mod capacity_solver;
pub mod channel_model;
pub mod cli;
pub mod analysis;
pub mod error;
pub mod report;
pub mod simulator;

pub use error::{Error, Result};
