//! Routing simulation library for Walker Delta satellite constellations.
//!
//! The crate builds +Grid inter-satellite topologies, computes ground-station
//! visibility from a two-body propagator, runs four route-selection algorithms
//! (per-instant shortest, stubborn, tenacious, and interval set cover) over a
//! sampled time horizon, and feeds the resulting route schedules through an
//! abstract TCP window model to compare achievable data rates.

pub mod cli;
pub mod constants;
mod error;
pub mod experiments;
pub mod grid;
pub mod metrics;
pub mod orbital;
pub mod output;
pub mod scenario;
pub mod selection;
pub mod setcover;
pub mod tcpsim;
pub mod topology;

pub use error::{Error, Result};
