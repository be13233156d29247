//! Clairvoyant scheduling of two random walks on the complete graph K_m, studied
//! through dependent oriented percolation: walk generation, lattice reachability,
//! delay schedules, the multi-scale parameter schedule, a desk-scale renormalization
//! toolkit ("mazery") and a Monte Carlo harness.

mod bits;
pub mod config;
pub mod error;
pub mod experiments;
pub mod mazery;
pub mod params;
pub mod percolation;
pub mod rng;
pub mod scheduling;

pub use error::{LabError, Result};
