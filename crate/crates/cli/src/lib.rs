//! Experiment orchestration for the ordered-transmission detection
//! laboratory: flat-file configuration, per-point evaluation of the
//! analytic / bound / Monte Carlo layers, and CSV sweeps.

pub mod config;
pub mod experiment;
