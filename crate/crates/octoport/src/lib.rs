//! Simulation and min-entropy analysis of an eight-port double homodyne detector.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]
#![cfg_attr(test, allow(clippy::excessive_precision))]

pub mod analytic;
pub mod circuit;
pub mod detector;
pub mod entropy;
pub mod error;
pub mod extractor;
pub mod laser;
pub mod mc_sim;
pub mod normal;
pub mod quad;
pub mod real;
pub mod rng;
pub mod single_homodyne;

pub use error::{Error, Result};
pub use real::Real;

pub type CircuitParams = circuit::CircuitParams<f64>;
pub type Coefficients = circuit::Coefficients<f64>;
pub type LaserParams = laser::LaserParams<f64>;
pub type LaserTrajectory = laser::LaserTrajectory<f64>;
pub type DetectorParams = detector::DetectorParams<f64>;
pub type SimConfig = mc_sim::SimConfig<f64>;
pub type SampleBatch = mc_sim::SampleBatch<f64>;
pub type Signal = mc_sim::Signal<f64>;
pub type NoiseBudget = analytic::NoiseBudget<f64>;
pub type SymmetricCase = analytic::SymmetricCase<f64>;
pub type AdcConfig = entropy::AdcConfig<f64>;
pub type ResolvedAdc = entropy::ResolvedAdc<f64>;
pub type EntropyReport = entropy::EntropyReport<f64>;
pub type SingleBudget = single_homodyne::SingleBudget<f64>;
