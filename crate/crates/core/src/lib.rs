//! Adaptive estimation of a scalar location parameter from quantized noisy
//! measurements.
//!
//! The crate covers the full pipeline: noise models, optimal uniform
//! quantizer design, the adaptive low-complexity estimator, closed-form
//! performance predictions, and a deterministic Monte Carlo engine.

// Parameter checks are written as `!(x > 0.0)` on purpose: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod config;
pub mod estimator;
pub mod figures;
pub mod format;
pub mod noise;
pub mod quadrature;
pub mod quantizer;
pub mod report;
pub mod simulator;
pub mod special;

pub use estimator::{ContinuousEstimator, DriftSmoother, GainSchedule, QuantizedEstimator};
pub use noise::{NoiseFamily, NoiseModel};
pub use quantizer::{optimize_c_delta, CDeltaGrid, QuantizerDesign, QuantizerSpec};
pub use simulator::{run_continuous_reference, run_experiment, ExperimentConfig, ExperimentResult};
