//! Online adaptive estimators.
//!
//! [`QuantizedEstimator`] sees each observation only through the quantizer
//! symbol `i_k = Q((Y_k − X̂_{k−1})/Δ)` and updates
//!
//! ```text
//! X̂_k = X̂_{k−1} + γ_k · sign(i_k) · η_{|i_k|}
//! ```
//!
//! [`ContinuousEstimator`] is the unquantized reference that uses the score of
//! the noise density in place of the output levels.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::noise::{NoiseError, NoiseFamily, NoiseModel};
use crate::quantizer::QuantizerDesign;

/// Drift magnitude floor used when the drift estimate is (near) zero.
pub const DEFAULT_DRIFT_FLOOR: f64 = 1e-8;

/// Drift smoother gain used in the drift-tracking experiments.
pub const DEFAULT_DRIFT_GAIN: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error("observation must be finite, got {0}")]
    NonFiniteObservation(f64),
    #[error("gain requested for step 0; steps start at 1")]
    ZeroStep,
    #[error("information must be finite and > 0, got {0}")]
    BadInformation(f64),
    #[error("invalid schedule parameter {name} = {value}")]
    BadParameter { name: &'static str, value: f64 },
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

/// Gain sequence γ_k, parametrized by the Fisher information `information`
/// of one observation (I_q for the quantized estimator, I_c for the
/// continuous reference).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GainSchedule {
    /// γ_k = 1/(k·I).
    ConstantParam { information: f64 },
    /// γ_k = σ_w/√I.
    Wiener { information: f64, sigma_w: f64 },
    /// γ_k = (4Û²/I²)^{1/3} with |Û| floored at `drift_floor`.
    WienerDrift { information: f64, drift_floor: f64 },
}

impl GainSchedule {
    pub fn constant_param(information: f64) -> Result<Self, EstimatorError> {
        check_information(information)?;
        Ok(Self::ConstantParam { information })
    }

    pub fn wiener(information: f64, sigma_w: f64) -> Result<Self, EstimatorError> {
        check_information(information)?;
        if !(sigma_w > 0.0 && sigma_w.is_finite()) {
            return Err(EstimatorError::BadParameter {
                name: "sigma_w",
                value: sigma_w,
            });
        }
        Ok(Self::Wiener {
            information,
            sigma_w,
        })
    }

    pub fn wiener_drift(information: f64) -> Result<Self, EstimatorError> {
        Self::wiener_drift_with_floor(information, DEFAULT_DRIFT_FLOOR)
    }

    pub fn wiener_drift_with_floor(
        information: f64,
        drift_floor: f64,
    ) -> Result<Self, EstimatorError> {
        check_information(information)?;
        if !(drift_floor > 0.0 && drift_floor.is_finite()) {
            return Err(EstimatorError::BadParameter {
                name: "drift_floor",
                value: drift_floor,
            });
        }
        Ok(Self::WienerDrift {
            information,
            drift_floor,
        })
    }

    pub fn information(&self) -> f64 {
        match *self {
            Self::ConstantParam { information }
            | Self::Wiener { information, .. }
            | Self::WienerDrift { information, .. } => information,
        }
    }

    /// γ_k for step `k ≥ 1` given the current drift estimate `u_hat`
    /// (ignored by the non-drift schedules).
    pub fn gain(&self, k: u64, u_hat: f64) -> Result<f64, EstimatorError> {
        if k == 0 {
            return Err(EstimatorError::ZeroStep);
        }
        Ok(match *self {
            Self::ConstantParam { information } => 1.0 / (k as f64 * information),
            Self::Wiener {
                information,
                sigma_w,
            } => sigma_w / information.sqrt(),
            Self::WienerDrift {
                information,
                drift_floor,
            } => {
                let u = u_hat.abs().max(drift_floor);
                (4.0 * u * u / (information * information)).cbrt()
            }
        })
    }
}

fn check_information(information: f64) -> Result<(), EstimatorError> {
    if information > 0.0 && information.is_finite() {
        Ok(())
    } else {
        Err(EstimatorError::BadInformation(information))
    }
}

/// First-order smoother of the estimate increments,
/// Û_k = Û_{k−1} + γ^u [(X̂_k − X̂_{k−1}) − Û_{k−1}].
///
/// A gain of zero freezes Û at `initial`, i.e. the drift is treated as known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriftSmoother {
    pub gain: f64,
    pub initial: f64,
}

impl Default for DriftSmoother {
    fn default() -> Self {
        Self {
            gain: DEFAULT_DRIFT_GAIN,
            initial: 0.0,
        }
    }
}

impl DriftSmoother {
    pub fn validate(&self) -> Result<(), EstimatorError> {
        if !(self.gain >= 0.0 && self.gain <= 1.0) {
            return Err(EstimatorError::BadParameter {
                name: "drift_gain",
                value: self.gain,
            });
        }
        if !self.initial.is_finite() {
            return Err(EstimatorError::BadParameter {
                name: "drift_initial",
                value: self.initial,
            });
        }
        Ok(())
    }

    fn update(&self, u_hat: f64, increment: f64) -> f64 {
        u_hat + self.gain * (increment - u_hat)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorState {
    /// Current estimate X̂_k.
    pub x_hat: f64,
    /// Number of observations processed.
    pub k: u64,
    /// Drift estimate Û_k (stays at its initial value without a smoother).
    pub u_hat: f64,
}

impl EstimatorState {
    pub fn new(x_hat: f64) -> Self {
        Self {
            x_hat,
            k: 0,
            u_hat: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Recursion {
    schedule: GainSchedule,
    drift: Option<DriftSmoother>,
    state: EstimatorState,
}

impl Recursion {
    fn new(schedule: GainSchedule, x_hat0: f64) -> Self {
        Self {
            schedule,
            drift: None,
            state: EstimatorState::new(x_hat0),
        }
    }

    fn with_drift(mut self, smoother: DriftSmoother) -> Result<Self, EstimatorError> {
        smoother.validate()?;
        self.drift = Some(smoother);
        self.state.u_hat = smoother.initial;
        Ok(self)
    }

    // k is incremented before the gain is evaluated, so the first gain is γ_1.
    fn advance(&mut self, correction: f64) -> Result<f64, EstimatorError> {
        self.state.k += 1;
        let gain = self.schedule.gain(self.state.k, self.state.u_hat)?;
        let increment = gain * correction;
        self.state.x_hat += increment;
        if let Some(smoother) = &self.drift {
            self.state.u_hat = smoother.update(self.state.u_hat, increment);
        }
        Ok(self.state.x_hat)
    }
}

/// Adaptive estimator driven by quantized observations.
#[derive(Debug, Clone)]
pub struct QuantizedEstimator<'a> {
    design: &'a QuantizerDesign,
    inner: Recursion,
}

impl<'a> QuantizedEstimator<'a> {
    pub fn new(design: &'a QuantizerDesign, schedule: GainSchedule, x_hat0: f64) -> Self {
        Self {
            design,
            inner: Recursion::new(schedule, x_hat0),
        }
    }

    /// Enables joint drift estimation with the given smoother.
    pub fn with_drift_smoother(mut self, smoother: DriftSmoother) -> Result<Self, EstimatorError> {
        self.inner = self.inner.with_drift(smoother)?;
        Ok(self)
    }

    pub fn state(&self) -> EstimatorState {
        self.inner.state
    }

    pub fn estimate(&self) -> f64 {
        self.inner.state.x_hat
    }

    /// Offset for the next observation: the current estimate.
    pub fn offset(&self) -> f64 {
        self.inner.state.x_hat
    }

    /// Quantizes `y` around the current estimate and applies the update.
    /// Returns the emitted symbol.
    pub fn observe(&mut self, y: f64) -> Result<i32, EstimatorError> {
        if !y.is_finite() {
            return Err(EstimatorError::NonFiniteObservation(y));
        }
        let symbol = self.design.quantize(y, self.offset());
        self.apply_symbol(symbol)?;
        Ok(symbol)
    }

    /// Applies the update for a symbol received from a remote quantizer.
    pub fn apply_symbol(&mut self, symbol: i32) -> Result<f64, EstimatorError> {
        self.inner.advance(self.design.level(symbol))
    }
}

/// Reference estimator using unquantized observations,
/// X̂_k = X̂_{k−1} − γ_k · (f'/f)(Y_k − X̂_{k−1}).
#[derive(Debug, Clone)]
pub struct ContinuousEstimator {
    noise: NoiseModel,
    inner: Recursion,
}

impl ContinuousEstimator {
    /// Fails for GG noise with β ≤ 1, whose score is undefined at 0.
    pub fn new(
        noise: &NoiseModel,
        schedule: GainSchedule,
        x_hat0: f64,
    ) -> Result<Self, EstimatorError> {
        if noise.family() == NoiseFamily::GeneralizedGaussian && noise.beta() <= 1.0 {
            return Err(NoiseError::ScoreUndefined { beta: noise.beta() }.into());
        }
        Ok(Self {
            noise: *noise,
            inner: Recursion::new(schedule, x_hat0),
        })
    }

    pub fn with_drift_smoother(mut self, smoother: DriftSmoother) -> Result<Self, EstimatorError> {
        self.inner = self.inner.with_drift(smoother)?;
        Ok(self)
    }

    pub fn state(&self) -> EstimatorState {
        self.inner.state
    }

    pub fn estimate(&self) -> f64 {
        self.inner.state.x_hat
    }

    pub fn observe(&mut self, y: f64) -> Result<f64, EstimatorError> {
        if !y.is_finite() {
            return Err(EstimatorError::NonFiniteObservation(y));
        }
        let residual = y - self.inner.state.x_hat;
        let correction = -self.noise.score(residual)?;
        self.inner.advance(correction)
    }
}
