//! Builders shared by the integration tests.

#![allow(dead_code)]

use adaquant::estimator::DriftSmoother;
use adaquant::simulator::{
    EstimatorConfig, ExperimentConfig, InitialEstimate, NoiseConfig, RunConfig, SignalModel,
};
use adaquant::NoiseFamily;

pub fn gauss() -> NoiseConfig {
    NoiseConfig {
        family: NoiseFamily::GeneralizedGaussian,
        beta: 2.0,
        delta: 1.0,
    }
}

pub fn cauchy() -> NoiseConfig {
    NoiseConfig {
        family: NoiseFamily::StudentT,
        beta: 1.0,
        delta: 1.0,
    }
}

pub fn experiment(
    name: &str,
    signal: SignalModel,
    noise: NoiseConfig,
    estimator: EstimatorConfig,
    replications: u64,
    horizon: u64,
    burn_in: u64,
) -> ExperimentConfig {
    ExperimentConfig {
        name: name.to_string(),
        signal,
        noise,
        estimator,
        run: RunConfig {
            replications,
            horizon,
            burn_in,
            seed: 1,
        },
        initial: InitialEstimate::default(),
        drift: DriftSmoother::default(),
    }
}

pub fn constant(
    noise: NoiseConfig,
    n_bits: u32,
    replications: u64,
    horizon: u64,
) -> ExperimentConfig {
    experiment(
        "constant",
        SignalModel::Constant { x0: 0.0 },
        noise,
        EstimatorConfig::quantized(n_bits),
        replications,
        horizon,
        0,
    )
}

pub fn wiener(
    noise: NoiseConfig,
    n_bits: u32,
    sigma_w: f64,
    replications: u64,
    horizon: u64,
    burn_in: u64,
) -> ExperimentConfig {
    experiment(
        "wiener",
        SignalModel::Wiener { x0: 0.0, sigma_w },
        noise,
        EstimatorConfig::quantized(n_bits),
        replications,
        horizon,
        burn_in,
    )
}

/// Drift u = σ_w = 1e-4 with the smoother started at the true drift.
pub fn drift(
    noise: NoiseConfig,
    estimator: EstimatorConfig,
    drift_gain: f64,
    replications: u64,
    horizon: u64,
    burn_in: u64,
) -> ExperimentConfig {
    let mut config = experiment(
        "drift",
        SignalModel::WienerDrift {
            x0: 0.0,
            sigma_w: 1e-4,
            drift: adaquant::simulator::Drift::Constant(1e-4),
        },
        noise,
        estimator,
        replications,
        horizon,
        burn_in,
    );
    config.drift = DriftSmoother {
        gain: drift_gain,
        initial: 1e-4,
    };
    config
}
