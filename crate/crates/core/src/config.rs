//! Experiment configuration files.
//!
//! Files are TOML and deserialize directly into [`ExperimentConfig`]:
//!
//! ```toml
//! name = "wiener_gauss"
//!
//! [signal]
//! kind = "wiener"          # constant | wiener | wiener_drift
//! x0 = 0.0
//! sigma_w = 0.001
//! # drift = 1e-4           # wiener_drift only: a number or a per-step list
//!
//! [noise]
//! family = "gg"            # gg | st
//! beta = 2.0
//! delta = 1.0
//!
//! [estimator]
//! kind = "quantized"       # quantized | continuous
//! n_bits = 2
//! # c_delta = 1.0          # fixed step; grid search otherwise
//! # grid = { min = 0.01, max = 10.0, step = 0.01 }
//!
//! [run]
//! replications = 2000
//! horizon = 20000
//! burn_in = 1000
//! seed = 1
//!
//! [initial]                # X̂_0 = x0 + offset + spread·N(0,1)
//! offset = 0.0
//! spread = 0.0
//!
//! [drift]                  # drift-increment smoother
//! gain = 1e-5
//! initial = 1e-4
//! ```
//!
//! Command-line flags override file values through [`Overrides`].

use std::path::Path;

use thiserror::Error;

use crate::noise::NoiseFamily;
use crate::simulator::{EstimatorConfig, ExperimentConfig, GridConfig, SimError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: String,
        source: toml::de::Error,
    },
    #[error("invalid configuration {path}: {source}")]
    Invalid { path: String, source: SimError },
    #[error("--nbits / grid flags need a quantized estimator")]
    NotQuantized,
}

/// Values given on the command line; `None` keeps the file value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub family: Option<NoiseFamily>,
    pub beta: Option<f64>,
    pub delta: Option<f64>,
    pub n_bits: Option<u32>,
    pub grid_min: Option<f64>,
    pub grid_max: Option<f64>,
    pub grid_step: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, config: &mut ExperimentConfig) -> Result<(), ConfigError> {
        if let Some(seed) = self.seed {
            config.run.seed = seed;
        }
        if let Some(family) = self.family {
            config.noise.family = family;
        }
        if let Some(beta) = self.beta {
            config.noise.beta = beta;
        }
        if let Some(delta) = self.delta {
            config.noise.delta = delta;
        }
        let touches_quantizer = self.n_bits.is_some()
            || self.grid_min.is_some()
            || self.grid_max.is_some()
            || self.grid_step.is_some();
        if !touches_quantizer {
            return Ok(());
        }
        match &mut config.estimator {
            EstimatorConfig::Quantized { n_bits, grid, .. } => {
                if let Some(nb) = self.n_bits {
                    *n_bits = nb;
                }
                let GridConfig { min, max, step } = grid;
                if let Some(v) = self.grid_min {
                    *min = v;
                }
                if let Some(v) = self.grid_max {
                    *max = v;
                }
                if let Some(v) = self.grid_step {
                    *step = v;
                }
                Ok(())
            }
            EstimatorConfig::Continuous { .. } => Err(ConfigError::NotQuantized),
        }
    }
}

pub fn parse(text: &str, origin: &str) -> Result<ExperimentConfig, ConfigError> {
    let config: ExperimentConfig = toml::from_str(text).map_err(|source| ConfigError::Parse {
        path: origin.to_string(),
        source,
    })?;
    config.validate().map_err(|source| ConfigError::Invalid {
        path: origin.to_string(),
        source,
    })?;
    Ok(config)
}

/// Reads, applies overrides, and validates a configuration file. A missing
/// `name` defaults to the file stem.
pub fn load(path: &Path, overrides: &Overrides) -> Result<ExperimentConfig, ConfigError> {
    let origin = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: origin.clone(),
        source,
    })?;
    let mut config: ExperimentConfig =
        toml::from_str(&text).map_err(|source| ConfigError::Parse {
            path: origin.clone(),
            source,
        })?;
    if config.name.is_empty() {
        config.name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "experiment".into());
    }
    overrides.apply(&mut config)?;
    config.validate().map_err(|source| ConfigError::Invalid {
        path: origin,
        source,
    })?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{Drift, SignalModel};

    const WIENER: &str = r#"
        name = "w"
        [signal]
        kind = "wiener"
        sigma_w = 0.001
        [noise]
        family = "gg"
        beta = 2.0
        [estimator]
        kind = "quantized"
        n_bits = 2
        [run]
        replications = 10
        horizon = 100
        burn_in = 10
    "#;

    #[test]
    fn parses_defaults() {
        let c = parse(WIENER, "inline").unwrap();
        assert_eq!(
            c.signal,
            SignalModel::Wiener {
                x0: 0.0,
                sigma_w: 0.001
            }
        );
        assert_eq!(c.noise.delta, 1.0);
        assert_eq!(c.run.seed, 0);
        assert_eq!(c.initial.offset, 0.0);
        assert_eq!(c.drift.gain, 1e-5);
        match c.estimator {
            EstimatorConfig::Quantized { grid, c_delta, .. } => {
                assert_eq!(grid, GridConfig::default());
                assert!(c_delta.is_none());
            }
            _ => panic!(),
        }
    }

    #[test]
    fn drift_forms() {
        let base = WIENER.replace("kind = \"wiener\"", "kind = \"wiener_drift\"");
        let constant = base.replace("sigma_w = 0.001", "sigma_w = 0.001\ndrift = 1e-4");
        let c = parse(&constant, "inline").unwrap();
        assert!(matches!(
            c.signal,
            SignalModel::WienerDrift { drift: Drift::Constant(u), .. } if u == 1e-4
        ));
        let short = base.replace("sigma_w = 0.001", "sigma_w = 0.001\ndrift = [1e-4, 2e-4]");
        assert!(matches!(
            parse(&short, "inline"),
            Err(ConfigError::Invalid { .. })
        ));
    }

    #[test]
    fn invalid_values_are_reported() {
        let bad = WIENER.replace("burn_in = 10", "burn_in = 100");
        assert!(matches!(
            parse(&bad, "inline"),
            Err(ConfigError::Invalid { .. })
        ));
        let typo = WIENER.replace("sigma_w", "sigmaw");
        assert!(matches!(
            parse(&typo, "inline"),
            Err(ConfigError::Parse { .. })
        ));
        let unknown = WIENER.replace("burn_in = 10", "burn_in = 10\nburnin = 5");
        assert!(matches!(
            parse(&unknown, "inline"),
            Err(ConfigError::Parse { .. })
        ));
    }

    #[test]
    fn overrides_win() {
        let mut c = parse(WIENER, "inline").unwrap();
        let o = Overrides {
            seed: Some(9),
            beta: Some(1.5),
            n_bits: Some(4),
            grid_step: Some(0.05),
            ..Default::default()
        };
        o.apply(&mut c).unwrap();
        assert_eq!(c.run.seed, 9);
        assert_eq!(c.noise.beta, 1.5);
        match c.estimator {
            EstimatorConfig::Quantized { n_bits, grid, .. } => {
                assert_eq!(n_bits, 4);
                assert_eq!(grid.step, 0.05);
            }
            _ => panic!(),
        }
        c.estimator = EstimatorConfig::Continuous { schedule: None };
        assert!(o.apply(&mut c).is_err());
    }

    #[test]
    fn load_names_from_file_stem() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("my_run.toml");
        std::fs::write(&path, WIENER.replace("name = \"w\"", "")).unwrap();
        let c = load(&path, &Overrides::default()).unwrap();
        assert_eq!(c.name, "my_run");
        assert!(matches!(
            load(&dir.path().join("missing.toml"), &Overrides::default()),
            Err(ConfigError::Io { .. })
        ));
    }
}
