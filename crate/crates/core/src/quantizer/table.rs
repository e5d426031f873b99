//! Plain-text key/value tables for caching pre-computed designs.
//!
//! ```text
//! # adaquant quantizer design
//! family = gg
//! beta = 2.00000000000e0
//! delta = 1.00000000000e0
//! n_intervals = 4
//! c_delta = 1.00000000000e0
//! tau = 1.00000000000e0
//! eta = 8.46416...e-1,2.63898...e0
//! fisher = 1.69920...e0
//! ```
//!
//! `tau` lists the finite normalized thresholds only and is empty for
//! `n_intervals = 2`.

use std::collections::BTreeMap;

use thiserror::Error;

use super::{QuantizerDesign, QuantizerError, QuantizerSpec};
use crate::format::{sig, sig_list};
use crate::noise::{NoiseError, NoiseFamily, NoiseModel};

/// Relative agreement required between the stored and recomputed I_q.
pub const ROUND_TRIP_TOLERANCE: f64 = 1e-11;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("missing key `{0}`")]
    Missing(&'static str),
    #[error("key `{key}`: cannot parse `{value}`")]
    Value { key: &'static str, value: String },
    #[error("unknown noise family `{0}`")]
    Family(String),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Quantizer(#[from] QuantizerError),
    #[error("stored {what} {stored} disagrees with recomputed {recomputed}")]
    Mismatch {
        what: &'static str,
        stored: f64,
        recomputed: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignTable {
    pub family: NoiseFamily,
    pub beta: f64,
    pub delta: f64,
    pub n_intervals: usize,
    pub c_delta: f64,
    pub thresholds: Vec<f64>,
    pub levels: Vec<f64>,
    pub fisher: f64,
}

impl DesignTable {
    pub fn from_design(design: &QuantizerDesign) -> Self {
        let noise = design.noise();
        let spec = design.spec();
        Self {
            family: noise.family(),
            beta: noise.beta(),
            delta: noise.delta(),
            n_intervals: spec.n_intervals(),
            c_delta: spec.c_delta(),
            thresholds: spec.thresholds().to_vec(),
            levels: design.levels().to_vec(),
            fisher: design.fisher(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# adaquant quantizer design\n");
        out += &format!("family = {}\n", self.family);
        out += &format!("beta = {}\n", sig(self.beta));
        out += &format!("delta = {}\n", sig(self.delta));
        out += &format!("n_intervals = {}\n", self.n_intervals);
        out += &format!("c_delta = {}\n", sig(self.c_delta));
        out += &format!("tau = {}\n", sig_list(&self.thresholds));
        out += &format!("eta = {}\n", sig_list(&self.levels));
        out += &format!("fisher = {}\n", sig(self.fisher));
        out
    }

    pub fn parse(text: &str) -> Result<Self, TableError> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(TableError::Syntax { line: n + 1 })?;
            entries.insert(key.trim().to_string(), value.trim().to_string());
        }
        let get = |key: &'static str| entries.get(key).ok_or(TableError::Missing(key));
        let real = |key: &'static str| -> Result<f64, TableError> {
            let v = get(key)?;
            v.parse().map_err(|_| TableError::Value {
                key,
                value: v.clone(),
            })
        };
        let list = |key: &'static str| -> Result<Vec<f64>, TableError> {
            let v = get(key)?;
            if v.is_empty() {
                return Ok(Vec::new());
            }
            v.split(',')
                .map(|item| {
                    item.trim().parse().map_err(|_| TableError::Value {
                        key,
                        value: v.clone(),
                    })
                })
                .collect()
        };
        let family_tag = get("family")?;
        let family = NoiseFamily::from_tag(family_tag)
            .ok_or_else(|| TableError::Family(family_tag.clone()))?;
        let n_raw = get("n_intervals")?;
        let n_intervals = n_raw.parse().map_err(|_| TableError::Value {
            key: "n_intervals",
            value: n_raw.clone(),
        })?;
        Ok(Self {
            family,
            beta: real("beta")?,
            delta: real("delta")?,
            n_intervals,
            c_delta: real("c_delta")?,
            thresholds: list("tau")?,
            levels: list("eta")?,
            fisher: real("fisher")?,
        })
    }

    /// Recomputes the design from the stored noise and quantizer parameters
    /// and checks that the stored I_q and levels agree with it.
    pub fn rebuild(&self) -> Result<QuantizerDesign, TableError> {
        let noise = NoiseModel::new(self.family, self.beta, self.delta)?;
        let spec = QuantizerSpec::new(self.n_intervals, self.thresholds.clone(), self.c_delta)?;
        let design = QuantizerDesign::new(&noise, &spec)?;
        let agree = |a: f64, b: f64| (a - b).abs() <= ROUND_TRIP_TOLERANCE * b.abs().max(1e-300);
        if !agree(self.fisher, design.fisher()) {
            return Err(TableError::Mismatch {
                what: "fisher",
                stored: self.fisher,
                recomputed: design.fisher(),
            });
        }
        if self.levels.len() != design.levels().len() {
            return Err(
                QuantizerError::LengthMismatch(self.levels.len(), design.levels().len()).into(),
            );
        }
        for (&stored, &recomputed) in self.levels.iter().zip(design.levels()) {
            if !agree(stored, recomputed) {
                return Err(TableError::Mismatch {
                    what: "eta",
                    stored,
                    recomputed,
                });
            }
        }
        Ok(design)
    }
}
