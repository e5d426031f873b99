//! CSV and summary writers.
//!
//! CSV files start with `#`-prefixed metadata lines, followed by a
//! comma-separated header row and numeric rows written with 12 significant
//! digits. Nothing time-dependent goes into a CSV, so identical runs produce
//! byte-identical files; wall time lives in the JSON summary only.

use serde::Serialize;

use crate::format::sig;
use crate::simulator::{EstimatorConfig, ExperimentResult};

/// A small in-memory CSV table with metadata lines.
#[derive(Debug, Clone, Default)]
pub struct CsvTable {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Self {
            meta: Vec::new(),
            columns: columns.iter().map(|c| c.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// The non-metadata part of a CSV text (header row and data rows).
pub fn csv_body(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect()
}

/// Per-step MSE curve with the theoretical prediction, columns
/// `k, mse, theory_mse`.
pub fn result_csv(result: &ExperimentResult) -> String {
    let mut table = CsvTable::new(&["k", "mse", "theory_mse"]);
    let c = &result.config;
    table
        .meta("name", &c.name)
        .meta("signal", format!("{:?}", c.signal.kind()))
        .meta(
            "noise",
            format!(
                "{} beta={} delta={}",
                c.noise.family, c.noise.beta, c.noise.delta
            ),
        )
        .meta("estimator", estimator_label(&c.estimator))
        .meta(
            "c_delta",
            result.c_delta.map(sig).unwrap_or_else(|| "-".into()),
        )
        .meta("fisher", sig(result.fisher))
        .meta("fisher_continuous", sig(result.fisher_continuous))
        .meta("replications", c.run.replications)
        .meta("replications_used", result.replications_used)
        .meta("diverged", format!("{:?}", result.diverged))
        .meta("horizon", c.run.horizon)
        .meta("burn_in", c.run.burn_in)
        .meta("seed", c.run.seed)
        .meta("asymptotic_mse", sig(result.asymptotic_mse))
        .meta("asymptotic_se", sig(result.asymptotic_se))
        .meta("theory_mse", sig(result.theory_mse))
        .meta("reference_mse", sig(result.reference_mse))
        .meta("simulated_loss_db", sig(result.simulated_loss_db))
        .meta("theory_loss_db", sig(result.theory_loss_db))
        .meta(
            "config",
            serde_json::to_string(c).expect("config serializes"),
        );
    for (i, (mse, theory)) in result
        .mse_curve
        .iter()
        .zip(&result.theory_curve)
        .enumerate()
    {
        table.push(vec![(i + 1).to_string(), sig(*mse), sig(*theory)]);
    }
    table.to_text()
}

fn estimator_label(e: &EstimatorConfig) -> String {
    match e {
        EstimatorConfig::Quantized { n_bits, .. } => format!("quantized n_bits={n_bits}"),
        EstimatorConfig::Continuous { .. } => "continuous".into(),
    }
}

/// Scalar results of a run, including the gain-schedule parameters.
#[derive(Debug, Clone, Serialize)]
pub struct Summary<'a> {
    pub name: &'a str,
    pub signal: String,
    pub estimator: String,
    pub c_delta: Option<f64>,
    pub fisher_quantized: Option<f64>,
    pub fisher_continuous: f64,
    pub schedule: serde_json::Value,
    pub asymptotic_mse: f64,
    pub asymptotic_se: f64,
    pub theory_mse: f64,
    pub reference_mse: f64,
    pub simulated_loss_db: f64,
    pub theory_loss_db: f64,
    pub replications_used: u64,
    pub diverged: &'a [u64],
    pub wall_time_secs: f64,
}

pub fn summary(result: &ExperimentResult) -> Summary<'_> {
    let c = &result.config;
    let schedule = match c.signal.kind() {
        crate::simulator::SignalKind::Constant => serde_json::json!({
            "kind": "constant_param",
            "gain": "1/(k I)",
            "information": result.fisher,
        }),
        crate::simulator::SignalKind::Wiener => serde_json::json!({
            "kind": "wiener",
            "gain": result.config.signal.sigma_w() / result.fisher.sqrt(),
            "information": result.fisher,
        }),
        crate::simulator::SignalKind::WienerDrift => serde_json::json!({
            "kind": "wiener_drift",
            "gain": "(4 U^2 / I^2)^(1/3)",
            "information": result.fisher,
            "drift_gain": c.drift.gain,
            "drift_initial": c.drift.initial,
        }),
    };
    let quantized = matches!(c.estimator, EstimatorConfig::Quantized { .. });
    Summary {
        name: &c.name,
        signal: format!("{:?}", c.signal.kind()),
        estimator: estimator_label(&c.estimator),
        c_delta: result.c_delta,
        fisher_quantized: quantized.then_some(result.fisher),
        fisher_continuous: result.fisher_continuous,
        schedule,
        asymptotic_mse: result.asymptotic_mse,
        asymptotic_se: result.asymptotic_se,
        theory_mse: result.theory_mse,
        reference_mse: result.reference_mse,
        simulated_loss_db: result.simulated_loss_db,
        theory_loss_db: result.theory_loss_db,
        replications_used: result.replications_used,
        diverged: &result.diverged,
        wall_time_secs: result.wall_time_secs,
    }
}

pub fn summary_json(result: &ExperimentResult) -> String {
    serde_json::to_string_pretty(&summary(result)).expect("summary serializes")
}
