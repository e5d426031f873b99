//! Tables behind the loss figures: the theoretical loss table and the
//! simulated-vs-theory comparisons for the constant, Wiener and drift models.
//!
//! Replication counts are desk-scale; [`FigureSettings::scale`] multiplies
//! them. All runs of one figure share the seed, so curves for different
//! quantizer resolutions see common random numbers.

use crate::analysis::{loss_constant, loss_drift, loss_wiener};
use crate::estimator::DriftSmoother;
use crate::format::sig;
use crate::noise::{NoiseError, NoiseFamily, NoiseModel};
use crate::quantizer::{optimize_c_delta, CDeltaGrid, QuantizerError};
use crate::report::CsvTable;
use crate::simulator::{
    run_experiment, Drift, EstimatorConfig, ExperimentConfig, ExperimentResult, GridConfig,
    InitialEstimate, NoiseConfig, RunConfig, SignalModel, SimError,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FigureError {
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Quantizer(#[from] QuantizerError),
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error("scale must be positive, got {0}")]
    BadScale(f64),
}

/// Resolutions used by the loss table.
pub const LOSS_TABLE_BITS: [u32; 5] = [1, 2, 3, 4, 5];
/// Resolutions used by the simulated figures.
pub const SIMULATED_BITS: [u32; 4] = [2, 3, 4, 5];
/// Steps at which the constant-case loss curve is sampled.
pub const CONSTANT_CHECKPOINTS: [u64; 11] = [1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureSettings {
    pub seed: u64,
    pub scale: f64,
    pub grid: CDeltaGrid,
}

impl Default for FigureSettings {
    fn default() -> Self {
        Self {
            seed: 1,
            scale: 1.0,
            grid: CDeltaGrid::default(),
        }
    }
}

impl FigureSettings {
    fn replications(&self, base: u64) -> Result<u64, FigureError> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(FigureError::BadScale(self.scale));
        }
        Ok(((base as f64 * self.scale).round() as u64).max(2))
    }
}

/// One row of the loss table.
#[derive(Debug, Clone, PartialEq)]
pub struct LossRow {
    pub family: NoiseFamily,
    pub beta: f64,
    pub n_bits: u32,
    pub c_delta: f64,
    pub fisher_quantized: f64,
    pub fisher_continuous: f64,
    pub loss_db: f64,
    pub loss_wiener_db: f64,
    pub loss_drift_db: f64,
}

/// Optimal uniform design and losses for every (noise, N_B) pair.
pub fn loss_rows(
    noises: &[NoiseModel],
    bits: &[u32],
    grid: &CDeltaGrid,
) -> Result<Vec<LossRow>, FigureError> {
    let mut rows = Vec::with_capacity(noises.len() * bits.len());
    for noise in noises {
        let ic = noise.fisher_continuous()?;
        for &nb in bits {
            let design = optimize_c_delta(noise, 1usize << nb, grid)?;
            let iq = design.fisher();
            let lq = loss_constant(iq, ic).map_err(|e| SimError::Config(e.to_string()))?;
            rows.push(LossRow {
                family: noise.family(),
                beta: noise.beta(),
                n_bits: nb,
                c_delta: design.spec().c_delta(),
                fisher_quantized: iq,
                fisher_continuous: ic,
                loss_db: lq,
                loss_wiener_db: loss_wiener(iq, ic).expect("validated above"),
                loss_drift_db: loss_drift(iq, ic).expect("validated above"),
            });
        }
    }
    Ok(rows)
}

pub fn loss_table(rows: &[LossRow], grid: &CDeltaGrid) -> CsvTable {
    let mut table = CsvTable::new(&[
        "family",
        "beta",
        "n_bits",
        "c_delta",
        "iq",
        "ic",
        "loss_db",
        "loss_wiener_db",
        "loss_drift_db",
    ]);
    table
        .meta(
            "content",
            "quantization loss of the optimal uniform quantizer",
        )
        .meta("grid", format!("{}:{}:{}", grid.min, grid.step, grid.max));
    for r in rows {
        table.push(vec![
            r.family.to_string(),
            r.beta.to_string(),
            r.n_bits.to_string(),
            sig(r.c_delta),
            sig(r.fisher_quantized),
            sig(r.fisher_continuous),
            sig(r.loss_db),
            sig(r.loss_wiener_db),
            sig(r.loss_drift_db),
        ]);
    }
    table
}

/// `fig3.csv`: losses for the seven reference noises and 1–5 bits.
pub fn figure3(settings: &FigureSettings) -> Result<CsvTable, FigureError> {
    let rows = loss_rows(
        &NoiseModel::reference_set(),
        &LOSS_TABLE_BITS,
        &settings.grid,
    )?;
    Ok(loss_table(&rows, &settings.grid))
}

fn experiment(
    name: String,
    signal: SignalModel,
    noise: &NoiseModel,
    n_bits: u32,
    run: RunConfig,
    settings: &FigureSettings,
) -> ExperimentConfig {
    ExperimentConfig {
        name,
        signal,
        noise: NoiseConfig {
            family: noise.family(),
            beta: noise.beta(),
            delta: noise.delta(),
        },
        estimator: EstimatorConfig::Quantized {
            n_bits,
            c_delta: None,
            grid: GridConfig {
                min: settings.grid.min,
                max: settings.grid.max,
                step: settings.grid.step,
            },
            schedule: None,
        },
        run,
        initial: InitialEstimate::default(),
        drift: DriftSmoother::default(),
    }
}

/// `fig4.csv`: simulated loss against k for a constant parameter, with the
/// estimator started 3δ away, next to the constant theoretical loss.
pub fn figure4(settings: &FigureSettings) -> Result<CsvTable, FigureError> {
    let replications = settings.replications(2000)?;
    let mut table = CsvTable::new(&[
        "family",
        "beta",
        "n_bits",
        "k",
        "sim_loss_db",
        "theory_loss_db",
    ]);
    table
        .meta(
            "content",
            "constant parameter, simulated vs theoretical loss",
        )
        .meta("replications", replications)
        .meta("horizon", 2000)
        .meta("initial_offset_delta", 3)
        .meta("seed", settings.seed);
    for noise in NoiseModel::reference_set() {
        for nb in SIMULATED_BITS {
            let mut config = experiment(
                format!("fig4_{}_{}_nb{nb}", noise.family(), noise.beta()),
                SignalModel::Constant { x0: 0.0 },
                &noise,
                nb,
                RunConfig {
                    replications,
                    horizon: 2000,
                    burn_in: 0,
                    seed: settings.seed,
                },
                settings,
            );
            config.initial.offset = 3.0 * noise.delta();
            let result = run_experiment(&config)?;
            let losses = result.loss_curve();
            for k in CONSTANT_CHECKPOINTS {
                table.push(vec![
                    noise.family().to_string(),
                    noise.beta().to_string(),
                    nb.to_string(),
                    k.to_string(),
                    sig(losses[k as usize - 1]),
                    sig(result.theory_loss_db),
                ]);
            }
        }
    }
    Ok(table)
}

fn asymptotic_row(prefix: Vec<String>, result: &ExperimentResult) -> Vec<String> {
    let mut row = prefix;
    row.extend([
        sig(result.asymptotic_mse),
        sig(result.theory_mse),
        sig(result.simulated_loss_db),
        sig(result.theory_loss_db),
    ]);
    row
}

fn wiener_table(
    settings: &FigureSettings,
    noises: &[NoiseModel],
    sigmas: &[f64],
    content: &str,
) -> Result<CsvTable, FigureError> {
    let replications = settings.replications(500)?;
    let mut table = CsvTable::new(&[
        "family",
        "beta",
        "sigma_w",
        "n_bits",
        "asymptotic_mse",
        "theory_mse",
        "sim_loss_db",
        "theory_loss_db",
    ]);
    table
        .meta("content", content)
        .meta("replications", replications)
        .meta("horizon", 20_000)
        .meta("burn_in", 1000)
        .meta("seed", settings.seed);
    for noise in noises {
        for &sigma_w in sigmas {
            for nb in SIMULATED_BITS {
                let config = experiment(
                    format!(
                        "wiener_{}_{}_sw{sigma_w}_nb{nb}",
                        noise.family(),
                        noise.beta()
                    ),
                    SignalModel::Wiener { x0: 0.0, sigma_w },
                    noise,
                    nb,
                    RunConfig {
                        replications,
                        horizon: 20_000,
                        burn_in: 1000,
                        seed: settings.seed,
                    },
                    settings,
                );
                let result = run_experiment(&config)?;
                table.push(asymptotic_row(
                    vec![
                        noise.family().to_string(),
                        noise.beta().to_string(),
                        sig(sigma_w),
                        nb.to_string(),
                    ],
                    &result,
                ));
            }
        }
    }
    Ok(table)
}

fn gauss_and_cauchy() -> Vec<NoiseModel> {
    vec![
        NoiseModel::generalized_gaussian(2.0, 1.0).expect("valid"),
        NoiseModel::student_t(1.0, 1.0).expect("valid"),
    ]
}

/// `fig5.csv`: Wiener process with σ_w = 0.001 for the seven reference noises.
pub fn figure5(settings: &FigureSettings) -> Result<CsvTable, FigureError> {
    wiener_table(
        settings,
        &NoiseModel::reference_set(),
        &[0.001],
        "Wiener process, simulated vs theoretical loss",
    )
}

/// `fig6.csv`: Gaussian and Cauchy noise with σ_w = 0.1 and σ_w = 0.001.
pub fn figure6(settings: &FigureSettings) -> Result<CsvTable, FigureError> {
    wiener_table(
        settings,
        &gauss_and_cauchy(),
        &[0.1, 0.001],
        "Wiener process at two increment sizes, simulated vs theoretical loss",
    )
}

/// `fig7.csv`: Wiener process with drift u = σ_w = 1e-4, drift smoother gain
/// 1e-5 started at the true drift.
pub fn figure7(settings: &FigureSettings) -> Result<CsvTable, FigureError> {
    const U: f64 = 1e-4;
    const SIGMA_W: f64 = 1e-4;
    let replications = settings.replications(200)?;
    let smoother = DriftSmoother {
        gain: 1e-5,
        initial: U,
    };
    let mut table = CsvTable::new(&[
        "family",
        "beta",
        "n_bits",
        "u",
        "sigma_w",
        "drift_gain",
        "asymptotic_mse",
        "theory_mse",
        "sim_loss_db",
        "theory_loss_db",
    ]);
    table
        .meta(
            "content",
            "Wiener process with drift, simulated vs theoretical loss",
        )
        .meta("replications", replications)
        .meta("horizon", 20_000)
        .meta("burn_in", 1000)
        .meta("seed", settings.seed);
    for noise in gauss_and_cauchy() {
        for nb in SIMULATED_BITS {
            let mut config = experiment(
                format!("fig7_{}_{}_nb{nb}", noise.family(), noise.beta()),
                SignalModel::WienerDrift {
                    x0: 0.0,
                    sigma_w: SIGMA_W,
                    drift: Drift::Constant(U),
                },
                &noise,
                nb,
                RunConfig {
                    replications,
                    horizon: 20_000,
                    burn_in: 1000,
                    seed: settings.seed,
                },
                settings,
            );
            config.drift = smoother;
            let result = run_experiment(&config)?;
            table.push(asymptotic_row(
                vec![
                    noise.family().to_string(),
                    noise.beta().to_string(),
                    nb.to_string(),
                    sig(U),
                    sig(SIGMA_W),
                    sig(smoother.gain),
                ],
                &result,
            ));
        }
    }
    Ok(table)
}
