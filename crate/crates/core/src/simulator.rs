//! Monte Carlo engine for the three parameter models.
//!
//! Every replication draws from its own ChaCha8 stream, keyed by
//! `(seed, replication index)`. Replications are grouped into fixed blocks of
//! [`BLOCK_SIZE`]; block sums are combined with a pairwise reduction whose
//! shape depends only on the replication count. Results are therefore
//! bit-identical for any thread count.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{
    bcrb_asymptotic_approx, loss_db, mse_drift_continuous, PerformancePrediction,
};
use crate::estimator::{
    ContinuousEstimator, DriftSmoother, EstimatorError, GainSchedule, QuantizedEstimator,
    DEFAULT_DRIFT_FLOOR,
};
use crate::noise::{NoiseError, NoiseFamily, NoiseModel};
use crate::quantizer::{
    optimize_c_delta, CDeltaGrid, QuantizerDesign, QuantizerError, QuantizerSpec,
};

/// Replications per accumulation block.
pub const BLOCK_SIZE: u64 = 64;
/// Blocks evaluated in parallel before being folded into the running total.
const BLOCKS_PER_CHUNK: u64 = 256;
/// |X̂_k| above this multiple of δ aborts a replication.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("gain schedule {schedule:?} does not match signal model {signal:?}")]
    KindMismatch {
        signal: SignalKind,
        schedule: SignalKind,
    },
    #[error("{count} of {total} replications diverged (first: replication {first})")]
    DivergenceDominated {
        count: usize,
        total: u64,
        first: u64,
    },
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Quantizer(#[from] QuantizerError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalKind {
    Constant,
    Wiener,
    WienerDrift,
}

/// Mean u_k of the Wiener increments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Drift {
    Constant(f64),
    /// u_1, u_2, …; must cover the whole horizon.
    Sequence(Vec<f64>),
}

impl Drift {
    /// u_k for k ≥ 1.
    pub fn at(&self, k: u64) -> f64 {
        match self {
            Drift::Constant(u) => *u,
            Drift::Sequence(values) => values[(k - 1) as usize],
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            Drift::Constant(u) => *u == 0.0,
            Drift::Sequence(values) => values.iter().all(|u| *u == 0.0),
        }
    }
}

/// X_k = X_{k−1} + W_k with W_k ~ N(u_k, σ_w²).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalModel {
    Constant {
        #[serde(default)]
        x0: f64,
    },
    Wiener {
        #[serde(default)]
        x0: f64,
        sigma_w: f64,
    },
    WienerDrift {
        #[serde(default)]
        x0: f64,
        sigma_w: f64,
        drift: Drift,
    },
}

impl SignalModel {
    pub fn kind(&self) -> SignalKind {
        match self {
            SignalModel::Constant { .. } => SignalKind::Constant,
            SignalModel::Wiener { .. } => SignalKind::Wiener,
            SignalModel::WienerDrift { .. } => SignalKind::WienerDrift,
        }
    }

    pub fn x0(&self) -> f64 {
        match *self {
            SignalModel::Constant { x0 }
            | SignalModel::Wiener { x0, .. }
            | SignalModel::WienerDrift { x0, .. } => x0,
        }
    }

    pub fn sigma_w(&self) -> f64 {
        match *self {
            SignalModel::Constant { .. } => 0.0,
            SignalModel::Wiener { sigma_w, .. } | SignalModel::WienerDrift { sigma_w, .. } => {
                sigma_w
            }
        }
    }

    pub fn drift_at(&self, k: u64) -> f64 {
        match self {
            SignalModel::WienerDrift { drift, .. } => drift.at(k),
            _ => 0.0,
        }
    }

    pub fn validate(&self, horizon: u64) -> Result<(), SimError> {
        if !self.x0().is_finite() {
            return Err(SimError::Config("x0 must be finite".into()));
        }
        match self {
            SignalModel::Constant { .. } => Ok(()),
            SignalModel::Wiener { sigma_w, .. } | SignalModel::WienerDrift { sigma_w, .. }
                if !(*sigma_w > 0.0 && sigma_w.is_finite()) =>
            {
                Err(SimError::Config(format!(
                    "sigma_w must be > 0, got {sigma_w}"
                )))
            }
            SignalModel::Wiener { .. } => Ok(()),
            SignalModel::WienerDrift { drift, .. } => {
                if drift.is_zero() {
                    return Err(SimError::Config(
                        "wiener_drift requires a nonzero drift; use kind = \"wiener\"".into(),
                    ));
                }
                match drift {
                    Drift::Constant(u) if !u.is_finite() => {
                        Err(SimError::Config("drift must be finite".into()))
                    }
                    Drift::Sequence(v) if (v.len() as u64) < horizon => {
                        Err(SimError::Config(format!(
                            "drift sequence has {} values, horizon is {horizon}",
                            v.len()
                        )))
                    }
                    _ => Ok(()),
                }
            }
        }
    }

    /// Draws X_k from X_{k−1}.
    pub fn advance<R: Rng + ?Sized>(&self, x_prev: f64, k: u64, rng: &mut R) -> f64 {
        match self {
            SignalModel::Constant { .. } => x_prev,
            SignalModel::Wiener { sigma_w, .. } => {
                let z: f64 = StandardNormal.sample(rng);
                x_prev + sigma_w * z
            }
            SignalModel::WienerDrift { sigma_w, drift, .. } => {
                let z: f64 = StandardNormal.sample(rng);
                x_prev + drift.at(k) + sigma_w * z
            }
        }
    }
}

/// X_1 … X_K.
pub fn generate_path<R: Rng + ?Sized>(
    signal: &SignalModel,
    horizon: u64,
    rng: &mut R,
) -> Result<Vec<f64>, SimError> {
    signal.validate(horizon)?;
    let mut x = signal.x0();
    Ok((1..=horizon)
        .map(|k| {
            x = signal.advance(x, k, rng);
            x
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub family: NoiseFamily,
    pub beta: f64,
    #[serde(default = "one")]
    pub delta: f64,
}

fn one() -> f64 {
    1.0
}

impl NoiseConfig {
    pub fn model(&self) -> Result<NoiseModel, NoiseError> {
        NoiseModel::new(self.family, self.beta, self.delta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "grid_min")]
    pub min: f64,
    #[serde(default = "grid_max")]
    pub max: f64,
    #[serde(default = "grid_step")]
    pub step: f64,
}

fn grid_min() -> f64 {
    CDeltaGrid::default().min
}
fn grid_max() -> f64 {
    CDeltaGrid::default().max
}
fn grid_step() -> f64 {
    CDeltaGrid::default().step
}

impl Default for GridConfig {
    fn default() -> Self {
        let g = CDeltaGrid::default();
        Self {
            min: g.min,
            max: g.max,
            step: g.step,
        }
    }
}

impl From<GridConfig> for CDeltaGrid {
    fn from(g: GridConfig) -> Self {
        CDeltaGrid {
            min: g.min,
            max: g.max,
            step: g.step,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EstimatorConfig {
    /// Uniform quantizer with `2^n_bits` intervals; c_Δ from the grid search
    /// unless given.
    Quantized {
        n_bits: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c_delta: Option<f64>,
        #[serde(default)]
        grid: GridConfig,
        /// Gain schedule; must match the signal kind when given.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        schedule: Option<SignalKind>,
    },
    /// Score-based reference algorithm with unquantized observations.
    Continuous {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        schedule: Option<SignalKind>,
    },
}

impl EstimatorConfig {
    pub fn quantized(n_bits: u32) -> Self {
        EstimatorConfig::Quantized {
            n_bits,
            c_delta: None,
            grid: GridConfig::default(),
            schedule: None,
        }
    }

    fn schedule(&self) -> Option<SignalKind> {
        match self {
            EstimatorConfig::Quantized { schedule, .. }
            | EstimatorConfig::Continuous { schedule } => *schedule,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub replications: u64,
    pub horizon: u64,
    #[serde(default)]
    pub burn_in: u64,
    #[serde(default)]
    pub seed: u64,
}

/// X̂_0 = x_0 + offset + spread·N(0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialEstimate {
    #[serde(default)]
    pub offset: f64,
    #[serde(default)]
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    pub signal: SignalModel,
    pub noise: NoiseConfig,
    pub estimator: EstimatorConfig,
    pub run: RunConfig,
    #[serde(default)]
    pub initial: InitialEstimate,
    #[serde(default)]
    pub drift: DriftSmoother,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let run = &self.run;
        if run.replications == 0 {
            return Err(SimError::Config("replications must be >= 1".into()));
        }
        if run.horizon == 0 || run.horizon <= run.burn_in {
            return Err(SimError::Config(format!(
                "horizon ({}) must exceed burn_in ({})",
                run.horizon, run.burn_in
            )));
        }
        self.signal.validate(run.horizon)?;
        self.noise.model()?;
        if let Some(schedule) = self.estimator.schedule() {
            if schedule != self.signal.kind() {
                return Err(SimError::KindMismatch {
                    signal: self.signal.kind(),
                    schedule,
                });
            }
        }
        if let EstimatorConfig::Quantized { n_bits, .. } = self.estimator {
            if !(1..=16).contains(&n_bits) {
                return Err(SimError::Config(format!(
                    "n_bits must be in 1..=16, got {n_bits}"
                )));
            }
        }
        if !(self.initial.offset.is_finite() && self.initial.spread >= 0.0) {
            return Err(SimError::Config("invalid initial estimate".into()));
        }
        if self.signal.kind() == SignalKind::WienerDrift {
            self.drift.validate()?;
        }
        Ok(())
    }

    /// Builds the quantizer design for a quantized config.
    pub fn design(&self) -> Result<Option<QuantizerDesign>, SimError> {
        let noise = self.noise.model()?;
        match &self.estimator {
            EstimatorConfig::Quantized {
                n_bits,
                c_delta,
                grid,
                ..
            } => {
                let design = match c_delta {
                    Some(c) => {
                        QuantizerDesign::new(&noise, &QuantizerSpec::uniform_bits(*n_bits, *c)?)?
                    }
                    None => optimize_c_delta(&noise, 1usize << n_bits, &(*grid).into())?,
                };
                Ok(Some(design))
            }
            EstimatorConfig::Continuous { .. } => Ok(None),
        }
    }
}

/// Per-replication RNG stream.
pub fn replication_rng(seed: u64, replication: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication);
    rng
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    /// c_Δ of the quantizer (None for the continuous reference).
    pub c_delta: Option<f64>,
    /// Fisher information driving the gains (I_q, or I_c for the reference).
    pub fisher: f64,
    pub fisher_continuous: f64,
    /// mse_curve[k−1] = mean over replications of (X̂_k − X_k)².
    pub mse_curve: Vec<f64>,
    pub theory_curve: Vec<f64>,
    /// K·MSE_K for a constant parameter; time average over k > burn_in otherwise.
    pub asymptotic_mse: f64,
    /// Standard error of `asymptotic_mse` across replications.
    pub asymptotic_se: f64,
    /// Prediction matching `asymptotic_mse`.
    pub theory_mse: f64,
    /// Continuous-measurement benchmark: 1/I_c, σ_w/√I_c, or 3(u/(4I_c))^{2/3}.
    pub reference_mse: f64,
    pub simulated_loss_db: f64,
    pub theory_loss_db: f64,
    pub replications_used: u64,
    pub diverged: Vec<u64>,
    pub wall_time_secs: f64,
}

impl ExperimentResult {
    /// Simulated loss per step: 10·log₁₀(MSE_k / reference_k).
    pub fn loss_curve(&self) -> Vec<f64> {
        let ic = self.fisher_continuous;
        self.mse_curve
            .iter()
            .enumerate()
            .map(|(i, &mse)| {
                let k = (i + 1) as u64;
                let reference = match self.config.signal.kind() {
                    SignalKind::Constant => 1.0 / (k as f64 * ic),
                    _ => self.reference_at(k),
                };
                loss_db(mse, reference)
            })
            .collect()
    }

    fn reference_at(&self, k: u64) -> f64 {
        let ic = self.fisher_continuous;
        match &self.config.signal {
            SignalModel::Constant { .. } => 1.0 / (k as f64 * ic),
            SignalModel::Wiener { sigma_w, .. } => bcrb_asymptotic_approx(ic, *sigma_w),
            SignalModel::WienerDrift { drift, .. } => mse_drift_continuous(drift.at(k), ic),
        }
    }
}

#[derive(Debug, Clone)]
struct Accumulator {
    sums: Vec<f64>,
    stat_sum: f64,
    stat_sq_sum: f64,
    count: u64,
    diverged: Vec<u64>,
}

impl Accumulator {
    fn new(horizon: usize) -> Self {
        Self {
            sums: vec![0.0; horizon],
            stat_sum: 0.0,
            stat_sq_sum: 0.0,
            count: 0,
            diverged: Vec::new(),
        }
    }

    fn merge(mut self, other: Accumulator) -> Self {
        for (a, b) in self.sums.iter_mut().zip(other.sums) {
            *a += b;
        }
        self.stat_sum += other.stat_sum;
        self.stat_sq_sum += other.stat_sq_sum;
        self.count += other.count;
        self.diverged.extend(other.diverged);
        self
    }
}

fn pairwise(mut items: Vec<Accumulator>) -> Option<Accumulator> {
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut it = items.into_iter();
        while let Some(a) = it.next() {
            next.push(match it.next() {
                Some(b) => a.merge(b),
                None => a,
            });
        }
        items = next;
    }
    items.pop()
}

enum Tracker<'a> {
    Quantized(QuantizedEstimator<'a>),
    Continuous(ContinuousEstimator),
}

impl Tracker<'_> {
    fn observe(&mut self, y: f64) -> Result<f64, EstimatorError> {
        match self {
            Tracker::Quantized(e) => {
                e.observe(y)?;
                Ok(e.estimate())
            }
            Tracker::Continuous(e) => e.observe(y),
        }
    }
}

struct Prepared {
    design: Option<QuantizerDesign>,
    noise: NoiseModel,
    schedule: GainSchedule,
    fisher: f64,
    ic: f64,
}

fn prepare(config: &ExperimentConfig) -> Result<Prepared, SimError> {
    config.validate()?;
    let noise = config.noise.model()?;
    let ic = noise.fisher_continuous()?;
    let design = config.design()?;
    let fisher = design.as_ref().map(|d| d.fisher()).unwrap_or(ic);
    let schedule = match &config.signal {
        SignalModel::Constant { .. } => GainSchedule::constant_param(fisher)?,
        SignalModel::Wiener { sigma_w, .. } => GainSchedule::wiener(fisher, *sigma_w)?,
        SignalModel::WienerDrift { .. } => {
            GainSchedule::wiener_drift_with_floor(fisher, DEFAULT_DRIFT_FLOOR)?
        }
    };
    Ok(Prepared {
        design,
        noise,
        schedule,
        fisher,
        ic,
    })
}

fn run_replication(
    config: &ExperimentConfig,
    prepared: &Prepared,
    replication: u64,
    errors: &mut [f64],
) -> Result<Option<f64>, SimError> {
    let mut rng = replication_rng(config.run.seed, replication);
    let sampler = prepared.noise.sampler();
    let signal = &config.signal;
    let mut x = signal.x0();
    let jitter: f64 = if config.initial.spread > 0.0 {
        let z: f64 = StandardNormal.sample(&mut rng);
        config.initial.spread * z
    } else {
        0.0
    };
    let x_hat0 = x + config.initial.offset + jitter;
    let with_drift = signal.kind() == SignalKind::WienerDrift;
    let mut tracker = match &prepared.design {
        Some(design) => {
            let mut e = QuantizedEstimator::new(design, prepared.schedule, x_hat0);
            if with_drift {
                e = e.with_drift_smoother(config.drift)?;
            }
            Tracker::Quantized(e)
        }
        None => {
            let mut e = ContinuousEstimator::new(&prepared.noise, prepared.schedule, x_hat0)?;
            if with_drift {
                e = e.with_drift_smoother(config.drift)?;
            }
            Tracker::Continuous(e)
        }
    };
    let limit = DIVERGENCE_LIMIT * prepared.noise.delta();
    for (i, slot) in errors.iter_mut().enumerate() {
        let k = (i + 1) as u64;
        x = signal.advance(x, k, &mut rng);
        let y = x + sampler.sample(&mut rng);
        let estimate = tracker.observe(y)?;
        if !(estimate.abs() <= limit) {
            return Ok(None);
        }
        let err = estimate - x;
        *slot = err * err;
    }
    let stat = match signal.kind() {
        SignalKind::Constant => config.run.horizon as f64 * errors[errors.len() - 1],
        _ => {
            let tail = &errors[config.run.burn_in as usize..];
            tail.iter().sum::<f64>() / tail.len() as f64
        }
    };
    Ok(Some(stat))
}

fn run_block(
    config: &ExperimentConfig,
    prepared: &Prepared,
    block: u64,
) -> Result<Accumulator, SimError> {
    let horizon = config.run.horizon as usize;
    let mut acc = Accumulator::new(horizon);
    let mut errors = vec![0.0; horizon];
    let first = block * BLOCK_SIZE;
    let last = (first + BLOCK_SIZE).min(config.run.replications);
    for rep in first..last {
        match run_replication(config, prepared, rep, &mut errors)? {
            Some(stat) => {
                for (a, e) in acc.sums.iter_mut().zip(&errors) {
                    *a += e;
                }
                acc.stat_sum += stat;
                acc.stat_sq_sum += stat * stat;
                acc.count += 1;
            }
            None => acc.diverged.push(rep),
        }
    }
    Ok(acc)
}

/// Runs all replications and aggregates the MSE statistics.
///
/// Replications whose estimate leaves ±10⁶·δ are excluded from the averages
/// and listed in `diverged`; if more than half diverge the run fails.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult, SimError> {
    let started = Instant::now();
    let prepared = prepare(config)?;
    let run = &config.run;
    let n_blocks = run.replications.div_ceil(BLOCK_SIZE);
    let mut total: Option<Accumulator> = None;
    let mut chunk_start = 0;
    while chunk_start < n_blocks {
        let chunk_end = (chunk_start + BLOCKS_PER_CHUNK).min(n_blocks);
        let blocks = (chunk_start..chunk_end)
            .into_par_iter()
            .map(|b| run_block(config, &prepared, b))
            .collect::<Result<Vec<_>, _>>()?;
        let chunk = pairwise(blocks).expect("non-empty chunk");
        total = Some(match total {
            Some(t) => t.merge(chunk),
            None => chunk,
        });
        chunk_start = chunk_end;
    }
    let total = total.expect("at least one replication");
    if total.diverged.len() as u64 * 2 > run.replications {
        return Err(SimError::DivergenceDominated {
            count: total.diverged.len(),
            total: run.replications,
            first: total.diverged[0],
        });
    }
    let n = total.count as f64;
    let mse_curve: Vec<f64> = total.sums.iter().map(|s| s / n).collect();
    let asymptotic_mse = total.stat_sum / n;
    let variance = if total.count > 1 {
        ((total.stat_sq_sum - n * asymptotic_mse * asymptotic_mse) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    let asymptotic_se = (variance / n).sqrt();

    let prediction =
        PerformancePrediction::new(prepared.fisher).map_err(|e| SimError::Config(e.to_string()))?;
    let ic = prepared.ic;
    let horizon = run.horizon;
    let (theory_curve, theory_mse, reference_mse): (Vec<f64>, f64, f64) = match &config.signal {
        SignalModel::Constant { .. } => (
            (1..=horizon).map(|k| prediction.var_constant(k)).collect(),
            prediction.sigma_inf_sq(),
            1.0 / ic,
        ),
        SignalModel::Wiener { sigma_w, .. } => {
            let m = prediction.mse_wiener(*sigma_w);
            (
                vec![m; horizon as usize],
                m,
                bcrb_asymptotic_approx(ic, *sigma_w),
            )
        }
        SignalModel::WienerDrift { drift, .. } => {
            let curve: Vec<f64> = (1..=horizon)
                .map(|k| prediction.mse_drift(drift.at(k)))
                .collect();
            let window = run.burn_in as usize..horizon as usize;
            let span = window.len() as f64;
            let theory = curve[window.clone()].iter().sum::<f64>() / span;
            let reference = window
                .map(|i| mse_drift_continuous(drift.at(i as u64 + 1), ic))
                .sum::<f64>()
                / span;
            (curve, theory, reference)
        }
    };
    Ok(ExperimentResult {
        config: config.clone(),
        c_delta: prepared.design.as_ref().map(|d| d.spec().c_delta()),
        fisher: prepared.fisher,
        fisher_continuous: ic,
        mse_curve,
        theory_curve,
        asymptotic_mse,
        asymptotic_se,
        theory_mse,
        reference_mse,
        simulated_loss_db: loss_db(asymptotic_mse, reference_mse),
        theory_loss_db: loss_db(theory_mse, reference_mse),
        replications_used: total.count,
        diverged: total.diverged,
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}

/// Runs the continuous-observation reference algorithm for the same signal,
/// noise and run settings.
pub fn run_continuous_reference(config: &ExperimentConfig) -> Result<ExperimentResult, SimError> {
    let mut reference = config.clone();
    reference.estimator = EstimatorConfig::Continuous {
        schedule: config.estimator.schedule(),
    };
    run_experiment(&reference)
}
