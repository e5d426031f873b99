//! Adjustable symmetric quantizer and its Fisher-information-optimal design.
//!
//! The static quantizer has `N_I` intervals with normalized thresholds
//! `0 = τ_0 < τ_1 < … < τ_{N_I/2} = +∞`, mirrored on the negative side.
//! An observation `y` with offset `b` and step `Δ` is mapped to
//! `i·sign(y − b)` when `|y − b|/Δ ∈ [τ_{i−1}, τ_i)`. There is no zero symbol.

mod table;

pub use table::{DesignTable, TableError};

use rayon::prelude::*;
use thiserror::Error;

use crate::noise::NoiseModel;

/// Interval masses below this are treated as a degenerate design.
pub const MIN_INTERVAL_MASS: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantizerError {
    #[error("number of intervals must be even and >= 2, got {0}")]
    OddIntervals(usize),
    #[error("expected {expected} finite thresholds, got {got}")]
    ThresholdCount { expected: usize, got: usize },
    #[error("thresholds must be finite, positive and strictly increasing")]
    BadThresholds,
    #[error("step constant c_delta must be finite and > 0, got {0}")]
    BadStep(f64),
    #[error("interval {index} has probability {mass:e}; levels would be ill-conditioned")]
    DegenerateInterval { index: usize, mass: f64 },
    #[error("level and statistic vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("invalid c_delta grid: {0}")]
    BadGrid(String),
    #[error("no grid point produced a valid design")]
    NoValidGridPoint,
}

/// Static symmetric quantizer: interval count, normalized thresholds and
/// the step constant `c_Δ` (so that `Δ = c_Δ·δ`).
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizerSpec {
    n_intervals: usize,
    // τ_1 … τ_{N_I/2−1}; τ_0 = 0 and τ_{N_I/2} = ∞ are implicit
    thresholds: Vec<f64>,
    c_delta: f64,
}

impl QuantizerSpec {
    pub fn new(
        n_intervals: usize,
        thresholds: Vec<f64>,
        c_delta: f64,
    ) -> Result<Self, QuantizerError> {
        if n_intervals < 2 || !n_intervals.is_multiple_of(2) {
            return Err(QuantizerError::OddIntervals(n_intervals));
        }
        let expected = n_intervals / 2 - 1;
        if thresholds.len() != expected {
            return Err(QuantizerError::ThresholdCount {
                expected,
                got: thresholds.len(),
            });
        }
        let mut prev = 0.0;
        for &t in &thresholds {
            if !(t.is_finite() && t > prev) {
                return Err(QuantizerError::BadThresholds);
            }
            prev = t;
        }
        if !(c_delta.is_finite() && c_delta > 0.0) {
            return Err(QuantizerError::BadStep(c_delta));
        }
        Ok(Self {
            n_intervals,
            thresholds,
            c_delta,
        })
    }

    /// Uniform thresholds τ_i = i for i < N_I/2.
    pub fn uniform(n_intervals: usize, c_delta: f64) -> Result<Self, QuantizerError> {
        if n_intervals < 2 || !n_intervals.is_multiple_of(2) {
            return Err(QuantizerError::OddIntervals(n_intervals));
        }
        let thresholds = (1..n_intervals / 2).map(|i| i as f64).collect();
        Self::new(n_intervals, thresholds, c_delta)
    }

    /// Uniform quantizer with `2^n_bits` intervals.
    pub fn uniform_bits(n_bits: u32, c_delta: f64) -> Result<Self, QuantizerError> {
        Self::uniform(1usize << n_bits, c_delta)
    }

    pub fn n_intervals(&self) -> usize {
        self.n_intervals
    }

    pub fn half(&self) -> usize {
        self.n_intervals / 2
    }

    pub fn c_delta(&self) -> f64 {
        self.c_delta
    }

    /// Finite thresholds τ_1 … τ_{N_I/2−1}.
    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// τ_i for i in 0..=N_I/2, with τ_0 = 0 and τ_{N_I/2} = ∞.
    pub fn edge(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else if i >= self.half() {
            f64::INFINITY
        } else {
            self.thresholds[i - 1]
        }
    }

    pub fn with_c_delta(&self, c_delta: f64) -> Result<Self, QuantizerError> {
        Self::new(self.n_intervals, self.thresholds.clone(), c_delta)
    }

    /// Maps a normalized input `r = (y − b)/Δ` to a symbol in
    /// {−N_I/2, …, −1, +1, …, +N_I/2}. `r = 0` maps to +1.
    pub fn quantize_normalized(&self, r: f64) -> i32 {
        let magnitude = r.abs();
        // number of finite thresholds <= |r|
        let idx = self.thresholds.partition_point(|&t| t <= magnitude) + 1;
        let idx = idx as i32;
        if r < 0.0 {
            -idx
        } else {
            idx
        }
    }
}

/// Interval probabilities F_d[i] and density differences f_d[i] for the
/// positive symbols i = 1..N_I/2, with the offset placed at the parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalStats {
    pub mass: Vec<f64>,
    pub density_diff: Vec<f64>,
}

/// Computes F_d and f_d for a noise model and quantizer with Δ = c_Δ·δ.
pub fn interval_stats(
    model: &NoiseModel,
    spec: &QuantizerSpec,
) -> Result<IntervalStats, QuantizerError> {
    let step = spec.c_delta() * model.delta();
    let half = spec.half();
    let mut mass = Vec::with_capacity(half);
    let mut density_diff = Vec::with_capacity(half);
    for i in 1..=half {
        let lo = spec.edge(i - 1) * step;
        let hi = spec.edge(i) * step;
        let m = model.interval_mass(lo, hi);
        if !(m >= MIN_INTERVAL_MASS) {
            return Err(QuantizerError::DegenerateInterval { index: i, mass: m });
        }
        mass.push(m);
        density_diff.push(model.pdf(lo) - model.pdf(hi));
    }
    Ok(IntervalStats { mass, density_diff })
}

fn check_lengths(mass: &[f64], density_diff: &[f64]) -> Result<(), QuantizerError> {
    if mass.len() != density_diff.len() {
        return Err(QuantizerError::LengthMismatch(
            mass.len(),
            density_diff.len(),
        ));
    }
    for (i, &m) in mass.iter().enumerate() {
        if !(m >= MIN_INTERVAL_MASS) {
            return Err(QuantizerError::DegenerateInterval {
                index: i + 1,
                mass: m,
            });
        }
    }
    Ok(())
}

/// Optimal output levels η_i = f_d[i] / F_d[i].
pub fn optimal_levels(mass: &[f64], density_diff: &[f64]) -> Result<Vec<f64>, QuantizerError> {
    check_lengths(mass, density_diff)?;
    Ok(density_diff.iter().zip(mass).map(|(f, m)| f / m).collect())
}

/// Quantized Fisher information I_q = 2 Σ f_d[i]² / F_d[i].
pub fn fisher_quantized(mass: &[f64], density_diff: &[f64]) -> Result<f64, QuantizerError> {
    check_lengths(mass, density_diff)?;
    Ok(2.0
        * density_diff
            .iter()
            .zip(mass)
            .map(|(f, m)| f * f / m)
            .sum::<f64>())
}

/// Second moment of the output levels at the parameter, R = 2 Σ η_i² F_d[i].
pub fn level_second_moment(levels: &[f64], mass: &[f64]) -> f64 {
    2.0 * levels.iter().zip(mass).map(|(e, m)| e * e * m).sum::<f64>()
}

/// Slope of the mean field at the parameter, h_x̂ = −2 Σ η_i f_d[i].
pub fn level_slope(levels: &[f64], density_diff: &[f64]) -> f64 {
    -2.0 * levels
        .iter()
        .zip(density_diff)
        .map(|(e, f)| e * f)
        .sum::<f64>()
}

/// A quantizer together with its interval statistics and output levels
/// for a specific noise model.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizerDesign {
    noise: NoiseModel,
    spec: QuantizerSpec,
    step: f64,
    mass: Vec<f64>,
    density_diff: Vec<f64>,
    levels: Vec<f64>,
    fisher: f64,
}

impl QuantizerDesign {
    /// Builds the design with optimal levels η* = f_d / F_d.
    pub fn new(noise: &NoiseModel, spec: &QuantizerSpec) -> Result<Self, QuantizerError> {
        let stats = interval_stats(noise, spec)?;
        let levels = optimal_levels(&stats.mass, &stats.density_diff)?;
        let fisher = fisher_quantized(&stats.mass, &stats.density_diff)?;
        Ok(Self {
            noise: *noise,
            spec: spec.clone(),
            step: spec.c_delta() * noise.delta(),
            mass: stats.mass,
            density_diff: stats.density_diff,
            levels,
            fisher,
        })
    }

    /// Replaces the output levels (positive-index half; the negative half is
    /// always the odd extension). Used to study suboptimal designs.
    pub fn with_levels(mut self, levels: Vec<f64>) -> Result<Self, QuantizerError> {
        if levels.len() != self.levels.len() {
            return Err(QuantizerError::LengthMismatch(
                levels.len(),
                self.levels.len(),
            ));
        }
        self.levels = levels;
        Ok(self)
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn spec(&self) -> &QuantizerSpec {
        &self.spec
    }

    /// Quantizer step Δ = c_Δ·δ.
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn density_diff(&self) -> &[f64] {
        &self.density_diff
    }

    /// Output levels η_1 … η_{N_I/2}.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Quantized Fisher information I_q of the interval statistics.
    pub fn fisher(&self) -> f64 {
        self.fisher
    }

    /// Output level for symbol `i`, with η_{−i} = −η_i.
    pub fn level(&self, symbol: i32) -> f64 {
        debug_assert!(symbol != 0);
        let magnitude = self.levels[symbol.unsigned_abs() as usize - 1];
        if symbol < 0 {
            -magnitude
        } else {
            magnitude
        }
    }

    /// Quantizer output for observation `y` and offset `offset`.
    pub fn quantize(&self, y: f64, offset: f64) -> i32 {
        self.spec.quantize_normalized((y - offset) / self.step)
    }

    /// Mean field h̃(ε) = E[η(Q((V − ε)/Δ))] for an estimation error ε = x̂ − x.
    pub fn mean_field(&self, eps: f64) -> f64 {
        let mut h = 0.0;
        for (i, &eta) in self.levels.iter().enumerate() {
            let lo = self.spec.edge(i) * self.step;
            let hi = self.spec.edge(i + 1) * self.step;
            let positive = self.noise.interval_mass(lo + eps, hi + eps);
            let negative = self.noise.interval_mass(-hi + eps, -lo + eps);
            h += eta * (positive - negative);
        }
        h
    }

    /// h_x̂ = −2 Σ η_i f_d[i]; equals −I_q for optimal levels.
    pub fn mean_field_slope(&self) -> f64 {
        level_slope(&self.levels, &self.density_diff)
    }

    /// R = 2 Σ η_i² F_d[i]; equals I_q for optimal levels.
    pub fn second_moment(&self) -> f64 {
        level_second_moment(&self.levels, &self.mass)
    }
}

/// Evenly spaced grid of c_Δ values, `min, min + step, …` up to `max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CDeltaGrid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Default for CDeltaGrid {
    fn default() -> Self {
        Self {
            min: 0.01,
            max: 10.0,
            step: 0.01,
        }
    }
}

impl CDeltaGrid {
    pub fn points(&self) -> Result<Vec<f64>, QuantizerError> {
        let ok = self.min.is_finite()
            && self.max.is_finite()
            && self.step.is_finite()
            && self.min > 0.0
            && self.step > 0.0
            && self.max >= self.min;
        if !ok {
            return Err(QuantizerError::BadGrid(format!(
                "min={} max={} step={}",
                self.min, self.max, self.step
            )));
        }
        let n = ((self.max - self.min) / self.step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| self.min + i as f64 * self.step).collect())
    }
}

/// Relative tolerance under which grid values count as tied.
const TIE_TOLERANCE: f64 = 1e-12;

/// Grid search over c_Δ for uniform thresholds. Returns the design at the
/// smallest c_Δ whose I_q is within a relative 1e-12 of the grid maximum.
pub fn optimize_c_delta(
    noise: &NoiseModel,
    n_intervals: usize,
    grid: &CDeltaGrid,
) -> Result<QuantizerDesign, QuantizerError> {
    let points = grid.points()?;
    let template = QuantizerSpec::uniform(n_intervals, 1.0)?;
    let values: Vec<f64> = points
        .par_iter()
        .map(|&c| {
            let spec = template.with_c_delta(c).ok()?;
            let stats = interval_stats(noise, &spec).ok()?;
            fisher_quantized(&stats.mass, &stats.density_diff).ok()
        })
        .map(|v| v.unwrap_or(f64::NEG_INFINITY))
        .collect();
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !best.is_finite() {
        return Err(QuantizerError::NoValidGridPoint);
    }
    let index = values
        .iter()
        .position(|&v| v >= best - TIE_TOLERANCE * best.abs())
        .expect("maximum is attained");
    QuantizerDesign::new(noise, &template.with_c_delta(points[index])?)
}

/// I_q evaluated at every grid point (None where the design is degenerate).
pub fn fisher_profile(
    noise: &NoiseModel,
    n_intervals: usize,
    grid: &CDeltaGrid,
) -> Result<Vec<(f64, Option<f64>)>, QuantizerError> {
    let template = QuantizerSpec::uniform(n_intervals, 1.0)?;
    Ok(grid
        .points()?
        .into_par_iter()
        .map(|c| {
            let value = template
                .with_c_delta(c)
                .ok()
                .and_then(|spec| QuantizerDesign::new(noise, &spec).ok())
                .map(|d| d.fisher());
            (c, value)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn gauss() -> NoiseModel {
        NoiseModel::generalized_gaussian(2.0, 1.0).unwrap()
    }

    /// Design, or None when an overload interval has no representable mass.
    fn design(m: &NoiseModel, spec: &QuantizerSpec) -> Option<QuantizerDesign> {
        match QuantizerDesign::new(m, spec) {
            Ok(d) => Some(d),
            Err(QuantizerError::DegenerateInterval { .. }) => None,
            Err(e) => panic!("{m}: {e}"),
        }
    }

    fn laplace(delta: f64) -> NoiseModel {
        NoiseModel::generalized_gaussian(1.0, delta).unwrap()
    }

    #[test]
    fn quantize_examples() {
        let spec = QuantizerSpec::new(4, vec![1.0], 1.0).unwrap();
        let design = QuantizerDesign::new(&gauss(), &spec).unwrap();
        assert_eq!(design.quantize(0.5, 0.0), 1);
        assert_eq!(design.quantize(-2.3, 0.0), -2);
        assert_eq!(design.quantize(1.7, 1.7), 1);
        assert_eq!(design.quantize(1.0, 0.0), 2);
        assert_eq!(design.quantize(-1.0, 0.0), -2);
        assert_eq!(design.quantize(-0.999, 0.0), -1);
        assert_eq!(design.quantize(1e300, 0.0), 2);
    }

    #[test]
    fn quantize_never_zero() {
        let spec = QuantizerSpec::uniform(16, 0.3).unwrap();
        for i in -2000..2000 {
            let s = spec.quantize_normalized(i as f64 * 0.01);
            assert!(s != 0 && s.abs() <= 8);
        }
    }

    #[test]
    fn spec_validation() {
        assert!(QuantizerSpec::uniform(3, 1.0).is_err());
        assert!(QuantizerSpec::uniform(0, 1.0).is_err());
        assert!(QuantizerSpec::new(6, vec![1.0], 1.0).is_err());
        assert!(QuantizerSpec::new(6, vec![2.0, 1.0], 1.0).is_err());
        assert!(QuantizerSpec::new(4, vec![1.0], 0.0).is_err());
        let two = QuantizerSpec::uniform(2, 1.0).unwrap();
        assert!(two.thresholds().is_empty());
        assert_eq!(two.edge(1), f64::INFINITY);
    }

    #[test]
    fn interval_stats_gaussian_two_bits() {
        let g = gauss();
        let spec = QuantizerSpec::uniform(4, 1.0).unwrap();
        let stats = interval_stats(&g, &spec).unwrap();
        // quadrature oracle for F_d
        let f1 = integrate(|x| g.pdf(x), 0.0, 1.0, 1e-15);
        let f2 = integrate(|x| g.pdf(x), 1.0, 12.0, 1e-15);
        assert!((stats.mass[0] - f1).abs() < 1e-14);
        assert!((stats.mass[1] - f2).abs() < 1e-14);
        assert!((stats.mass[0] - 0.421_350_396_474_857_4).abs() < 1e-12);
        assert!((stats.mass[1] - 0.078_649_603_525_142_6).abs() < 1e-12);
        let f0 = 1.0 / PI.sqrt();
        let f1e = (-1.0f64).exp() / PI.sqrt();
        assert!((stats.density_diff[0] - (f0 - f1e)).abs() < 1e-15);
        assert!((stats.density_diff[1] - f1e).abs() < 1e-15);
        assert!((stats.density_diff[0] - 0.356_635_8).abs() < 1e-6);
        assert!((stats.density_diff[1] - 0.207_553_0).abs() < 1e-6);
        let levels = optimal_levels(&stats.mass, &stats.density_diff).unwrap();
        assert!((levels[0] - 0.846_411_5).abs() < 1e-6);
        assert!((levels[1] - 2.638_967_5).abs() < 1e-6);
        let iq = fisher_quantized(&stats.mass, &stats.density_diff).unwrap();
        let expected = 2.0 * ((f0 - f1e).powi(2) / f1 + f1e * f1e / f2);
        assert!((iq - expected).abs() < 1e-13);
        assert!((iq - 1.6992).abs() < 1e-4);
    }

    #[test]
    fn half_line_mass() {
        for m in NoiseModel::reference_set() {
            for nb in 1..=5 {
                let spec = QuantizerSpec::uniform_bits(nb, 0.7).unwrap();
                let Ok(stats) = interval_stats(&m, &spec) else {
                    continue;
                };
                let total: f64 = stats.mass.iter().sum();
                assert!((total - 0.5).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn laplace_levels_are_flat() {
        for &delta in &[0.5, 1.0, 3.0] {
            let m = laplace(delta);
            for nb in 1..=5 {
                for &c in &[0.1, 0.8, 2.5] {
                    let spec = QuantizerSpec::uniform_bits(nb, c).unwrap();
                    let d = QuantizerDesign::new(&m, &spec).unwrap();
                    for &eta in d.levels() {
                        assert!((eta * delta - 1.0).abs() < 1e-9, "{eta}");
                    }
                    let ic = m.fisher_continuous().unwrap();
                    assert!((d.fisher() - ic).abs() < 1e-9 * ic);
                }
            }
        }
    }

    #[test]
    fn one_bit_gaussian() {
        let spec = QuantizerSpec::uniform(2, 1.0).unwrap();
        let d = QuantizerDesign::new(&gauss(), &spec).unwrap();
        assert!((d.levels()[0] - 2.0 / PI.sqrt()).abs() < 2e-15);
        assert!((d.fisher() - 4.0 / PI).abs() < 2e-15);
        let ratio = gauss().fisher_continuous().unwrap() / d.fisher();
        assert!((ratio - PI / 2.0).abs() < 1e-12);
        assert!((d.mean_field_slope() + 4.0 / PI).abs() < 2e-15);
    }

    #[test]
    fn degenerate_interval_reported() {
        let g = gauss();
        // overload region starts at 30: mass ~ 1e-393, below f64 range
        let spec = QuantizerSpec::uniform(4, 30.0).unwrap();
        assert!(matches!(
            interval_stats(&g, &spec),
            Err(QuantizerError::DegenerateInterval { index: 2, .. })
        ));
        assert!(optimal_levels(&[0.5, 0.0], &[0.1, 0.1]).is_err());
        assert!(fisher_quantized(&[0.5], &[0.1, 0.2]).is_err());
    }

    #[test]
    fn grid_search_one_bit_is_flat() {
        let grid = CDeltaGrid {
            min: 0.05,
            max: 3.0,
            step: 0.05,
        };
        let d = optimize_c_delta(&gauss(), 2, &grid).unwrap();
        assert!((d.spec().c_delta() - 0.05).abs() < 1e-15);
        assert!((d.fisher() - 4.0 / PI).abs() < 2e-15);
    }

    #[test]
    fn grid_search_laplace_takes_smallest() {
        let grid = CDeltaGrid::default();
        for nb in 2..=4 {
            let d = optimize_c_delta(&laplace(1.0), 1 << nb, &grid).unwrap();
            assert_eq!(d.spec().c_delta(), 0.01);
            assert!((d.fisher() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn grid_search_picks_maximum() {
        let grid = CDeltaGrid {
            min: 0.1,
            max: 3.0,
            step: 0.01,
        };
        let m = gauss();
        let best = optimize_c_delta(&m, 4, &grid).unwrap();
        for (c, v) in fisher_profile(&m, 4, &grid).unwrap() {
            assert!(v.unwrap() <= best.fisher() * (1.0 + 1e-12), "c={c}");
        }
    }

    #[test]
    fn gaussian_five_bits_within_one_db() {
        let d = optimize_c_delta(&gauss(), 32, &CDeltaGrid::default()).unwrap();
        let loss = -10.0 * (d.fisher() / 2.0).log10();
        assert!((0.0..1.0).contains(&loss), "{loss}");
    }

    #[test]
    fn bad_grid_rejected() {
        let g = gauss();
        for grid in [
            CDeltaGrid {
                min: 0.0,
                max: 1.0,
                step: 0.1,
            },
            CDeltaGrid {
                min: 1.0,
                max: 0.5,
                step: 0.1,
            },
            CDeltaGrid {
                min: 0.1,
                max: 1.0,
                step: 0.0,
            },
        ] {
            assert!(matches!(
                optimize_c_delta(&g, 4, &grid),
                Err(QuantizerError::BadGrid(_))
            ));
        }
    }

    #[test]
    fn refinement_never_loses_information() {
        // Doubling N_I at fixed c_Δ, or doubling N_I and halving c_Δ, keeps
        // every previous threshold.
        for m in NoiseModel::reference_set() {
            for &c in &[0.25, 0.5, 1.0, 2.0] {
                let mut prev = 0.0;
                for nb in 1..=5 {
                    let spec = QuantizerSpec::uniform_bits(nb, c).unwrap();
                    let Some(d) = design(&m, &spec) else { break };
                    let iq = d.fisher();
                    assert!(iq >= prev * (1.0 - 1e-12), "{m} c={c} nb={nb}");
                    prev = iq;
                }
                let mut prev = 0.0;
                for nb in 1..=5u32 {
                    let spec = QuantizerSpec::uniform_bits(nb, c / f64::from(1u32 << nb)).unwrap();
                    let Some(d) = design(&m, &spec) else { break };
                    let iq = d.fisher();
                    assert!(iq >= prev * (1.0 - 1e-12), "{m} halved c={c} nb={nb}");
                    prev = iq;
                }
            }
        }
    }

    #[test]
    fn fisher_below_continuous() {
        for m in NoiseModel::reference_set() {
            let ic = m.fisher_continuous().unwrap();
            for nb in 1..=5 {
                for &c in &[0.05, 0.3, 1.0, 3.0] {
                    let spec = QuantizerSpec::uniform_bits(nb, c).unwrap();
                    let Some(d) = design(&m, &spec) else { continue };
                    assert!(d.fisher() <= ic * (1.0 + 1e-12), "{m} nb={nb} c={c}");
                }
            }
        }
    }

    #[test]
    fn optimal_levels_identities() {
        for m in NoiseModel::reference_set() {
            for nb in 1..=5 {
                let spec = QuantizerSpec::uniform_bits(nb, 0.6).unwrap();
                let Some(d) = design(&m, &spec) else { continue };
                let iq = d.fisher();
                assert!((d.mean_field_slope() + iq).abs() <= 1e-10 * iq);
                assert!((d.second_moment() - iq).abs() <= 1e-10 * iq);
                assert!(d.levels().iter().all(|&e| e > 0.0));
            }
        }
    }

    #[test]
    fn mean_field_examples() {
        let g = gauss();
        let spec = QuantizerSpec::uniform(2, 1.0).unwrap();
        let d = QuantizerDesign::new(&g, &spec).unwrap();
        assert_eq!(d.mean_field(0.0), 0.0);
        let expected = 2.0 * d.levels()[0] * (g.cdf(0.0) - g.cdf(0.5));
        assert!((d.mean_field(0.5) - expected).abs() < 1e-14 * expected.abs());
        assert!(d.mean_field(0.5) < 0.0);
        // numerical derivative at 0 against the closed-form slope
        for m in NoiseModel::reference_set() {
            for nb in 1..=5 {
                let spec = QuantizerSpec::uniform_bits(nb, 0.8).unwrap();
                let Some(d) = design(&m, &spec) else { continue };
                let h = 1e-5;
                let numeric = (d.mean_field(h) - d.mean_field(-h)) / (2.0 * h);
                assert!((numeric - d.mean_field_slope()).abs() < 1e-5, "{m} nb={nb}");
            }
        }
    }

    #[test]
    fn mean_field_sign_pattern() {
        for m in NoiseModel::reference_set() {
            for nb in 1..=5 {
                let spec = QuantizerSpec::uniform_bits(nb, 0.8).unwrap();
                let Some(d) = design(&m, &spec) else { continue };
                for i in 1..=200 {
                    let eps = i as f64 * 0.05;
                    let (hp, hn) = (d.mean_field(eps), d.mean_field(-eps));
                    assert!(hp < 0.0 && hn > 0.0, "{m} nb={nb} eps={eps}");
                    assert!(
                        (hp + hn).abs() <= 1e-14 * hp.abs().max(1e-300),
                        "{m} nb={nb} eps={eps}"
                    );
                }
            }
        }
    }

    #[test]
    fn laplace_slope() {
        for &delta in &[1.0, 2.0] {
            let spec = QuantizerSpec::uniform(8, 0.9).unwrap();
            let d = QuantizerDesign::new(&laplace(delta), &spec).unwrap();
            assert!((d.mean_field_slope() + 1.0 / (delta * delta)).abs() < 1e-10);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn optimal_levels_minimize_normalized_variance(
            noise_index in 0usize..7,
            nb in 1u32..=5,
            c in 0.1f64..2.5,
            raw in proptest::collection::vec(0.01f64..10.0, 16),
        ) {
            let m = NoiseModel::reference_set()[noise_index];
            let spec = QuantizerSpec::uniform_bits(nb, c).unwrap();
            let d = design(&m, &spec);
            prop_assume!(d.is_some());
            let d = d.unwrap();
            let levels: Vec<f64> = raw[..spec.half()].to_vec();
            let r = level_second_moment(&levels, d.mass());
            let slope = level_slope(&levels, d.density_diff());
            prop_assert!(r / (slope * slope) >= 1.0 / d.fisher() - 1e-12);
        }

        #[test]
        fn quantizer_is_odd(r in -50.0f64..50.0, nb in 1u32..=5) {
            prop_assume!(r != 0.0);
            let spec = QuantizerSpec::uniform_bits(nb, 1.0).unwrap();
            prop_assert_eq!(spec.quantize_normalized(-r), -spec.quantize_normalized(r));
        }
    }
}
