//! Closed-form performance predictions, information bounds and mean-field
//! diagnostics for the adaptive estimators.

use serde::Serialize;
use thiserror::Error;

use crate::quantizer::{level_second_moment, level_slope, QuantizerDesign};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("{name} must be finite and > 0, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("mean-field slope is zero; asymptotic variance undefined")]
    ZeroSlope,
    #[error("level and statistic vectors differ in length")]
    LengthMismatch,
}

fn positive(name: &'static str, value: f64) -> Result<f64, AnalysisError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(AnalysisError::NotPositive { name, value })
    }
}

/// Asymptotic predictions for an optimal design with quantized information I_q.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerformancePrediction {
    pub fisher: f64,
}

impl PerformancePrediction {
    pub fn new(fisher: f64) -> Result<Self, AnalysisError> {
        Ok(Self {
            fisher: positive("fisher", fisher)?,
        })
    }

    /// σ_∞² = 1/I_q.
    pub fn sigma_inf_sq(&self) -> f64 {
        1.0 / self.fisher
    }

    /// Var[X̂_k] ≈ 1/(k·I_q) for a constant parameter.
    pub fn var_constant(&self, k: u64) -> f64 {
        1.0 / (k as f64 * self.fisher)
    }

    /// Asymptotic MSE σ_w/√I_q for a Wiener process.
    pub fn mse_wiener(&self, sigma_w: f64) -> f64 {
        sigma_w / self.fisher.sqrt()
    }

    /// MSE 3·(u/(4·I_q))^{2/3} for a Wiener process with drift u.
    pub fn mse_drift(&self, u: f64) -> f64 {
        3.0 * (u.abs() / (4.0 * self.fisher)).powf(2.0 / 3.0)
    }
}

/// Cramér–Rao bound 1/(k·I_c) with continuous measurements.
pub fn crb_continuous(k: u64, ic: f64) -> f64 {
    1.0 / (k as f64 * ic)
}

/// Bayesian information recursion for a scalar Wiener process,
/// J_k = I_c + 1/σ_w² − 1/(σ_w⁴ (J_{k−1} + 1/σ_w²)), started at J_0 = 1/σ_w².
#[derive(Debug, Clone, Copy)]
pub struct BayesianInformation {
    ic: f64,
    inv_var: f64,
    current: f64,
}

impl BayesianInformation {
    pub fn new(ic: f64, sigma_w: f64) -> Result<Self, AnalysisError> {
        let ic = positive("ic", ic)?;
        let sigma_w = positive("sigma_w", sigma_w)?;
        let inv_var = 1.0 / (sigma_w * sigma_w);
        Ok(Self {
            ic,
            inv_var,
            current: inv_var,
        })
    }

    pub fn current(&self) -> f64 {
        self.current
    }
}

impl Iterator for BayesianInformation {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        // 1/σ_w² − 1/(σ_w⁴(J + 1/σ_w²)) = J/(1 + σ_w² J), free of cancellation
        self.current = self.ic + self.current / (1.0 + self.current / self.inv_var);
        Some(self.current)
    }
}

/// Iterates the Bayesian information recursion until the extrapolated
/// distance to the fixed point is below `tol` (relative). The recursion
/// contracts slowly when σ_w is small, so the remaining error is the last
/// step scaled by r/(1 − r), with r = (1 + σ_w² J)⁻² the local contraction
/// rate. Returns (BCRB, iterations used).
pub fn bcrb_fixed_point(
    ic: f64,
    sigma_w: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, usize), AnalysisError> {
    let mut info = BayesianInformation::new(ic, sigma_w)?;
    let var = sigma_w * sigma_w;
    let mut prev = info.current();
    for n in 1..=max_iter {
        let j = info.next().expect("infinite iterator");
        let rate = (1.0 + var * j).powi(-2);
        let remaining = (j - prev).abs() * rate / (1.0 - rate);
        if remaining <= tol * j {
            return Ok((1.0 / j, n));
        }
        prev = j;
    }
    Ok((1.0 / prev, max_iter))
}

/// Asymptotic BCRB 2/(I_c + √(I_c² + 4I_c/σ_w²)).
pub fn bcrb_asymptotic(ic: f64, sigma_w: f64) -> Result<f64, AnalysisError> {
    let ic = positive("ic", ic)?;
    let sigma_w = positive("sigma_w", sigma_w)?;
    Ok(2.0 / (ic + (ic * ic + 4.0 * ic / (sigma_w * sigma_w)).sqrt()))
}

/// Small-σ_w approximation σ_w/√I_c of the asymptotic BCRB.
pub fn bcrb_asymptotic_approx(ic: f64, sigma_w: f64) -> f64 {
    sigma_w / ic.sqrt()
}

/// Drift-case MSE 3·(u/(4·I_c))^{2/3} for the continuous reference algorithm.
pub fn mse_drift_continuous(u: f64, ic: f64) -> f64 {
    3.0 * (u.abs() / (4.0 * ic)).powf(2.0 / 3.0)
}

/// L_q = −10·log₁₀(I_q/I_c) in dB.
pub fn loss_constant(iq: f64, ic: f64) -> Result<f64, AnalysisError> {
    let iq = positive("iq", iq)?;
    let ic = positive("ic", ic)?;
    Ok(-10.0 * (iq / ic).log10())
}

/// Wiener-process loss, L_q/2.
pub fn loss_wiener(iq: f64, ic: f64) -> Result<f64, AnalysisError> {
    Ok(0.5 * loss_constant(iq, ic)?)
}

/// Drift loss, 2L_q/3.
pub fn loss_drift(iq: f64, ic: f64) -> Result<f64, AnalysisError> {
    Ok(2.0 / 3.0 * loss_constant(iq, ic)?)
}

/// 10·log₁₀(measured/reference) in dB.
pub fn loss_db(measured: f64, reference: f64) -> f64 {
    10.0 * (measured / reference).log10()
}

/// σ_∞² = R/h_x̂² for arbitrary positive-index levels.
pub fn sigma_inf_general(
    levels: &[f64],
    mass: &[f64],
    density_diff: &[f64],
) -> Result<f64, AnalysisError> {
    if levels.len() != mass.len() || levels.len() != density_diff.len() {
        return Err(AnalysisError::LengthMismatch);
    }
    let slope = level_slope(levels, density_diff);
    if slope == 0.0 {
        return Err(AnalysisError::ZeroSlope);
    }
    Ok(level_second_moment(levels, mass) / (slope * slope))
}

/// γ* = −1/h_x̂ for the 1/k schedule.
pub fn optimal_gamma_constant(slope: f64) -> Result<f64, AnalysisError> {
    if !(slope < 0.0 && slope.is_finite()) {
        return Err(AnalysisError::NotPositive {
            name: "-slope",
            value: -slope,
        });
    }
    Ok(-1.0 / slope)
}

/// Drift-case MSE as a function of the gain, with R = I_q and h_x̂ = −I_q:
/// u²/(γ²I_q²) + γ/2.
pub fn mse_drift_tradeoff(gamma: f64, u: f64, iq: f64) -> f64 {
    u * u / (gamma * gamma * iq * iq) + 0.5 * gamma
}

/// Minimizer (4u²/I_q²)^{1/3} of [`mse_drift_tradeoff`].
pub fn optimal_drift_gain(u: f64, iq: f64) -> f64 {
    (4.0 * u * u / (iq * iq)).cbrt()
}

/// Mean trajectory of the constant-parameter recursion from the ODE
/// dε/dt = γ·h̃(ε) with γ = −1/h_x̂, sampled at t_k = Σ_{j≤k} 1/j.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OdeTrajectory {
    /// (k, t_k, ε(t_k)) at the requested sample steps.
    pub samples: Vec<(u64, f64, f64)>,
}

impl OdeTrajectory {
    pub fn final_error(&self) -> f64 {
        self.samples.last().map(|s| s.2).unwrap_or(0.0)
    }
}

/// Integrates the mean-field ODE with classical RK4 from ε(0) = x̂(0) − x.
///
/// One RK4 step spans t_{k−1} → t_k (length 1/k), split into sub-steps so
/// that no sub-step exceeds `max_substep` in t and the local displacement
/// stays below one tenth of the quantizer step.
pub fn ode_mean_trajectory(
    design: &QuantizerDesign,
    initial_error: f64,
    horizon: u64,
    sample_every: u64,
) -> OdeTrajectory {
    let gain = 1.0 / -design.mean_field_slope();
    let rhs = |eps: f64| gain * design.mean_field(eps);
    let scale = design.step().max(1e-12);
    let mut eps = initial_error;
    let mut t = 0.0;
    let mut samples = vec![(0, 0.0, eps)];
    let sample_every = sample_every.max(1);
    for k in 1..=horizon {
        let dt_total = 1.0 / k as f64;
        let speed = rhs(eps).abs();
        let mut n_sub = (dt_total / 0.05).ceil() as usize;
        if speed > 0.0 {
            n_sub = n_sub.max((speed * dt_total / (0.1 * scale)).ceil() as usize);
        }
        let dt = dt_total / n_sub as f64;
        for _ in 0..n_sub {
            let k1 = rhs(eps);
            let k2 = rhs(eps + 0.5 * dt * k1);
            let k3 = rhs(eps + 0.5 * dt * k2);
            let k4 = rhs(eps + dt * k3);
            eps += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        t += dt_total;
        if k % sample_every == 0 || k == horizon {
            samples.push((k, t, eps));
        }
    }
    OdeTrajectory { samples }
}

/// ε(t_end) of the mean-field ODE dε/dt = γ·h̃(ε), γ = −1/h_x̂, integrated
/// with classical RK4 in the ODE time itself. Step k of the recursion sits at
/// t_k = Σ_{j≤k} 1/j, so long horizons cost O(t_end/max_step) evaluations
/// instead of O(k).
pub fn ode_error_at(
    design: &QuantizerDesign,
    initial_error: f64,
    t_end: f64,
    max_step: f64,
) -> f64 {
    let gain = 1.0 / -design.mean_field_slope();
    let rhs = |eps: f64| gain * design.mean_field(eps);
    let n = (t_end / max_step).ceil().max(1.0) as usize;
    let dt = t_end / n as f64;
    let mut eps = initial_error;
    for _ in 0..n {
        let k1 = rhs(eps);
        let k2 = rhs(eps + 0.5 * dt * k1);
        let k3 = rhs(eps + 0.5 * dt * k2);
        let k4 = rhs(eps + dt * k3);
        eps += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    eps
}

/// t_k = Σ_{j≤k} 1/j.
pub fn harmonic_time(k: u64) -> f64 {
    if k <= 1000 {
        return (1..=k).map(|j| 1.0 / j as f64).sum();
    }
    let n = k as f64;
    n.ln() + 0.577_215_664_901_532_9 + 0.5 / n - 1.0 / (12.0 * n * n)
}

/// One row of a stability check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityRow {
    pub eps: f64,
    pub h: f64,
    /// dL/dt = 2·ε·γ·h̃(ε) for L(ε) = ε² and unit γ.
    pub lyapunov_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub rows: Vec<StabilityRow>,
    /// ε values where h̃(0) ≠ 0 or dL/dt ≥ 0 for ε ≠ 0.
    pub violations: Vec<f64>,
}

impl StabilityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks h̃(0) = 0 and 2·ε·h̃(ε) < 0 for every nonzero ε in the grid.
pub fn check_stability(design: &QuantizerDesign, eps_grid: &[f64]) -> StabilityReport {
    let mut rows = Vec::with_capacity(eps_grid.len());
    let mut violations = Vec::new();
    for &eps in eps_grid {
        let h = design.mean_field(eps);
        let lyapunov_rate = 2.0 * eps * h;
        let ok = if eps == 0.0 {
            h == 0.0
        } else {
            lyapunov_rate < 0.0
        };
        if !ok {
            violations.push(eps);
        }
        rows.push(StabilityRow {
            eps,
            h,
            lyapunov_rate,
        });
    }
    StabilityReport { rows, violations }
}

/// Symmetric grid of `2n + 1` points on [−half_width, half_width], including 0.
pub fn symmetric_grid(half_width: f64, n: usize) -> Vec<f64> {
    let n = n.max(1) as i64;
    (-n..=n).map(|i| half_width * i as f64 / n as f64).collect()
}
