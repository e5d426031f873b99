//! Additive observation noise models.
//!
//! Two symmetric, unimodal families parametrized by a shape `beta` and a
//! scale `delta`:
//!
//! | family | normalized density (δ = 1) |
//! |---|---|
//! | generalized Gaussian | β / (2Γ(1/β)) · exp(−\|x\|^β) |
//! | Student's-t | Γ((β+1)/2) / (√(βπ) Γ(β/2)) · (1 + x²/β)^{−(β+1)/2} |
//!
//! Scaled versions satisfy `F(x; δ) = F(x/δ; 1)` and `f(x; δ) = f(x/δ; 1)/δ`.

use std::fmt;

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::special::{beta_regularized, gamma_q, ln_gamma};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NoiseError {
    #[error("invalid noise parameter {name} = {value} (must be finite and > 0)")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error(
        "Fisher information is not finite for generalized Gaussian noise with beta = {beta} < 1"
    )]
    InfiniteFisher { beta: f64 },
    #[error("score f'/f is undefined at 0 for generalized Gaussian noise with beta = {beta} <= 1")]
    ScoreUndefined { beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NoiseFamily {
    #[serde(rename = "gg", alias = "generalized-gaussian")]
    GeneralizedGaussian,
    #[serde(rename = "st", alias = "student-t")]
    StudentT,
}

impl NoiseFamily {
    pub fn tag(self) -> &'static str {
        match self {
            NoiseFamily::GeneralizedGaussian => "gg",
            NoiseFamily::StudentT => "st",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag.trim().to_ascii_lowercase().as_str() {
            "gg" | "generalized-gaussian" => Some(NoiseFamily::GeneralizedGaussian),
            "st" | "student-t" => Some(NoiseFamily::StudentT),
            _ => None,
        }
    }
}

impl fmt::Display for NoiseFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// A generalized Gaussian or Student's-t noise distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    family: NoiseFamily,
    beta: f64,
    delta: f64,
    // log of the normalized density at 0
    ln_norm: f64,
}

impl NoiseModel {
    pub fn new(family: NoiseFamily, beta: f64, delta: f64) -> Result<Self, NoiseError> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(NoiseError::InvalidParameter {
                name: "beta",
                value: beta,
            });
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(NoiseError::InvalidParameter {
                name: "delta",
                value: delta,
            });
        }
        let ln_norm = match family {
            NoiseFamily::GeneralizedGaussian => (beta / 2.0).ln() - ln_gamma(1.0 / beta),
            NoiseFamily::StudentT => {
                ln_gamma(0.5 * (beta + 1.0))
                    - ln_gamma(0.5 * beta)
                    - 0.5 * (beta * std::f64::consts::PI).ln()
            }
        };
        Ok(Self {
            family,
            beta,
            delta,
            ln_norm,
        })
    }

    pub fn generalized_gaussian(beta: f64, delta: f64) -> Result<Self, NoiseError> {
        Self::new(NoiseFamily::GeneralizedGaussian, beta, delta)
    }

    pub fn student_t(beta: f64, delta: f64) -> Result<Self, NoiseError> {
        Self::new(NoiseFamily::StudentT, beta, delta)
    }

    /// The seven unit-scale noises of the loss study: GG β ∈ {1.5, 2, 2.5, 3}
    /// and ST β ∈ {1, 2, 3}.
    pub fn reference_set() -> Vec<NoiseModel> {
        let gg = [1.5, 2.0, 2.5, 3.0]
            .into_iter()
            .map(|b| Self::generalized_gaussian(b, 1.0).unwrap());
        let st = [1.0, 2.0, 3.0]
            .into_iter()
            .map(|b| Self::student_t(b, 1.0).unwrap());
        gg.chain(st).collect()
    }

    pub fn family(&self) -> NoiseFamily {
        self.family
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Same shape, different scale.
    pub fn with_delta(&self, delta: f64) -> Result<Self, NoiseError> {
        Self::new(self.family, self.beta, delta)
    }

    fn pdf_normalized(&self, z: f64) -> f64 {
        let z = z.abs();
        if z.is_infinite() {
            return 0.0;
        }
        match self.family {
            NoiseFamily::GeneralizedGaussian => (self.ln_norm - z.powf(self.beta)).exp(),
            NoiseFamily::StudentT => {
                let b = self.beta;
                (self.ln_norm - 0.5 * (b + 1.0) * (z * z / b).ln_1p()).exp()
            }
        }
    }

    // P(V > z) for z >= 0, normalized scale.
    fn upper_tail_normalized(&self, z: f64) -> f64 {
        debug_assert!(z >= 0.0);
        if z == 0.0 {
            return 0.5;
        }
        if z.is_infinite() {
            return 0.0;
        }
        let b = self.beta;
        match self.family {
            NoiseFamily::GeneralizedGaussian => {
                0.5 * gamma_q(1.0 / b, z.powf(b)).expect("valid incomplete gamma arguments")
            }
            NoiseFamily::StudentT => {
                let x = b / (z * z + b);
                0.5 * beta_regularized(x, 0.5 * b, 0.5).expect("valid incomplete beta arguments")
            }
        }
    }

    /// Probability density f(x).
    pub fn pdf(&self, x: f64) -> f64 {
        self.pdf_normalized(x / self.delta) / self.delta
    }

    /// Cumulative distribution F(x).
    pub fn cdf(&self, x: f64) -> f64 {
        let z = x / self.delta;
        if z.is_nan() {
            return f64::NAN;
        }
        if z >= 0.0 {
            1.0 - self.upper_tail_normalized(z)
        } else {
            self.upper_tail_normalized(-z)
        }
    }

    /// Survival function 1 − F(x), accurate in the upper tail.
    pub fn sf(&self, x: f64) -> f64 {
        self.cdf(-x)
    }

    /// P(lo ≤ V < hi), evaluated on whichever tail avoids cancellation.
    pub fn interval_mass(&self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        if lo >= 0.0 {
            self.sf(lo) - self.sf(hi)
        } else if hi <= 0.0 {
            self.cdf(hi) - self.cdf(lo)
        } else {
            1.0 - self.cdf(lo) - self.sf(hi)
        }
    }

    /// Location score f'(x)/f(x).
    ///
    /// For GG with β ≤ 1 the density has a cusp at 0 and the score is
    /// undefined there; this is reported as an error for every `x`.
    pub fn score(&self, x: f64) -> Result<f64, NoiseError> {
        let z = x / self.delta;
        let b = self.beta;
        match self.family {
            NoiseFamily::GeneralizedGaussian => {
                if b <= 1.0 {
                    return Err(NoiseError::ScoreUndefined { beta: b });
                }
                if z == 0.0 {
                    return Ok(0.0);
                }
                Ok(-b * z.abs().powf(b - 1.0) * z.signum() / self.delta)
            }
            NoiseFamily::StudentT => Ok(-(b + 1.0) * z / (b + z * z) / self.delta),
        }
    }

    /// Fisher information I_c = ∫ (f'/f)² f for the location parameter.
    ///
    /// GG with β = 1 (Laplace) is defined as 1/δ² even though the density
    /// is not differentiable at 0.
    pub fn fisher_continuous(&self) -> Result<f64, NoiseError> {
        let b = self.beta;
        let normalized = match self.family {
            NoiseFamily::GeneralizedGaussian => {
                if b < 1.0 {
                    return Err(NoiseError::InfiniteFisher { beta: b });
                }
                if b == 1.0 {
                    1.0
                } else {
                    b * (b - 1.0) * (ln_gamma(1.0 - 1.0 / b) - ln_gamma(1.0 / b)).exp()
                }
            }
            NoiseFamily::StudentT => (b + 1.0) / (b + 3.0),
        };
        Ok(normalized / (self.delta * self.delta))
    }

    /// Smallest `L` (up to a factor 2) with P(|V| > L) below `mass`.
    pub fn tail_half_width(&self, mass: f64) -> f64 {
        let mut width = self.delta;
        while 2.0 * self.sf(width) > mass {
            width *= 2.0;
        }
        width
    }

    pub fn sampler(&self) -> NoiseSampler {
        let b = self.beta;
        let kind = match self.family {
            NoiseFamily::GeneralizedGaussian => {
                SamplerKind::GeneralizedGaussian(Gamma::new(1.0 / b, 1.0).expect("shape > 0"))
            }
            NoiseFamily::StudentT => {
                SamplerKind::StudentT(ChiSquared::new(b).expect("degrees of freedom > 0"))
            }
        };
        NoiseSampler {
            kind,
            beta: b,
            delta: self.delta,
        }
    }

    /// Draws one noise value. Prefer [`NoiseModel::sampler`] in hot loops.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sampler().sample(rng)
    }
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}(beta={}, delta={})",
            self.family, self.beta, self.delta
        )
    }
}

#[derive(Debug, Clone, Copy)]
enum SamplerKind {
    GeneralizedGaussian(Gamma<f64>),
    StudentT(ChiSquared<f64>),
}

/// Pre-built sampler for a [`NoiseModel`].
///
/// GG: `|V| = δ·G^{1/β}` with `G ~ Gamma(1/β, 1)` and a fair random sign.
/// ST: `V = δ·Z / √(C/β)` with `Z ~ N(0, 1)` and `C ~ χ²(β)`.
#[derive(Debug, Clone, Copy)]
pub struct NoiseSampler {
    kind: SamplerKind,
    beta: f64,
    delta: f64,
}

impl Distribution<f64> for NoiseSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            SamplerKind::GeneralizedGaussian(gamma) => {
                let g: f64 = gamma.sample(rng);
                let magnitude = self.delta * g.powf(1.0 / self.beta);
                if rng.gen::<bool>() {
                    magnitude
                } else {
                    -magnitude
                }
            }
            SamplerKind::StudentT(chi) => {
                let z: f64 = StandardNormal.sample(rng);
                let c: f64 = chi.sample(rng);
                self.delta * z / (c / self.beta).sqrt()
            }
        }
    }
}
