//! Gamma-family special functions used by the noise models.
//!
//! Conventions:
//! - [`gamma_lower`] returns the raw lower incomplete gamma γ(a, x) = ∫₀ˣ t^{a−1} e^{−t} dt.
//! - [`gamma_p`] / [`gamma_q`] are the regularized forms P = γ/Γ and Q = 1 − P.
//! - [`beta_regularized`] is the regularized incomplete beta I_x(a, b).
//!
//! Small arguments use power series, large arguments use a modified Lentz
//! continued fraction. The switch happens at x = a + 1 for the gamma family
//! and at x = (a + 1)/(a + b + 2) for the beta function.

use thiserror::Error;

const MAX_ITER: usize = 500;
const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialError {
    #[error("{function}: argument {name} = {value} outside its domain")]
    Domain {
        function: &'static str,
        name: &'static str,
        value: f64,
    },
    #[error("{function}: no convergence after {MAX_ITER} iterations")]
    NoConvergence { function: &'static str },
}

fn domain(function: &'static str, name: &'static str, value: f64) -> SpecialError {
    SpecialError::Domain {
        function,
        name,
        value,
    }
}

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
// published coefficients, kept digit for digit
#[allow(clippy::excessive_precision)]
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 0.5 {
        // Reflection keeps the Lanczos sum in its accurate range.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Γ(x) for x > 0.
pub fn gamma(x: f64) -> f64 {
    ln_gamma(x).exp()
}

/// Regularized lower incomplete gamma P(a, x).
pub fn gamma_p(a: f64, x: f64) -> Result<f64, SpecialError> {
    gamma_pq(a, x).map(|(p, _)| p)
}

/// Regularized upper incomplete gamma Q(a, x) = 1 − P(a, x), computed
/// without cancellation for large x.
pub fn gamma_q(a: f64, x: f64) -> Result<f64, SpecialError> {
    gamma_pq(a, x).map(|(_, q)| q)
}

/// Raw (non-regularized) lower incomplete gamma γ(a, x).
///
/// `x = +∞` is accepted and returns Γ(a).
pub fn gamma_lower(a: f64, x: f64) -> Result<f64, SpecialError> {
    Ok(gamma_p(a, x)? * gamma(a))
}

fn gamma_pq(a: f64, x: f64) -> Result<(f64, f64), SpecialError> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(domain("gamma_inc", "a", a));
    }
    if !(x >= 0.0) {
        return Err(domain("gamma_inc", "x", x));
    }
    if x == 0.0 {
        return Ok((0.0, 1.0));
    }
    if x == f64::INFINITY {
        return Ok((1.0, 0.0));
    }
    let log_prefactor = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        let p = gamma_series(a, x)? * log_prefactor.exp();
        Ok((p, 1.0 - p))
    } else {
        let q = gamma_cont_frac(a, x)? * log_prefactor.exp();
        Ok((1.0 - q, q))
    }
}

// Σ xⁿ / (a (a+1) … (a+n)), to be multiplied by x^a e^{−x} / Γ(a).
fn gamma_series(a: f64, x: f64) -> Result<f64, SpecialError> {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            return Ok(sum);
        }
    }
    Err(SpecialError::NoConvergence {
        function: "gamma_series",
    })
}

// Continued fraction for Γ(a, x) e^{x} x^{−a}, modified Lentz.
fn gamma_cont_frac(a: f64, x: f64) -> Result<f64, SpecialError> {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            return Ok(h);
        }
    }
    Err(SpecialError::NoConvergence {
        function: "gamma_cont_frac",
    })
}

/// Regularized incomplete beta I_x(a, b) for x in [0, 1], a, b > 0.
pub fn beta_regularized(x: f64, a: f64, b: f64) -> Result<f64, SpecialError> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(domain("beta_regularized", "a", a));
    }
    if !(b > 0.0) || !b.is_finite() {
        return Err(domain("beta_regularized", "b", b));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(domain("beta_regularized", "x", x));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let log_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = log_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(front * beta_cont_frac(x, a, b)? / a)
    } else {
        Ok(1.0 - front * beta_cont_frac(1.0 - x, b, a)? / b)
    }
}

fn beta_cont_frac(x: f64, a: f64, b: f64) -> Result<f64, SpecialError> {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        // Even step.
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        // Odd step.
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            return Ok(h);
        }
    }
    Err(SpecialError::NoConvergence {
        function: "beta_cont_frac",
    })
}
