use serde::Serialize;

use crate::error::{Error, Result};

/// Radial density f of an elliptical law, used by the SkewOptimal test.
///
/// Each family provides φ_f = −f′/f and its derivative for x > 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum RadialDensity {
    /// f(x) = (1 + x²/ν)^{−(ν+d)/2}, ν > 2.
    StudentT { nu: f64 },
    /// f(x) = exp(−x²) / (1 + exp(−x²))².
    Logistic,
    /// f(x) = exp(−x^{2β}/2), β > 0, β ≠ 1.
    PowerExp { beta: f64 },
}

impl Default for RadialDensity {
    fn default() -> Self {
        RadialDensity::StudentT { nu: 4.0 }
    }
}

impl RadialDensity {
    pub fn student_t(nu: f64) -> Result<Self> {
        if !(nu > 2.0) || !nu.is_finite() {
            return Err(Error::usage(format!(
                "t degrees of freedom must be greater than 2, got {nu}"
            )));
        }
        Ok(RadialDensity::StudentT { nu })
    }

    pub fn power_exp(beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::usage(format!("power-exponential beta must be positive, got {beta}")));
        }
        if beta == 1.0 {
            return Err(Error::usage(
                "power-exponential beta must differ from 1 (beta = 1 is the Gaussian)",
            ));
        }
        Ok(RadialDensity::PowerExp { beta })
    }

    /// Re-validates parameters, for values built directly from the enum.
    pub fn validate(&self) -> Result<()> {
        match *self {
            RadialDensity::StudentT { nu } => RadialDensity::student_t(nu).map(|_| ()),
            RadialDensity::Logistic => Ok(()),
            RadialDensity::PowerExp { beta } => RadialDensity::power_exp(beta).map(|_| ()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RadialDensity::StudentT { .. } => "t",
            RadialDensity::Logistic => "logistic",
            RadialDensity::PowerExp { .. } => "powerExp",
        }
    }

    /// The family parameter (ν or β), if any.
    pub fn param(&self) -> Option<f64> {
        match *self {
            RadialDensity::StudentT { nu } => Some(nu),
            RadialDensity::Logistic => None,
            RadialDensity::PowerExp { beta } => Some(beta),
        }
    }

    /// log f(x) up to an additive constant; `d` only matters for the t family.
    pub fn log_density(&self, x: f64, d: usize) -> f64 {
        match *self {
            RadialDensity::StudentT { nu } => -(nu + d as f64) / 2.0 * (x * x / nu).ln_1p(),
            RadialDensity::Logistic => {
                // −x² − 2·ln(1 + e^{−x²}) = −2·ln cosh(x²/2) − 2·ln 2
                let s = (x * x / 4.0).sinh();
                -2.0 * (2.0 * s * s).ln_1p()
            }
            RadialDensity::PowerExp { beta } => -0.5 * x.powf(2.0 * beta),
        }
    }

    /// (φ_f(x), φ_f′(x)) for x > 0 in dimension `d`.
    pub fn phi(&self, x: f64, d: usize) -> Result<(f64, f64)> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::usage(format!("radial argument must be positive, got {x}")));
        }
        Ok(self.phi_unchecked(x, d))
    }

    pub(crate) fn phi_unchecked(&self, x: f64, d: usize) -> (f64, f64) {
        match *self {
            RadialDensity::StudentT { nu } => {
                let a = nu + d as f64;
                let den = nu + x * x;
                (a * x / den, a * (nu - x * x) / (den * den))
            }
            RadialDensity::Logistic => {
                let t = (x * x / 2.0).tanh();
                (2.0 * x * t, 2.0 * t + 2.0 * x * x * (1.0 - t * t))
            }
            RadialDensity::PowerExp { beta } => (
                beta * x.powf(2.0 * beta - 1.0),
                beta * (2.0 * beta - 1.0) * x.powf(2.0 * beta - 2.0),
            ),
        }
    }
}

/// (φ_f(x), φ_f′(x)) in closed form; x must be positive.
pub fn radial_phi(f: &RadialDensity, x: f64, d: usize) -> Result<(f64, f64)> {
    f.phi(x, d)
}
