//! SkewOptimal tests against generalized skew-elliptical alternatives.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::estimators::{sample_mean, tyler_scatter, Location, Sample, TylerOptions};
use crate::linalg::sym_inv_sqrt;
use crate::probdist::{pvalue, NullLaw, RadialDensity};

use super::{Method, StandardizedSample, TestResult};

/// 1/√(2π)
pub const STANDARD_NORMAL_DENSITY_AT_ZERO: f64 = 0.398_942_280_401_432_7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewOptimalOptions<'a> {
    /// Known centre; `None` runs the unspecified-location test.
    pub location: Option<&'a Location>,
    /// Radial density at which the unspecified test is optimal.
    pub f: RadialDensity,
    /// Skewing-function slope at 0; cancels from the statistic.
    pub pi_dot0: f64,
    pub tyler: TylerOptions,
}

impl Default for SkewOptimalOptions<'_> {
    fn default() -> Self {
        SkewOptimalOptions {
            location: None,
            f: RadialDensity::default(),
            pi_dot0: STANDARD_NORMAL_DENSITY_AT_ZERO,
            tyler: TylerOptions::default(),
        }
    }
}

/// Ingredients of the unspecified-location statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewOptimalComponents {
    pub k_hat: f64,
    pub delta: DVector<f64>,
    /// Γ̂ = gamma·I.
    pub gamma: f64,
    pub pi_dot0: f64,
    pub statistic: f64,
}

pub fn skew_optimal_components(x: &Sample, opts: &SkewOptimalOptions) -> Result<SkewOptimalComponents> {
    opts.f.validate()?;
    if !(opts.pi_dot0 > 0.0) {
        return Err(Error::usage("the skewing slope at 0 must be positive"));
    }
    let n = x.n();
    let d = x.dim();
    let df = d as f64;
    let location = sample_mean(x);
    let scatter = tyler_scatter(x, &location, opts.tyler)?;
    let std = StandardizedSample::new(x, &location, &sym_inv_sqrt(&scatter)?)?;
    let directions = std.directions()?;

    let phis: Vec<(f64, f64)> = std
        .norms()
        .iter()
        .map(|&r| opts.f.phi_unchecked(r, d))
        .collect();
    let k_hat = std
        .norms()
        .iter()
        .zip(&phis)
        .map(|(&r, &(p, dp))| dp + (df - 1.0) / r * p)
        .sum::<f64>()
        / n as f64;
    if !k_hat.is_finite() || k_hat == 0.0 {
        return Err(Error::numeric(format!("radial information estimate is degenerate ({k_hat})")));
    }

    let mut sum = DVector::zeros(d);
    let mut sum_sq = 0.0;
    for (i, (&r, &(p, _))) in std.norms().iter().zip(&phis).enumerate() {
        let a = r - df / k_hat * p;
        sum += directions.row(i).transpose() * a;
        sum_sq += a * a;
    }
    let delta = sum * (2.0 * opts.pi_dot0 / (n as f64).sqrt());
    let gamma = 4.0 * opts.pi_dot0 * opts.pi_dot0 / (n as f64 * df) * sum_sq;
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::numeric(format!("SkewOptimal variance factor is not positive ({gamma:e})")));
    }
    let statistic = delta.norm_squared() / gamma;
    Ok(SkewOptimalComponents {
        k_hat,
        delta,
        gamma,
        pi_dot0: opts.pi_dot0,
        statistic,
    })
}

/// n(X̄ − θ)′V̂⁻¹(X̄ − θ) with V̂ Tyler's scatter about θ.
fn specified_statistic(x: &Sample, location: &Location, tyler: TylerOptions) -> Result<f64> {
    location.check_dim(x.dim())?;
    let scatter = tyler_scatter(x, location, tyler)?;
    let diff = sample_mean(x).vector() - location.vector();
    let root = sym_inv_sqrt(&scatter)?;
    Ok(x.n() as f64 * (root * diff).norm_squared())
}

pub fn skew_optimal_test(x: &Sample, opts: &SkewOptimalOptions) -> Result<TestResult> {
    let statistic = match opts.location {
        Some(l) => specified_statistic(x, l, opts.tyler)?,
        None => skew_optimal_components(x, opts)?.statistic,
    };
    let law = NullLaw::chi2(x.dim() as f64)?;
    let p = pvalue(&law, statistic);
    let mut result = TestResult::new(Method::SkewOptimal, statistic, p, law.descriptor())?;
    match opts.location {
        Some(l) => {
            result = result.with(
                "location",
                super::ParamValue::Reals(l.vector().iter().copied().collect()),
            );
        }
        None => {
            result = result.with("f", opts.f.name());
            if let Some(v) = opts.f.param() {
                result = result.with("param", v);
            }
        }
    }
    Ok(result)
}
