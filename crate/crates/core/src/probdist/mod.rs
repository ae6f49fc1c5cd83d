//! Null distributions, p-values and the random samplers used by the
//! simulation harness.

mod radial;
mod sampling;

use std::sync::Arc;

use serde::Serialize;
use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::error::{Error, Result};

pub use radial::{radial_phi, RadialDensity};
pub use sampling::{
    sample_mvn, sample_mvt, sample_skewed, sample_uniform_sphere, standard_normal_rows,
    uniform_sphere_rows,
};

/// P(χ²_df ≤ x).
pub fn chi2_cdf(x: f64, df: f64) -> f64 {
    assert!(df > 0.0, "degrees of freedom must be positive");
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    gamma_lr(df / 2.0, x / 2.0)
}

/// P(χ²_df > x), computed directly for accuracy in the upper tail.
pub fn chi2_sf(x: f64, df: f64) -> f64 {
    assert!(df > 0.0, "degrees of freedom must be positive");
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    gamma_ur(df / 2.0, x / 2.0)
}

pub fn chi2_pdf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let k = df / 2.0;
    ((k - 1.0) * x.ln() - x / 2.0 - k * std::f64::consts::LN_2 - ln_gamma(k)).exp()
}

/// Inverse of [`chi2_cdf`], solved by safeguarded Newton iteration.
pub fn chi2_quantile(p: f64, df: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::usage(format!("probability must lie in (0, 1), got {p}")));
    }
    if !(df > 0.0) {
        return Err(Error::usage(format!("degrees of freedom must be positive, got {df}")));
    }
    // work with the smaller tail so that the target is not rounded away
    let upper = p > 0.5;
    let target = if upper { 1.0 - p } else { p };
    let f = |x: f64| {
        if upper {
            target - chi2_sf(x, df)
        } else {
            chi2_cdf(x, df) - target
        }
    };

    let mut lo = 0.0;
    let mut hi = df.max(1.0);
    while f(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    // Wilson–Hilferty starting point
    let z = inverse_normal_guess(p);
    let h = 2.0 / (9.0 * df);
    let mut x = (df * (1.0 - h + z * h.sqrt()).powi(3)).clamp(lo, hi);
    if !(x > lo && x < hi) {
        x = 0.5 * (lo + hi);
    }
    for _ in 0..300 {
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let dens = chi2_pdf(x, df);
        let mut next = if dens > 0.0 { x - fx / dens } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * x.max(1e-300) || hi - lo <= 1e-15 * hi {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// Rough standard normal quantile (Abramowitz–Stegun 26.2.23), only used to
/// seed the chi-squared inversion.
fn inverse_normal_guess(p: f64) -> f64 {
    let q = if p < 0.5 { p } else { 1.0 - p };
    let t = (-2.0 * q.ln()).sqrt();
    let z = t - (2.515517 + 0.802853 * t + 0.010328 * t * t)
        / (1.0 + 1.432788 * t + 0.189269 * t * t + 0.001308 * t * t * t);
    if p < 0.5 {
        -z
    } else {
        z
    }
}

/// A non-empty, ascending sample of simulated statistic values.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSample(Arc<Vec<f64>>);

impl ReferenceSample {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::usage("reference sample is empty"));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::numeric("reference sample contains NaN"));
        }
        values.sort_by(f64::total_cmp);
        Ok(ReferenceSample(Arc::new(values)))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// #{reference ≥ statistic}
    pub fn count_at_least(&self, statistic: f64) -> usize {
        self.0.len() - self.0.partition_point(|&v| v < statistic)
    }
}

/// Null distribution of a test statistic.
#[derive(Debug, Clone, PartialEq)]
pub enum NullLaw {
    Chi2 { df: f64 },
    /// Law of scale·χ²_df.
    ScaledChi2 { scale: f64, df: f64 },
    MonteCarlo(ReferenceSample),
    Bootstrap(ReferenceSample),
}

impl NullLaw {
    pub fn chi2(df: f64) -> Result<Self> {
        if !(df > 0.0) {
            return Err(Error::usage(format!("degrees of freedom must be positive, got {df}")));
        }
        Ok(NullLaw::Chi2 { df })
    }

    pub fn scaled_chi2(scale: f64, df: f64) -> Result<Self> {
        if !(scale > 0.0 && scale <= 1.0) {
            return Err(Error::usage(format!("scale must lie in (0, 1], got {scale}")));
        }
        if !(df > 0.0) {
            return Err(Error::usage(format!("degrees of freedom must be positive, got {df}")));
        }
        Ok(NullLaw::ScaledChi2 { scale, df })
    }

    pub fn descriptor(&self) -> NullLawDescriptor {
        match self {
            NullLaw::Chi2 { df } => NullLawDescriptor::Chi2 { df: *df },
            NullLaw::ScaledChi2 { scale, df } => NullLawDescriptor::ScaledChi2 {
                scale: *scale,
                df: *df,
            },
            NullLaw::MonteCarlo(r) => NullLawDescriptor::MonteCarlo { replicates: r.len() },
            NullLaw::Bootstrap(r) => NullLawDescriptor::Bootstrap { replicates: r.len() },
        }
    }
}

/// Serializable summary of a [`NullLaw`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NullLawDescriptor {
    Chi2 { df: f64 },
    ScaledChi2 { scale: f64, df: f64 },
    MonteCarlo { replicates: usize },
    Bootstrap { replicates: usize },
}

/// Upper-tail p-value of `statistic` under `law`. Resampled laws use the
/// add-one rule (1 + #{ref ≥ stat}) / (1 + #ref), so the result is never 0.
pub fn pvalue(law: &NullLaw, statistic: f64) -> f64 {
    match law {
        NullLaw::Chi2 { df } => chi2_sf(statistic, *df),
        NullLaw::ScaledChi2 { scale, df } => chi2_sf(statistic / scale, *df),
        NullLaw::MonteCarlo(r) | NullLaw::Bootstrap(r) => {
            (1 + r.count_at_least(statistic)) as f64 / (1 + r.len()) as f64
        }
    }
}
