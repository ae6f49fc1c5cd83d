//! Pseudo-Gaussian tests against Fechner-type asymmetry, for a specified or
//! an estimated location.

use nalgebra::DVector;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::estimators::{sample_mean, tyler_scatter, Location, Sample, TylerOptions};
use crate::linalg::{sym_inv_sqrt, Matrix};
use crate::probdist::{pvalue, NullLaw};

use super::{Method, StandardizedSample, TestResult};

/// c_d = 4Γ(d/2) / ((d²−1)√π Γ((d−1)/2)).
pub fn c_d(d: usize) -> f64 {
    let df = d as f64;
    let log_ratio = ln_gamma(df / 2.0) - ln_gamma((df - 1.0) / 2.0);
    4.0 * log_ratio.exp() / ((df * df - 1.0) * std::f64::consts::PI.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PseudoGaussianOptions<'a> {
    /// Known centre; `None` runs the unspecified-location test.
    pub location: Option<&'a Location>,
    /// Evaluate the specified-location statistic by its O(n²) double sum.
    pub naive: bool,
    pub tyler: TylerOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoGaussianComponents {
    /// m₁..m₄, the mean k-th powers of the standardized norms.
    pub m: [f64; 4],
    /// Rows Sᵁᵢ: squared direction components carrying their signs.
    pub s_u: Matrix,
    pub c_d: f64,
    pub delta: DVector<f64>,
    /// Γ = gamma·I.
    pub gamma: f64,
    pub statistic: f64,
}

fn signed_squares(directions: &Matrix) -> Matrix {
    directions.map(|u| u * u.abs())
}

fn standardize(x: &Sample, location: &Location, tyler: TylerOptions) -> Result<StandardizedSample> {
    let scatter = tyler_scatter(x, location, tyler)?;
    StandardizedSample::new(x, location, &sym_inv_sqrt(&scatter)?)
}

fn moments(norms: &[f64]) -> [f64; 4] {
    let n = norms.len() as f64;
    let mut m = [0.0; 4];
    for &r in norms {
        let mut p = 1.0;
        for mk in m.iter_mut() {
            p *= r;
            *mk += p;
        }
    }
    m.map(|v| v / n)
}

pub fn pseudo_gaussian_components(
    x: &Sample,
    opts: &PseudoGaussianOptions,
) -> Result<PseudoGaussianComponents> {
    let n = x.n();
    let d = x.dim();
    let df = d as f64;
    let root_n = (n as f64).sqrt();
    let estimated;
    let location = match opts.location {
        Some(l) => l,
        None => {
            estimated = sample_mean(x);
            &estimated
        }
    };
    let std = standardize(x, location, opts.tyler)?;
    let directions = std.directions()?;
    let s_u = signed_squares(&directions);
    let m = moments(std.norms());
    let cd = c_d(d);

    let mut delta = DVector::zeros(d);
    let gamma = match opts.location {
        Some(_) => {
            for (i, &r) in std.norms().iter().enumerate() {
                delta += s_u.row(i).transpose() * (r * r);
            }
            3.0 * m[3] / (df * (df + 2.0))
        }
        None => {
            let lead = cd * (df + 1.0) * m[0];
            for (i, &r) in std.norms().iter().enumerate() {
                delta += (directions.row(i) * lead - s_u.row(i) * r).transpose() * r;
            }
            3.0 * m[3] / (df * (df + 2.0)) - 2.0 * cd * cd * (df + 1.0) * m[0] * m[2]
                + cd * cd * (df + 1.0).powi(2) / df * m[0] * m[0] * m[1]
        }
    };
    delta /= root_n;
    if !(gamma > 0.0) {
        return Err(Error::numeric(format!(
            "pseudo-Gaussian variance factor is not positive ({gamma:e})"
        )));
    }
    let statistic = delta.norm_squared() / gamma;
    Ok(PseudoGaussianComponents {
        m,
        s_u,
        c_d: cd,
        delta,
        gamma,
        statistic,
    })
}

/// The specified-location statistic as the printed double sum over pairs.
pub fn pseudo_gaussian_specified_naive(
    x: &Sample,
    location: &Location,
    tyler: TylerOptions,
) -> Result<f64> {
    let n = x.n();
    let df = x.dim() as f64;
    let std = standardize(x, location, tyler)?;
    let s_u = signed_squares(&std.directions()?);
    let m4 = moments(std.norms())[3];
    let r = std.norms();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += r[i] * r[i] * r[j] * r[j] * s_u.row(i).dot(&s_u.row(j));
        }
    }
    Ok(df * (df + 2.0) / (3.0 * n as f64 * m4) * acc)
}

pub fn pseudo_gaussian_test(x: &Sample, opts: &PseudoGaussianOptions) -> Result<TestResult> {
    let statistic = match (opts.location, opts.naive) {
        (Some(l), true) => pseudo_gaussian_specified_naive(x, l, opts.tyler)?,
        _ => pseudo_gaussian_components(x, opts)?.statistic,
    };
    let law = NullLaw::chi2(x.dim() as f64)?;
    let p = pvalue(&law, statistic);
    let mut result = TestResult::new(Method::PseudoGaussian, statistic, p, law.descriptor())?;
    if let Some(l) = opts.location {
        result = result.with("location", super::ParamValue::Reals(l.vector().iter().copied().collect()));
    }
    Ok(result)
}
