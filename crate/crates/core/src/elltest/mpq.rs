//! Manzotti–Pérez–Quiroz test: degree 3 and 4 harmonics of the directions of
//! all observations outside the ε sample quantile of the norms.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::estimators::{sample_cov, sample_mean, Denominator, Sample};
use crate::harmonics::{build_basis, dim_h};
use crate::linalg::sym_inv_sqrt;
use crate::probdist::{pvalue, NullLaw};

use super::{Method, StandardizedSample, TestResult};

/// ν₃₄ = dim H₃ + dim H₄.
pub fn mpq_degrees_of_freedom(d: usize) -> usize {
    dim_h(d, 3) + dim_h(d, 4)
}

/// Sample quantile by linear interpolation between order statistics
/// (position (n−1)p), as R's default.
fn sample_quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::usage(format!("epsilon must lie in [0, 1), got {epsilon}")));
    }
    Ok(())
}

pub fn mpq_statistic(x: &Sample, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    let n = x.n();
    let d = x.dim();
    let location = sample_mean(x);
    let scatter = sample_cov(x, Denominator::NMinusOne)?;
    let std = StandardizedSample::new(x, &location, &sym_inv_sqrt(&scatter)?)?;
    let directions = std.directions()?;

    let mut sorted = std.norms().to_vec();
    sorted.sort_by(f64::total_cmp);
    let rho = sample_quantile(&sorted, epsilon);

    // Σᵢ h(Uᵢ)·1{‖Yᵢ‖ > ρ} is linear in h, so sum monomials once and map
    // through the coefficient matrix.
    let basis = build_basis(d, 4)?;
    let mut mono_sum = DVector::zeros(basis.monomial_count());
    let mut buf = vec![0.0; basis.monomial_count()];
    let mut u = vec![0.0; d];
    for (i, &r) in std.norms().iter().enumerate() {
        if r > rho {
            for (j, uj) in u.iter_mut().enumerate() {
                *uj = directions[(i, j)];
            }
            basis.monomial_values(&u, &mut buf);
            for (acc, v) in mono_sum.iter_mut().zip(&buf) {
                *acc += v;
            }
        }
    }
    let start = basis.degree_range(3).start;
    let end = basis.degree_range(4).end;
    let coef = basis.coefficients().rows(start, end - start);
    let sums = coef * mono_sum;
    Ok(sums.norm_squared() / n as f64)
}

pub fn mpq_test(x: &Sample, epsilon: f64) -> Result<TestResult> {
    let statistic = mpq_statistic(x, epsilon)?;
    let df = mpq_degrees_of_freedom(x.dim());
    let law = NullLaw::scaled_chi2(1.0 - epsilon, df as f64)?;
    let p = pvalue(&law, statistic);
    Ok(TestResult::new(Method::Mpq, statistic, p, law.descriptor())?.with("epsilon", epsilon))
}
