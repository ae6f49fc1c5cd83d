//! Schott's Wald-type test comparing standardized fourth moments with their
//! form under ellipticity.

use crate::error::{Error, Result};
use crate::estimators::{sample_cov, sample_mean, Denominator, Sample};
use crate::linalg::{sym_inv_sqrt, Matrix};
use crate::probdist::{pvalue, NullLaw};

use super::{Method, StandardizedSample, TestResult};

/// ν_d = d² + d(d−1)(d²+7d−6)/24 − 1.
pub fn schott_degrees_of_freedom(d: usize) -> usize {
    d * d + d * (d - 1) * (d * d + 7 * d - 6) / 24 - 1
}

/// Intermediate quantities of the Schott statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct SchottMoments {
    /// 1 + κ̂
    pub kappa1: f64,
    /// 1 + η̂
    pub eta1: f64,
    /// 1 + ω̂
    pub omega1: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub a: f64,
    /// Standardized fourth-moment matrix M̂₄*, d²×d².
    pub m4_star: Matrix,
    /// tr(M̂₄*²)
    pub trace_sq: f64,
    /// vec(I)′M̂₄*²vec(I)
    pub identity_form: f64,
    pub statistic: f64,
}

const CHUNK_ROWS: usize = 2048;

/// Index pairs (j, k), j ≤ k, with their multiplicity in vec(yyᵀ).
fn unique_pairs(d: usize) -> Vec<(usize, usize, f64)> {
    let mut pairs = Vec::with_capacity(d * (d + 1) / 2);
    for j in 0..d {
        for k in j..d {
            pairs.push((j, k, if j == k { 1.0 } else { 2.0 }));
        }
    }
    pairs
}

pub fn schott_moments(x: &Sample) -> Result<SchottMoments> {
    let n = x.n();
    let d = x.dim();
    let location = sample_mean(x);
    let scatter = sample_cov(x, Denominator::NMinusOne)?;
    let std = StandardizedSample::new(x, &location, &sym_inv_sqrt(&scatter)?)?;
    let y = std.residuals();

    let nf = n as f64;
    let df = d as f64;
    let (mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0);
    for r in std.norms() {
        let q = r * r;
        s2 += q * q;
        s3 += q * q * q;
        s4 += q * q * q * q;
    }
    let kappa1 = s2 / (nf * df * (df + 2.0));
    let eta1 = s3 / (nf * df * (df + 2.0) * (df + 4.0));
    let omega1 = s4 / (nf * df * (df + 2.0) * (df + 4.0) * (df + 6.0));

    // M̂₄* = n⁻¹ Σ wᵢwᵢᵀ with wᵢ = vec(yᵢyᵢᵀ). Only the entries indexed by
    // unordered pairs are distinct, so accumulate the reduced Gram matrix.
    let pairs = unique_pairs(d);
    let p = pairs.len();
    let mut reduced = Matrix::zeros(p, p);
    let mut weighted_sum = vec![0.0; p];
    let mut start = 0;
    while start < n {
        let end = (start + CHUNK_ROWS).min(n);
        let w = Matrix::from_fn(end - start, p, |i, c| {
            let (j, k, _) = pairs[c];
            y[(start + i, j)] * y[(start + i, k)]
        });
        reduced.gemm_tr(1.0, &w, &w, 1.0);
        for (i, row) in w.row_iter().enumerate() {
            let r = std.norms()[start + i];
            for (acc, v) in weighted_sum.iter_mut().zip(row.iter()) {
                *acc += v * r * r;
            }
        }
        start = end;
    }
    reduced /= nf;

    let mut trace_sq = 0.0;
    for a in 0..p {
        for b in 0..p {
            trace_sq += pairs[a].2 * pairs[b].2 * reduced[(a, b)] * reduced[(a, b)];
        }
    }
    let identity_form = pairs
        .iter()
        .zip(&weighted_sum)
        .map(|(&(_, _, m), v)| m * (v / nf) * (v / nf))
        .sum::<f64>();

    let mut slot = vec![0usize; d * d];
    for (c, &(j, k, _)) in pairs.iter().enumerate() {
        slot[j + k * d] = c;
        slot[k + j * d] = c;
    }
    let m4_star = Matrix::from_fn(d * d, d * d, |r, c| reduced[(slot[r], slot[c])]);

    let a = omega1 + kappa1.powi(3) - 2.0 * kappa1 * eta1;
    let beta1 = 1.0 / (24.0 * omega1);
    let denom = 24.0 * omega1 * omega1 + 12.0 * (df + 4.0) * a * omega1;
    if !(denom.abs() > 1e-12 * omega1 * omega1) {
        return Err(Error::numeric(format!(
            "Schott weight denominator vanishes ({denom:e})"
        )));
    }
    let beta2 = -3.0 * a / denom;
    let statistic = nf
        * (beta1 * trace_sq + beta2 * identity_form
            - (3.0 * beta1 + (df + 2.0) * beta2) * df * (df + 2.0) * kappa1 * kappa1);

    Ok(SchottMoments {
        kappa1,
        eta1,
        omega1,
        beta1,
        beta2,
        a,
        m4_star,
        trace_sq,
        identity_form,
        statistic,
    })
}

pub fn schott_test(x: &Sample) -> Result<TestResult> {
    let m = schott_moments(x)?;
    let law = NullLaw::chi2(schott_degrees_of_freedom(x.dim()) as f64)?;
    let p = pvalue(&law, m.statistic);
    TestResult::new(Method::Schott, m.statistic, p, law.descriptor())
}
