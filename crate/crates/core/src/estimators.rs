//! Location and scatter estimation.

use nalgebra::{Cholesky, DVector};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Scatter};

/// An n×d data matrix, one observation per row, with n > d ≥ 2.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample(Matrix);

impl Sample {
    pub fn new(values: Matrix) -> Result<Self> {
        let (n, d) = values.shape();
        if d < 2 {
            return Err(Error::domain(format!("need at least 2 columns, got {d}")));
        }
        if n <= d {
            return Err(Error::domain(format!(
                "need more observations than dimensions (n = {n}, d = {d})"
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            // column-major storage
            return Err(Error::domain(format!(
                "non-finite value at row {}, column {}",
                pos % n + 1,
                pos / n + 1
            )));
        }
        Ok(Sample(values))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Sample::new(crate::linalg::matrix_from_rows(rows)?)
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn dim(&self) -> usize {
        self.0.ncols()
    }

    pub fn values(&self) -> &Matrix {
        &self.0
    }

    pub fn into_values(self) -> Matrix {
        self.0
    }

    pub fn row(&self, i: usize) -> DVector<f64> {
        self.0.row(i).transpose()
    }

    /// Rows `start..end` as a new sample.
    pub fn slice_rows(&self, start: usize, end: usize) -> Result<Sample> {
        if start >= end || end > self.n() {
            return Err(Error::usage(format!(
                "row range {start}..{end} out of bounds for {} rows",
                self.n()
            )));
        }
        Sample::new(self.0.rows(start, end - start).into_owned())
    }

    /// The image of the sample under x ↦ A·x + b.
    pub fn affine_map(&self, a: &Matrix, b: &DVector<f64>) -> Result<Sample> {
        let d = self.dim();
        if a.shape() != (d, d) || b.len() != d {
            return Err(Error::usage("affine map does not match the sample dimension"));
        }
        let mut out = &self.0 * a.transpose();
        for mut row in out.row_iter_mut() {
            row += b.transpose();
        }
        Sample::new(out)
    }
}

/// A location vector θ.
#[derive(Debug, Clone, PartialEq)]
pub struct Location(DVector<f64>);

impl Location {
    pub fn new(v: DVector<f64>) -> Result<Self> {
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("location has non-finite entries"));
        }
        Ok(Location(v))
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        Location::new(DVector::from_column_slice(v))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub(crate) fn check_dim(&self, d: usize) -> Result<()> {
        if self.dim() != d {
            return Err(Error::usage(format!(
                "location has dimension {}, sample has {d}",
                self.dim()
            )));
        }
        Ok(())
    }
}

pub fn sample_mean(x: &Sample) -> Location {
    let n = x.n() as f64;
    let means = x.values().row_sum().transpose() / n;
    Location(means)
}

/// Divisor used by [`sample_cov`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Denominator {
    N,
    NMinusOne,
}

/// X − 1·θᵀ
pub(crate) fn centered(x: &Sample, location: &Location) -> Matrix {
    let mut c = x.values().clone();
    let t = location.vector().transpose();
    for mut row in c.row_iter_mut() {
        row -= &t;
    }
    c
}

pub fn sample_cov(x: &Sample, denominator: Denominator) -> Result<Scatter> {
    let mean = sample_mean(x);
    let c = centered(x, &mean);
    let divisor = match denominator {
        Denominator::N => x.n() as f64,
        Denominator::NMinusOne => (x.n() - 1) as f64,
    };
    let cov = c.tr_mul(&c) / divisor;
    let s = Scatter::from_symmetrized(cov)?;
    s.check_spd()
        .map_err(|e| Error::domain(format!("sample covariance is rank deficient ({e})")))?;
    Ok(s)
}

/// Stopping rule for [`tyler_scatter`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TylerOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for TylerOptions {
    fn default() -> Self {
        TylerOptions {
            tol: 1e-10,
            max_iter: 500,
        }
    }
}

/// Squared Mahalanobis norms zᵢᵀV⁻¹zᵢ of the rows of `c`.
fn mahalanobis_sq(c: &Matrix, v: &Matrix) -> Result<Vec<f64>> {
    let chol = Cholesky::new(v.clone())
        .ok_or_else(|| Error::domain("scatter iterate lost positive definiteness"))?;
    // rows of W = C·L⁻ᵀ give ‖L⁻¹zᵢ‖²
    let w = chol
        .l()
        .solve_lower_triangular(&c.transpose())
        .ok_or_else(|| Error::domain("singular Cholesky factor"))?;
    Ok(w.column_iter().map(|col| col.norm_squared()).collect())
}

/// Tyler's M-estimator of scatter about a fixed location.
///
/// Fixed-point iteration started at the sample covariance about `location`
/// and trace-normalized every step. The result is rescaled so that the
/// average squared Mahalanobis norm of the centered data equals d.
pub fn tyler_scatter(x: &Sample, location: &Location, opts: TylerOptions) -> Result<Scatter> {
    let (n, d) = (x.n(), x.dim());
    location.check_dim(d)?;
    let c = centered(x, location);
    let scale = c.amax().max(f64::MIN_POSITIVE);
    for (i, row) in c.row_iter().enumerate() {
        if row.norm() <= 1e-12 * scale {
            return Err(Error::domain(format!(
                "observation {} coincides with the location",
                i + 1
            )));
        }
    }

    let df = d as f64;
    let mut v = c.tr_mul(&c) / n as f64;
    v *= df / v.trace();
    let mut residual = f64::INFINITY;
    for _ in 0..opts.max_iter {
        let q = mahalanobis_sq(&c, &v)?;
        let mut weighted = c.clone();
        for (mut row, qi) in weighted.row_iter_mut().zip(&q) {
            row /= *qi;
        }
        let mut next = c.tr_mul(&weighted) * (df / n as f64);
        next = (&next + next.transpose()) * 0.5;
        next *= df / next.trace();
        residual = (&next - &v).amax();
        v = next;
        if residual < opts.tol {
            let q = mahalanobis_sq(&c, &v)?;
            let mean_q = q.iter().sum::<f64>() / n as f64;
            v *= mean_q / df;
            let s = Scatter::from_symmetrized(v)?;
            s.check_spd()?;
            return Ok(s);
        }
    }
    Err(Error::Convergence {
        iterations: opts.max_iter,
        residual,
    })
}

/// max-norm of (d/n)·Σ sᵢsᵢᵀ − I with sᵢ = V^{-1/2}(Xᵢ−θ)/‖V^{-1/2}(Xᵢ−θ)‖.
pub fn tyler_residual(x: &Sample, location: &Location, v: &Scatter) -> Result<f64> {
    let (n, d) = (x.n(), x.dim());
    let root = crate::linalg::sym_inv_sqrt(v)?;
    let y = centered(x, location) * root;
    let mut acc = Matrix::zeros(d, d);
    for row in y.row_iter() {
        let s = row.transpose() / row.norm();
        acc += &s * s.transpose();
    }
    acc *= d as f64 / n as f64;
    Ok((acc - Matrix::identity(d, d)).amax())
}
