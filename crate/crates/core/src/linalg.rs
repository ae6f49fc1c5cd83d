//! Dense symmetric linear algebra used by the tests: symmetric square roots,
//! triangular (Gram–Schmidt) standardizers and a few Kronecker utilities.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Smallest admissible eigenvalue, relative to the largest one.
pub const SPD_RELATIVE_TOLERANCE: f64 = 1e-10;

const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// A symmetric d×d matrix used as a scatter parameter.
///
/// Construction only checks shape, finiteness and symmetry. Positive
/// definiteness is checked by the decompositions, which report the offending
/// eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct Scatter(Matrix);

impl Scatter {
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::usage(format!(
                "scatter must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("scatter has non-finite entries"));
        }
        let scale = m.amax().max(f64::MIN_POSITIVE);
        let d = m.nrows();
        for i in 0..d {
            for j in (i + 1)..d {
                if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOLERANCE * scale {
                    return Err(Error::domain(format!(
                        "scatter is not symmetric at ({i}, {j}): {} vs {}",
                        m[(i, j)],
                        m[(j, i)]
                    )));
                }
            }
        }
        Ok(Scatter(m))
    }

    /// Symmetrizes `m` as (m + mᵀ)/2 before wrapping it.
    pub fn from_symmetrized(m: Matrix) -> Result<Self> {
        let sym = (&m + m.transpose()) * 0.5;
        Scatter::new(sym)
    }

    pub fn identity(d: usize) -> Self {
        Scatter(Matrix::identity(d, d))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    /// Eigenvalues and eigenvectors, failing unless the matrix is positive
    /// definite within [`SPD_RELATIVE_TOLERANCE`].
    pub fn spd_eigen(&self) -> Result<(DVector<f64>, Matrix)> {
        let eig = SymmetricEigen::new(self.0.clone());
        let max = eig.eigenvalues.max();
        let min = eig.eigenvalues.min();
        if !(max > 0.0) || min <= SPD_RELATIVE_TOLERANCE * max {
            return Err(Error::domain(format!(
                "matrix is not positive definite: eigenvalue {min:e} (largest {max:e})"
            )));
        }
        Ok((eig.eigenvalues, eig.eigenvectors))
    }

    /// Fails with a domain error unless the matrix is positive definite.
    pub fn check_spd(&self) -> Result<()> {
        self.spd_eigen().map(|_| ())
    }

    pub fn inverse(&self) -> Result<Matrix> {
        let (vals, vecs) = self.spd_eigen()?;
        Ok(spectral_map(&vals, &vecs, |v| 1.0 / v))
    }
}

fn spectral_map(vals: &DVector<f64>, vecs: &Matrix, f: impl Fn(f64) -> f64) -> Matrix {
    let d = vals.len();
    let mut scaled = vecs.clone();
    for j in 0..d {
        let w = f(vals[j]);
        scaled.column_mut(j).scale_mut(w);
    }
    let m = scaled * vecs.transpose();
    (&m + m.transpose()) * 0.5
}

/// The unique symmetric M with M·S·M = I.
pub fn sym_inv_sqrt(s: &Scatter) -> Result<Matrix> {
    let (vals, vecs) = s.spd_eigen()?;
    Ok(spectral_map(&vals, &vecs, |v| 1.0 / v.sqrt()))
}

/// The symmetric square root S^{1/2}.
pub fn sym_sqrt(s: &Scatter) -> Result<Matrix> {
    let (vals, vecs) = s.spd_eigen()?;
    Ok(spectral_map(&vals, &vecs, f64::sqrt))
}

/// Lower-triangular R with positive diagonal and R·S·Rᵀ = I, i.e. the inverse
/// of the Cholesky factor of S.
pub fn gram_schmidt_root(s: &Scatter) -> Result<Matrix> {
    s.check_spd()?;
    let chol = Cholesky::new(s.matrix().clone())
        .ok_or_else(|| Error::domain("Cholesky factorization failed"))?;
    let l = chol.l();
    let d = s.dim();
    let root = l
        .solve_lower_triangular(&Matrix::identity(d, d))
        .ok_or_else(|| Error::domain("Cholesky factor is singular"))?;
    Ok(root.lower_triangle())
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    a.kronecker(b)
}

/// Column-stacking vec operator.
pub fn vec(a: &Matrix) -> DVector<f64> {
    // nalgebra storage is column-major, which is exactly vec(·).
    DVector::from_column_slice(a.as_slice())
}

/// Commutation matrix K_dd, the permutation with K·vec(A) = vec(Aᵀ) for d×d A.
pub fn commutation(d: usize) -> Matrix {
    let mut k = Matrix::zeros(d * d, d * d);
    // vec(A)[i + j·d] = A[i, j]; vec(Aᵀ)[j + i·d] = A[i, j]
    for i in 0..d {
        for j in 0..d {
            k[(j + i * d, i + j * d)] = 1.0;
        }
    }
    k
}

/// Builds a matrix from equal-length rows.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<Matrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(Error::usage("ragged rows"));
    }
    Ok(Matrix::from_fn(r, c, |i, j| rows[i][j]))
}

/// Maximum absolute entry of `a - b`.
pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).amax()
}
