use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::estimators::{Location, Sample};
use crate::linalg::{sym_sqrt, Matrix, Scatter};

/// n×d matrix of independent standard normals.
pub fn standard_normal_rows<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Matrix {
    // row-major draw order so the stream does not depend on storage layout
    let mut m = Matrix::zeros(n, d);
    for i in 0..n {
        for j in 0..d {
            m[(i, j)] = rng.sample(StandardNormal);
        }
    }
    m
}

/// n unit vectors drawn uniformly on S^{d-1}, as rows.
pub fn uniform_sphere_rows<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Matrix {
    let mut m = Matrix::zeros(n, d);
    for i in 0..n {
        loop {
            let mut norm2 = 0.0;
            for j in 0..d {
                let z: f64 = rng.sample(StandardNormal);
                m[(i, j)] = z;
                norm2 += z * z;
            }
            if norm2 > 0.0 {
                let inv = 1.0 / norm2.sqrt();
                for j in 0..d {
                    m[(i, j)] *= inv;
                }
                break;
            }
        }
    }
    m
}

pub fn sample_uniform_sphere(d: usize, n: usize, seed: u64) -> Result<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Sample::new(uniform_sphere_rows(n, d, &mut rng))
}

fn shift_rows(mut m: Matrix, theta: &Location) -> Matrix {
    let t = theta.vector().transpose();
    for mut row in m.row_iter_mut() {
        row += &t;
    }
    m
}

fn check_params(theta: &Location, sigma: &Scatter) -> Result<Matrix> {
    if theta.dim() != sigma.dim() {
        return Err(Error::usage("location and scatter dimensions differ"));
    }
    sym_sqrt(sigma)
}

/// n draws from N(θ, Σ): rows Z·Σ^{1/2} + θ.
pub fn sample_mvn(theta: &Location, sigma: &Scatter, n: usize, seed: u64) -> Result<Sample> {
    let root = check_params(theta, sigma)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = standard_normal_rows(n, theta.dim(), &mut rng);
    Sample::new(shift_rows(z * root, theta))
}

/// n draws from the multivariate t with ν degrees of freedom: θ + Σ^{1/2}Z/√(W/ν).
pub fn sample_mvt(
    theta: &Location,
    sigma: &Scatter,
    nu: f64,
    n: usize,
    seed: u64,
) -> Result<Sample> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::usage(format!("degrees of freedom must be positive, got {nu}")));
    }
    let root = check_params(theta, sigma)?;
    let d = theta.dim();
    let chi = ChiSquared::new(nu).map_err(|e| Error::usage(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z = standard_normal_rows(n, d, &mut rng);
    for mut row in z.row_iter_mut() {
        let w: f64 = chi.sample(&mut rng);
        row /= (w / nu).sqrt();
    }
    Sample::new(shift_rows(z * root, theta))
}

/// Skew-normal type draws: Z ~ N(0, I_d), W ~ N(0, 1); keep Z when
/// W < slant·Z₁, otherwise flip the sign of Z₁. slant = 0 gives N(0, I_d).
pub fn sample_skewed(d: usize, n: usize, slant: f64, seed: u64) -> Result<Sample> {
    if !(slant >= 0.0) || !slant.is_finite() {
        return Err(Error::usage(format!("slant must be non-negative, got {slant}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = Matrix::zeros(n, d);
    for i in 0..n {
        for j in 0..d {
            m[(i, j)] = rng.sample(StandardNormal);
        }
        let w: f64 = rng.sample(StandardNormal);
        if w >= slant * m[(i, 0)] {
            m[(i, 0)] = -m[(i, 0)];
        }
    }
    Sample::new(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{sample_cov, sample_mean, Denominator};

    fn kurtosis(col: &[f64]) -> f64 {
        let n = col.len() as f64;
        let m = col.iter().sum::<f64>() / n;
        let m2 = col.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
        let m4 = col.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
        m4 / (m2 * m2)
    }

    fn skewness(col: &[f64]) -> f64 {
        let n = col.len() as f64;
        let m = col.iter().sum::<f64>() / n;
        let m2 = col.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
        let m3 = col.iter().map(|x| (x - m).powi(3)).sum::<f64>() / n;
        m3 / m2.powf(1.5)
    }

    #[test]
    fn sphere_rows_are_unit() {
        let x = sample_uniform_sphere(4, 1000, 3).unwrap();
        for row in x.values().row_iter() {
            assert!((row.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mvn_moments() {
        let theta = Location::from_slice(&[0.0, 0.0]).unwrap();
        let x = sample_mvn(&theta, &Scatter::identity(2), 100_000, 17).unwrap();
        let m = sample_mean(&x);
        assert!(m.vector().amax() < 0.02);
        let c = sample_cov(&x, Denominator::NMinusOne).unwrap();
        assert!((c.matrix() - Matrix::identity(2, 2)).amax() < 0.03);
    }

    #[test]
    fn mvn_rejects_non_spd() {
        let theta = Location::from_slice(&[0.0, 0.0]).unwrap();
        let s = Scatter::new(Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0])).unwrap();
        assert!(matches!(sample_mvn(&theta, &s, 10, 1), Err(Error::Domain(_))));
    }

    #[test]
    fn mvt_is_heavy_tailed() {
        let theta = Location::from_slice(&[1.0, -1.0]).unwrap();
        let x = sample_mvt(&theta, &Scatter::identity(2), 4.0, 100_000, 5).unwrap();
        for j in 0..2 {
            let col: Vec<f64> = x.values().column(j).iter().copied().collect();
            assert!(kurtosis(&col) > 3.0);
        }
    }

    #[test]
    fn skewed_sampler() {
        let x = sample_skewed(3, 100_000, 5.0, 8).unwrap();
        assert_eq!(x.values().shape(), (100_000, 3));
        assert!(x.values().iter().all(|v| v.is_finite()));
        let col: Vec<f64> = x.values().column(0).iter().copied().collect();
        assert!(skewness(&col) > 0.2);

        // slant 0 keeps Z₁ when W < 0 and flips it otherwise: still symmetric
        let x = sample_skewed(2, 100_000, 0.0, 8).unwrap();
        let col: Vec<f64> = x.values().column(0).iter().copied().collect();
        assert!(skewness(&col).abs() < 0.05);
        assert!(sample_skewed(2, 10, -1.0, 1).is_err());
    }

    #[test]
    fn seeds_reproduce() {
        let theta = Location::from_slice(&[0.0, 0.0, 0.0]).unwrap();
        let a = sample_mvn(&theta, &Scatter::identity(3), 50, 99).unwrap();
        let b = sample_mvn(&theta, &Scatter::identity(3), 50, 99).unwrap();
        assert_eq!(a, b);
    }
}
