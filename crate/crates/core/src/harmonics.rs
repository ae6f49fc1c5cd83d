//! Real spherical harmonics of degree 0..=4 on S^{d-1} for any d ≥ 2.
//!
//! Every basis function is a polynomial restricted to the unit sphere. The
//! basis is obtained by orthonormalizing monomials, ordered by degree and then
//! by descending exponent tuple, in L²(S^{d-1}) with the uniform probability
//! measure. Monomial inner products are exact sphere moments, so no quadrature
//! is involved. Degree-k monomials restricted to the sphere span
//! H_k ⊕ H_{k-2} ⊕ ..., so whatever survives orthogonalization against the
//! lower degrees is exactly H_k.

use std::collections::HashMap;
use std::ops::Range;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub const MAX_DEGREE: usize = 4;

/// Dimension of the space of degree-k spherical harmonics in R^d.
pub fn dim_h(d: usize, k: usize) -> usize {
    match k {
        0 => 1,
        1 => d,
        _ => binomial(d + k - 1, k) - binomial(d + k - 3, k - 2),
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// A monomial u^α, stored as its non-zero (coordinate, power) factors.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Monomial {
    exponents: Vec<u8>,
    factors: Vec<(usize, u8)>,
    degree: usize,
}

impl Monomial {
    fn new(exponents: Vec<u8>) -> Self {
        let factors = exponents
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| (i, e))
            .collect();
        let degree = exponents.iter().map(|&e| e as usize).sum();
        Monomial {
            exponents,
            factors,
            degree,
        }
    }
}

/// All exponent tuples of total degree `k` in `d` variables, descending lexicographic.
fn exponent_tuples(d: usize, k: usize) -> Vec<Vec<u8>> {
    fn rec(d: usize, left: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if prefix.len() == d - 1 {
            prefix.push(left as u8);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e as u8);
            rec(d, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, k, &mut Vec::with_capacity(d), &mut out);
    out
}

/// E[u^γ] for u uniform on S^{d-1}: zero unless every exponent is even, else
/// Π(γᵢ−1)!! / (d(d+2)…(d+|γ|−2)).
fn sphere_moment(d: usize, a: &[u8], b: &[u8]) -> f64 {
    let mut num = 1.0;
    let mut total = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        let g = (x + y) as usize;
        if g % 2 == 1 {
            return 0.0;
        }
        let mut k = g as i64 - 1;
        while k > 1 {
            num *= k as f64;
            k -= 2;
        }
        total += g;
    }
    let mut den = 1.0;
    for j in 0..total / 2 {
        den *= (d + 2 * j) as f64;
    }
    num / den
}

/// Orthonormal real spherical harmonics of degree 0..=max_degree.
#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    dim: usize,
    max_degree: usize,
    monomials: Vec<Monomial>,
    /// m × N coefficients of each basis function on the monomials.
    coefficients: Matrix,
    degrees: Vec<usize>,
}

const DEPENDENCE_TOLERANCE: f64 = 1e-8;

impl HarmonicBasis {
    fn construct(d: usize, max_degree: usize) -> Result<Self> {
        let monomials: Vec<Monomial> = (0..=max_degree)
            .flat_map(|k| exponent_tuples(d, k))
            .map(Monomial::new)
            .collect();
        let n_mono = monomials.len();

        // Accepted basis vectors q (monomial coefficients) with w = G·q, G the
        // Gram matrix of the monomials.
        let mut basis: Vec<(Vec<f64>, Vec<f64>, usize)> = Vec::new();
        for (m, mono) in monomials.iter().enumerate() {
            let mut r = vec![0.0; n_mono];
            r[m] = 1.0;
            let mut gr: Vec<f64> = monomials
                .iter()
                .map(|other| sphere_moment(d, &other.exponents, &mono.exponents))
                .collect();
            let self_norm = gr[m];
            // two passes of classical Gram–Schmidt
            for _ in 0..2 {
                for (q, w, degree) in &basis {
                    if degree % 2 != mono.degree % 2 {
                        continue;
                    }
                    let c: f64 = w.iter().zip(&r).map(|(a, b)| a * b).sum();
                    if c == 0.0 {
                        continue;
                    }
                    r.iter_mut().zip(q).for_each(|(ri, qi)| *ri -= c * qi);
                    gr.iter_mut().zip(w).for_each(|(gi, wi)| *gi -= c * wi);
                }
            }
            let norm2: f64 = r.iter().zip(&gr).map(|(a, b)| a * b).sum();
            if norm2 > DEPENDENCE_TOLERANCE * self_norm {
                let inv = 1.0 / norm2.sqrt();
                r.iter_mut().for_each(|v| *v *= inv);
                gr.iter_mut().for_each(|v| *v *= inv);
                basis.push((r, gr, mono.degree));
            }
        }

        for k in 0..=max_degree {
            let got = basis.iter().filter(|b| b.2 == k).count();
            if got != dim_h(d, k) {
                return Err(Error::numeric(format!(
                    "harmonic basis construction produced {got} functions of degree {k} in dimension {d}, expected {}",
                    dim_h(d, k)
                )));
            }
        }

        let m = basis.len();
        let mut coefficients = Matrix::zeros(m, n_mono);
        for (s, (q, _, _)) in basis.iter().enumerate() {
            for (j, &v) in q.iter().enumerate() {
                coefficients[(s, j)] = v;
            }
        }
        let degrees = basis.iter().map(|b| b.2).collect();
        Ok(HarmonicBasis {
            dim: d,
            max_degree,
            monomials,
            coefficients,
            degrees,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Number of basis functions, Σₖ dim_h(d, k).
    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn degree_of(&self, s: usize) -> usize {
        self.degrees[s]
    }

    /// Indices of the basis functions of degree `k`.
    pub fn degree_range(&self, k: usize) -> Range<usize> {
        let start = self.degrees.iter().position(|&g| g == k).unwrap_or(self.len());
        let end = start + self.degrees[start..].iter().take_while(|&&g| g == k).count();
        start..end
    }

    pub fn monomial_count(&self) -> usize {
        self.monomials.len()
    }

    /// Values of every monomial at `u`, written into `out`.
    pub fn monomial_values(&self, u: &[f64], out: &mut [f64]) {
        debug_assert_eq!(u.len(), self.dim);
        let mut powers = vec![[1.0f64; MAX_DEGREE + 1]; self.dim];
        for (p, &x) in powers.iter_mut().zip(u) {
            for e in 1..=self.max_degree {
                p[e] = p[e - 1] * x;
            }
        }
        for (o, mono) in out.iter_mut().zip(&self.monomials) {
            *o = mono
                .factors
                .iter()
                .fold(1.0, |acc, &(i, e)| acc * powers[i][e as usize]);
        }
    }

    /// Evaluates all basis functions at a unit vector.
    pub fn eval(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.dim {
            return Err(Error::usage(format!(
                "expected a {}-vector, got length {}",
                self.dim,
                u.len()
            )));
        }
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-8 {
            return Err(Error::usage(format!("evaluation point has norm {norm}, not 1")));
        }
        let mut mono = vec![0.0; self.monomial_count()];
        self.monomial_values(u, &mut mono);
        let v = &self.coefficients * nalgebra::DVector::from_vec(mono);
        Ok(v.iter().copied().collect())
    }

    /// Evaluates the basis at each row of `directions` (n×d, unit rows).
    /// Returns an n×m matrix.
    pub fn eval_rows(&self, directions: &Matrix) -> Matrix {
        self.monomial_rows(directions) * self.coefficients.transpose()
    }

    /// n×N matrix of monomial values at each row of `directions`.
    pub fn monomial_rows(&self, directions: &Matrix) -> Matrix {
        let n = directions.nrows();
        let n_mono = self.monomial_count();
        let mut out = Matrix::zeros(n, n_mono);
        let mut u = vec![0.0; self.dim];
        let mut buf = vec![0.0; n_mono];
        for i in 0..n {
            for (j, x) in u.iter_mut().enumerate() {
                *x = directions[(i, j)];
            }
            self.monomial_values(&u, &mut buf);
            for (j, v) in buf.iter().enumerate() {
                out[(i, j)] = *v;
            }
        }
        out
    }

    /// m × N coefficient matrix mapping monomial values to basis values.
    pub fn coefficients(&self) -> &Matrix {
        &self.coefficients
    }
}

type CacheSlot = Arc<OnceLock<std::result::Result<Arc<HarmonicBasis>, Error>>>;

fn cache() -> &'static Mutex<HashMap<(usize, usize), CacheSlot>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), CacheSlot>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The (cached) orthonormal basis of G_l on S^{d-1}.
pub fn build_basis(d: usize, max_degree: usize) -> Result<Arc<HarmonicBasis>> {
    if d < 2 {
        return Err(Error::usage(format!("dimension must be at least 2, got {d}")));
    }
    if !(1..=MAX_DEGREE).contains(&max_degree) {
        return Err(Error::usage(format!(
            "harmonic degree must be in 1..={MAX_DEGREE}, got {max_degree}"
        )));
    }
    let slot = {
        let mut map = cache().lock().unwrap_or_else(|e| e.into_inner());
        map.entry((d, max_degree)).or_default().clone()
    };
    slot.get_or_init(|| HarmonicBasis::construct(d, max_degree).map(Arc::new))
        .clone()
}

pub fn eval_basis(basis: &HarmonicBasis, u: &[f64]) -> Result<Vec<f64>> {
    basis.eval(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_unit(d: usize, rng: &mut impl Rng) -> Vec<f64> {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / n).collect()
    }

    #[test]
    fn harmonic_dimensions() {
        assert_eq!(dim_h(2, 3), 2);
        assert_eq!(dim_h(3, 4), 9);
        // C(8,4) − C(6,2) = 70 − 15
        assert_eq!(dim_h(5, 4), 55);
        for k in 0..=4 {
            assert_eq!(dim_h(3, k), 2 * k + 1);
            if k > 0 {
                assert_eq!(dim_h(2, k), 2);
            }
        }
    }

    #[test]
    fn basis_counts() {
        assert_eq!(build_basis(2, 4).unwrap().len(), 9);
        assert_eq!(build_basis(3, 2).unwrap().len(), 9);
        for d in 2..=7 {
            for l in 1..=4 {
                let b = build_basis(d, l).unwrap();
                assert_eq!(b.len(), (0..=l).map(|k| dim_h(d, k)).sum::<usize>());
                for k in 0..=l {
                    assert_eq!(b.degree_range(k).len(), dim_h(d, k));
                }
            }
        }
    }

    #[test]
    fn unsupported_degree() {
        assert!(build_basis(3, 5).unwrap_err().is_usage());
        assert!(build_basis(3, 0).unwrap_err().is_usage());
        assert!(build_basis(1, 2).unwrap_err().is_usage());
    }

    #[test]
    fn constant_first_and_unit_check() {
        let b = build_basis(4, 4).unwrap();
        let mut e1 = vec![0.0; 4];
        e1[0] = 1.0;
        let v = b.eval(&e1).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-15);
        assert!(b.eval(&[0.5, 0.5, 0.0, 0.0]).unwrap_err().is_usage());
    }

    #[test]
    fn circle_closed_form() {
        // On the circle the degree-k space is spanned by √2·cos kφ, √2·sin kφ,
        // so the basis pair must be an orthogonal mix of those two.
        let b = build_basis(2, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let phis: Vec<f64> = (0..8).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
        for k in 1..=4 {
            let r = b.degree_range(k);
            // recover the 2×2 mix from two angles, check it on the rest
            let vals: Vec<Vec<f64>> = phis
                .iter()
                .map(|&p| b.eval(&[p.cos(), p.sin()]).unwrap()[r.clone()].to_vec())
                .collect();
            let trig = |p: f64| {
                let kf = k as f64;
                [2f64.sqrt() * (kf * p).cos(), 2f64.sqrt() * (kf * p).sin()]
            };
            let t0 = trig(phis[0]);
            let t1 = trig(phis[1]);
            let tm = Matrix::from_row_slice(2, 2, &[t0[0], t0[1], t1[0], t1[1]]);
            let vm = Matrix::from_row_slice(2, 2, &[vals[0][0], vals[0][1], vals[1][0], vals[1][1]]);
            let mix = tm.try_inverse().unwrap() * vm;
            let gram = mix.transpose() * &mix;
            assert!((gram - Matrix::identity(2, 2)).amax() < 1e-10, "degree {k}");
            for (p, v) in phis.iter().zip(&vals).skip(2) {
                let t = trig(*p);
                let pred = Matrix::from_row_slice(1, 2, &t) * &mix;
                assert!((pred[(0, 0)] - v[0]).abs() < 1e-10);
                assert!((pred[(0, 1)] - v[1]).abs() < 1e-10);
            }
        }
        // at u = (1,0) the degree-2 pair has squared norm 2 (cos 0 = 1, sin 0 = 0)
        let v = b.eval(&[1.0, 0.0]).unwrap();
        let r = b.degree_range(2);
        let sq: f64 = v[r].iter().map(|x| x * x).sum();
        assert!((sq - 2.0).abs() < 1e-12);
    }

    #[test]
    fn parity_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for d in 2..=6 {
            let b = build_basis(d, 4).unwrap();
            for _ in 0..20 {
                let u = random_unit(d, &mut rng);
                let neg: Vec<f64> = u.iter().map(|x| -x).collect();
                let a = b.eval(&u).unwrap();
                let c = b.eval(&neg).unwrap();
                for s in 0..b.len() {
                    let sign = if b.degree_of(s) % 2 == 0 { 1.0 } else { -1.0 };
                    assert_eq!(c[s], sign * a[s]);
                }
            }
        }
    }

    #[test]
    fn addition_theorem() {
        // Σ over a full degree space of ψ(u)² is the constant dim_h(d, k).
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in 2..=6 {
            let b = build_basis(d, 4).unwrap();
            for _ in 0..10 {
                let v = b.eval(&random_unit(d, &mut rng)).unwrap();
                for k in 0..=4 {
                    let sq: f64 = v[b.degree_range(k)].iter().map(|x| x * x).sum();
                    assert!((sq - dim_h(d, k) as f64).abs() < 1e-9 * dim_h(d, k) as f64);
                }
            }
        }
    }

    #[test]
    fn gram_is_identity_under_exact_moments() {
        for d in 2..=5 {
            let b = build_basis(d, 4).unwrap();
            let n_mono = b.monomial_count();
            let g = Matrix::from_fn(n_mono, n_mono, |i, j| {
                sphere_moment(d, &b.monomials[i].exponents, &b.monomials[j].exponents)
            });
            let q = b.coefficients();
            let gram = q * g * q.transpose();
            assert!((gram - Matrix::identity(b.len(), b.len())).amax() < 1e-10);
        }
    }

    #[test]
    fn concurrent_first_access() {
        let handles: Vec<_> = (0..8)
            .map(|_| std::thread::spawn(|| build_basis(9, 4).unwrap()))
            .collect();
        let bases: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        for b in &bases[1..] {
            assert!(Arc::ptr_eq(b, &bases[0]));
        }
    }

    #[test]
    fn eval_rows_matches_eval() {
        let b = build_basis(3, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rows: Vec<Vec<f64>> = (0..5).map(|_| random_unit(3, &mut rng)).collect();
        let m = Matrix::from_fn(5, 3, |i, j| rows[i][j]);
        let batch = b.eval_rows(&m);
        for (i, u) in rows.iter().enumerate() {
            let v = b.eval(u).unwrap();
            for s in 0..b.len() {
                assert!((batch[(i, s)] - v[s]).abs() < 1e-12);
            }
        }
    }
}
