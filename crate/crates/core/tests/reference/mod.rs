//! Straightforward transcriptions of the six statistics on plain vectors.
//!
//! Nothing here calls into the library: linear algebra, Tyler's iteration,
//! the harmonics (trigonometric, d = 2) and the radial scores are all
//! written out directly so they can serve as an independent check.

#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::Path;

pub type Mat = Vec<Vec<f64>>;

pub fn read_csv(path: &Path) -> Mat {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(|v| v.trim().parse().unwrap()).collect())
        .collect()
}

pub fn data_path(name: &str) -> std::path::PathBuf {
    // also included from the CLI crate, hence the detour through the parent
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/data")).join(name)
}

fn zeros(r: usize, c: usize) -> Mat {
    vec![vec![0.0; c]; r]
}

fn identity(d: usize) -> Mat {
    let mut m = zeros(d, d);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let mut c = zeros(a.len(), b[0].len());
    for i in 0..a.len() {
        for j in 0..b[0].len() {
            for k in 0..b.len() {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

fn transpose(a: &Mat) -> Mat {
    let mut t = zeros(a[0].len(), a.len());
    for i in 0..a.len() {
        for j in 0..a[0].len() {
            t[j][i] = a[i][j];
        }
    }
    t
}

fn matvec(a: &Mat, v: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn mean(x: &Mat) -> Vec<f64> {
    let d = x[0].len();
    let mut m = vec![0.0; d];
    for row in x {
        for j in 0..d {
            m[j] += row[j];
        }
    }
    m.iter().map(|v| v / x.len() as f64).collect()
}

pub fn cov(x: &Mat, denominator: f64) -> Mat {
    let m = mean(x);
    let d = m.len();
    let mut s = zeros(d, d);
    for row in x {
        for j in 0..d {
            for k in 0..d {
                s[j][k] += (row[j] - m[j]) * (row[k] - m[k]);
            }
        }
    }
    for row in s.iter_mut() {
        for v in row.iter_mut() {
            *v /= denominator;
        }
    }
    s
}

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix: (values, vectors as columns).
pub fn jacobi(a: &Mat) -> (Vec<f64>, Mat) {
    let d = a.len();
    let mut a = a.clone();
    let mut v = identity(d);
    for _sweep in 0..100 {
        let off: f64 = (0..d)
            .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    ((0..d).map(|i| a[i][i]).collect(), v)
}

pub fn sym_power(a: &Mat, power: f64) -> Mat {
    let (vals, vecs) = jacobi(a);
    let d = a.len();
    let mut out = zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                out[i][j] += vecs[i][k] * vals[k].powf(power) * vecs[j][k];
            }
        }
    }
    out
}

/// Gauss–Jordan inverse.
pub fn inverse(a: &Mat) -> Mat {
    let d = a.len();
    let mut m = a.clone();
    let mut inv = identity(d);
    for col in 0..d {
        let pivot = (col..d).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())).unwrap();
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let p = m[col][col];
        for j in 0..d {
            m[col][j] /= p;
            inv[col][j] /= p;
        }
        for i in 0..d {
            if i != col {
                let f = m[i][col];
                for j in 0..d {
                    m[i][j] -= f * m[col][j];
                    inv[i][j] -= f * inv[col][j];
                }
            }
        }
    }
    inv
}

/// Rows R(x − θ) for the given root R.
fn standardize(x: &Mat, theta: &[f64], root: &Mat) -> Mat {
    x.iter()
        .map(|row| {
            let z: Vec<f64> = row.iter().zip(theta).map(|(a, b)| a - b).collect();
            matvec(root, &z)
        })
        .collect()
}

pub fn tyler(x: &Mat, theta: &[f64]) -> Mat {
    let n = x.len();
    let d = theta.len();
    let z: Mat = x.iter().map(|r| r.iter().zip(theta).map(|(a, b)| a - b).collect()).collect();
    let mut v = identity(d);
    for _ in 0..10_000 {
        let vinv = inverse(&v);
        let mut next = zeros(d, d);
        for zi in &z {
            let q = dot(zi, &matvec(&vinv, zi));
            for j in 0..d {
                for k in 0..d {
                    next[j][k] += zi[j] * zi[k] / q;
                }
            }
        }
        let tr: f64 = (0..d).map(|j| next[j][j]).sum();
        for row in next.iter_mut() {
            for e in row.iter_mut() {
                *e *= d as f64 / tr;
            }
        }
        let diff = (0..d)
            .flat_map(|j| (0..d).map(move |k| (j, k)))
            .map(|(j, k)| (next[j][k] - v[j][k]).abs())
            .fold(0.0, f64::max);
        v = next;
        if diff < 1e-15 {
            break;
        }
    }
    let vinv = inverse(&v);
    let mq: f64 = z.iter().map(|zi| dot(zi, &matvec(&vinv, zi))).sum::<f64>() / n as f64;
    v.iter().map(|r| r.iter().map(|e| e * mq / d as f64).collect()).collect()
}

/// Orthonormal circle harmonics of degree k at angle t.
fn circle_harmonics(k: usize, t: f64) -> Vec<f64> {
    if k == 0 {
        vec![1.0]
    } else {
        let s = 2f64.sqrt();
        vec![s * (k as f64 * t).cos(), s * (k as f64 * t).sin()]
    }
}

pub fn ks_bivariate(x: &Mat) -> f64 {
    let n = x.len();
    let y = standardize(x, &mean(x), &sym_power(&cov(x, n as f64), -0.5));
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| norm(&y[a]).partial_cmp(&norm(&y[b])).unwrap());
    let mut best: f64 = 0.0;
    for j in 1..=n {
        let mut total = 0.0;
        for k in 0..=4 {
            let mut acc = vec![0.0; if k == 0 { 1 } else { 2 }];
            for &i in &idx[..j] {
                let t = y[i][1].atan2(y[i][0]);
                for (a, h) in acc.iter_mut().zip(circle_harmonics(k, t)) {
                    *a += h - if k == 0 { 1.0 } else { 0.0 };
                }
            }
            total += acc.iter().map(|a| a * a).sum::<f64>();
        }
        best = best.max(total.sqrt());
    }
    best / (n as f64).sqrt()
}

pub fn mpq_bivariate(x: &Mat, epsilon: f64) -> f64 {
    let n = x.len();
    let y = standardize(x, &mean(x), &sym_power(&cov(x, n as f64 - 1.0), -0.5));
    let mut r: Vec<f64> = y.iter().map(|v| norm(v)).collect();
    let norms = r.clone();
    r.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let h = (n - 1) as f64 * epsilon;
    let lo = h.floor() as usize;
    let rho = if lo + 1 < n { r[lo] + (h - lo as f64) * (r[lo + 1] - r[lo]) } else { r[lo] };
    let mut total = 0.0;
    for k in 3..=4 {
        for s in 0..2 {
            let mut acc = 0.0;
            for i in 0..n {
                if norms[i] > rho {
                    acc += circle_harmonics(k, y[i][1].atan2(y[i][0]))[s];
                }
            }
            total += acc * acc;
        }
    }
    total / n as f64
}

fn kron(a: &Mat, b: &Mat) -> Mat {
    let (ra, ca, rb, cb) = (a.len(), a[0].len(), b.len(), b[0].len());
    let mut k = zeros(ra * rb, ca * cb);
    for i in 0..ra {
        for j in 0..ca {
            for p in 0..rb {
                for q in 0..cb {
                    k[i * rb + p][j * cb + q] = a[i][j] * b[p][q];
                }
            }
        }
    }
    k
}

pub fn schott(x: &Mat) -> f64 {
    let n = x.len() as f64;
    let d = x[0].len();
    let df = d as f64;
    let m = mean(x);
    let s = cov(x, n - 1.0);
    let sinv = inverse(&s);
    let root = sym_power(&s, -0.5);
    let mut m4 = zeros(d * d, d * d);
    for row in x {
        let z: Vec<f64> = row.iter().zip(&m).map(|(a, b)| a - b).collect();
        let zz: Mat = z.iter().map(|a| z.iter().map(|b| a * b).collect()).collect();
        let k = kron(&zz, &zz);
        for i in 0..d * d {
            for j in 0..d * d {
                m4[i][j] += k[i][j] / n;
            }
        }
    }
    let rr = kron(&transpose(&root), &transpose(&root));
    let m4s = matmul(&matmul(&rr, &m4), &kron(&root, &root));
    let sq = matmul(&m4s, &m4s);
    let tr: f64 = (0..d * d).map(|i| sq[i][i]).sum();
    let mut veci = vec![0.0; d * d];
    for j in 0..d {
        veci[j * d + j] = 1.0;
    }
    let form = dot(&veci, &matvec(&sq, &veci));
    let maha: Vec<f64> = x
        .iter()
        .map(|row| {
            let z: Vec<f64> = row.iter().zip(&m).map(|(a, b)| a - b).collect();
            dot(&z, &matvec(&sinv, &z))
        })
        .collect();
    let k1 = maha.iter().map(|q| q.powi(2)).sum::<f64>() / (n * df * (df + 2.0));
    let e1 = maha.iter().map(|q| q.powi(3)).sum::<f64>() / (n * df * (df + 2.0) * (df + 4.0));
    let w1 = maha.iter().map(|q| q.powi(4)).sum::<f64>()
        / (n * df * (df + 2.0) * (df + 4.0) * (df + 6.0));
    let a = w1 + k1.powi(3) - 2.0 * k1 * e1;
    let b1 = 1.0 / w1 / 24.0;
    let b2 = -3.0 * a / (24.0 * w1 * w1 + 12.0 * (df + 4.0) * a * w1);
    n * (b1 * tr + b2 * form - (3.0 * b1 + (df + 2.0) * b2) * df * (df + 2.0) * k1 * k1)
}

/// Lower-triangular Cholesky factor.
fn cholesky(a: &Mat) -> Mat {
    let d = a.len();
    let mut l = zeros(d, d);
    for i in 0..d {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            l[i][j] = if i == j { (a[i][i] - s).sqrt() } else { (a[i][j] - s) / l[j][j] };
        }
    }
    l
}

/// Orthant cell counts [orthant][shell] for the Gram–Schmidt standardized data.
pub fn hp_orthant_counts(x: &Mat, c: usize) -> Vec<Vec<usize>> {
    let n = x.len();
    let d = x[0].len();
    let root = inverse(&cholesky(&cov(x, n as f64)));
    let y = standardize(x, &mean(x), &root);
    let mut counts = vec![vec![0; c]; 1 << d];
    for i in 0..n {
        let ri = norm(&y[i]);
        // rank with ties broken by index
        let rank = (0..n)
            .filter(|&j| {
                let rj = norm(&y[j]);
                rj < ri || (rj == ri && j < i)
            })
            .count();
        let shell = rank * c / n;
        let mut orthant = 0;
        for (j, v) in y[i].iter().enumerate() {
            if *v < 0.0 {
                orthant += 1 << j;
            }
        }
        counts[orthant][shell] += 1;
    }
    counts
}

pub fn hp_statistic(counts: &[Vec<usize>]) -> f64 {
    let n: usize = counts.iter().flatten().sum();
    let cells = counts.len() * counts[0].len();
    let np = n as f64 / cells as f64;
    counts.iter().flatten().map(|&u| (u as f64 - np).powi(2) / np).sum()
}

fn gamma_fn(x: f64) -> f64 {
    // Γ at half-integers and integers, by recursion from Γ(1) = 1, Γ(1/2) = √π
    if (x - 1.0).abs() < 1e-12 {
        1.0
    } else if (x - 0.5).abs() < 1e-12 {
        PI.sqrt()
    } else {
        (x - 1.0) * gamma_fn(x - 1.0)
    }
}

fn signed_sq(u: &[f64]) -> Vec<f64> {
    u.iter().map(|v| v * v * v.signum()).collect()
}

pub fn pg_specified(x: &Mat, theta: &[f64]) -> f64 {
    let n = x.len();
    let df = theta.len() as f64;
    let y = standardize(x, theta, &sym_power(&tyler(x, theta), -0.5));
    let r: Vec<f64> = y.iter().map(|v| norm(v)).collect();
    let su: Mat = y.iter().zip(&r).map(|(v, ri)| signed_sq(&v.iter().map(|a| a / ri).collect::<Vec<_>>())).collect();
    let m4 = r.iter().map(|v| v.powi(4)).sum::<f64>() / n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += r[i].powi(2) * r[j].powi(2) * dot(&su[i], &su[j]);
        }
    }
    df * (df + 2.0) / (3.0 * n as f64 * m4) * acc
}

pub fn pg_unspecified(x: &Mat) -> f64 {
    let n = x.len();
    let d = x[0].len();
    let df = d as f64;
    let theta = mean(x);
    let y = standardize(x, &theta, &sym_power(&tyler(x, &theta), -0.5));
    let r: Vec<f64> = y.iter().map(|v| norm(v)).collect();
    let m = |k: i32| r.iter().map(|v| v.powi(k)).sum::<f64>() / n as f64;
    let cd = 4.0 * gamma_fn(df / 2.0) / ((df * df - 1.0) * PI.sqrt() * gamma_fn((df - 1.0) / 2.0));
    let mut delta = vec![0.0; d];
    for i in 0..n {
        let u: Vec<f64> = y[i].iter().map(|a| a / r[i]).collect();
        let s = signed_sq(&u);
        for j in 0..d {
            delta[j] += r[i] * (cd * (df + 1.0) * m(1) * u[j] - r[i] * s[j]) / (n as f64).sqrt();
        }
    }
    let gamma = 3.0 / (df * (df + 2.0)) * m(4) - 2.0 * cd * cd * (df + 1.0) * m(1) * m(3)
        + cd * cd * (df + 1.0).powi(2) / df * m(1).powi(2) * m(2);
    dot(&delta, &delta) / gamma
}

#[derive(Clone, Copy, Debug)]
pub enum Radial {
    T(f64),
    Logistic,
    PowerExp(f64),
}

/// (φ, φ′) written from f directly.
fn radial_score(f: Radial, x: f64, d: usize) -> (f64, f64) {
    match f {
        Radial::T(nu) => {
            let k = nu + d as f64;
            (k * x / (nu + x * x), k * (nu + x * x - 2.0 * x * x) / (nu + x * x).powi(2))
        }
        Radial::Logistic => {
            let e = (-x * x).exp();
            let t = (1.0 - e) / (1.0 + e);
            (2.0 * x * t, 2.0 * t + 8.0 * x * x * e / (1.0 + e).powi(2))
        }
        Radial::PowerExp(b) => (b * x.powf(2.0 * b - 1.0), b * (2.0 * b - 1.0) * x.powf(2.0 * b - 2.0)),
    }
}

pub fn so_unspecified(x: &Mat, f: Radial) -> f64 {
    let n = x.len();
    let d = x[0].len();
    let df = d as f64;
    let theta = mean(x);
    let y = standardize(x, &theta, &sym_power(&tyler(x, &theta), -0.5));
    let pdot = 1.0 / (2.0 * PI).sqrt();
    let k_hat = y
        .iter()
        .map(|v| {
            let r = norm(v);
            let (p, dp) = radial_score(f, r, d);
            dp + (df - 1.0) / r * p
        })
        .sum::<f64>()
        / n as f64;
    let mut delta = vec![0.0; d];
    let mut g = 0.0;
    for v in &y {
        let r = norm(v);
        let a = r - df / k_hat * radial_score(f, r, d).0;
        for j in 0..d {
            delta[j] += 2.0 * pdot * a * v[j] / r / (n as f64).sqrt();
        }
        g += 4.0 * pdot * pdot * a * a / (n as f64 * df);
    }
    dot(&delta, &delta) / g
}

pub fn so_specified(x: &Mat, theta: &[f64]) -> f64 {
    let n = x.len() as f64;
    let vinv = inverse(&tyler(x, theta));
    let diff: Vec<f64> = mean(x).iter().zip(theta).map(|(a, b)| a - b).collect();
    n * dot(&diff, &matvec(&vinv, &diff))
}
