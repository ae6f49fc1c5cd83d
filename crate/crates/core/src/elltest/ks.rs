//! Koltchinskii–Sakhanenko test: sup-norm of the partial-sum process of
//! spherical-harmonic evaluations, with observations ordered by norm.

use crate::error::{Error, Result};
use crate::estimators::{sample_cov, sample_mean, Denominator, Location, Sample};
use crate::harmonics::{build_basis, dim_h, MAX_DEGREE};
use crate::linalg::{sym_inv_sqrt, sym_sqrt, Matrix, Scatter};
use crate::probdist::{pvalue, uniform_sphere_rows, NullLaw, ReferenceSample};
use crate::resample::{run_replicates, BootstrapPlan, ReplicateRng, Workers};

use rand::Rng;

use super::{Method, StandardizedSample, TestResult};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsOptions {
    pub replicates: usize,
    pub seed: u64,
    pub workers: Workers,
    /// Highest harmonic degree, 1..=4.
    pub max_degree: usize,
}

impl Default for KsOptions {
    fn default() -> Self {
        KsOptions {
            replicates: 1000,
            seed: 1,
            workers: Workers::AllButOne,
            max_degree: MAX_DEGREE,
        }
    }
}

struct Fit {
    location: Location,
    scatter: Scatter,
    standardized: StandardizedSample,
}

fn fit(x: &Sample) -> Result<Fit> {
    let location = sample_mean(x);
    let scatter = sample_cov(x, Denominator::N)?;
    let root = sym_inv_sqrt(&scatter)?;
    let standardized = StandardizedSample::new(x, &location, &root)?;
    Ok(Fit {
        location,
        scatter,
        standardized,
    })
}

fn statistic_of(std: &StandardizedSample, max_degree: usize) -> Result<f64> {
    let n = std.n();
    let basis = build_basis(std.dim(), max_degree)?;
    let directions = std.directions()?;

    let mut order: Vec<usize> = (0..n).collect();
    // stable: equal norms keep their original order
    order.sort_by(|&a, &b| std.norms()[a].total_cmp(&std.norms()[b]));
    let sorted = Matrix::from_fn(n, std.dim(), |i, j| directions[(order[i], j)]);
    let psi = basis.eval_rows(&sorted);

    // ψ₁ ≡ 1 integrates to 1 over the sphere, every other ψ to 0; the
    // centered partial sums therefore drop the constant term.
    let m = basis.len();
    let mut partial = vec![0.0; m];
    let mut best = 0.0f64;
    for row in psi.row_iter() {
        for (s, acc) in partial.iter_mut().enumerate() {
            let centre = if s == 0 { 1.0 } else { 0.0 };
            *acc += row[s] - centre;
        }
        let norm2: f64 = partial.iter().map(|v| v * v).sum();
        best = best.max(norm2);
    }
    Ok(best.sqrt() / (n as f64).sqrt())
}

/// Q_KS for the sample, with harmonics up to `max_degree`.
pub fn ks_statistic(x: &Sample, max_degree: usize) -> Result<f64> {
    statistic_of(&fit(x)?.standardized, max_degree)
}

/// Null-mimicking resample: radii drawn from the observed ‖Yᵢ‖ with
/// replacement, directions uniform, mapped back through θ̂ + Σ̂^{1/2}(·).
pub(crate) fn null_resample(
    norms: &[f64],
    location: &Location,
    scatter_root: &Matrix,
    rng: &mut ReplicateRng,
) -> Result<Sample> {
    let n = norms.len();
    let d = location.dim();
    let mut z = uniform_sphere_rows(n, d, rng);
    for mut row in z.row_iter_mut() {
        let r = norms[rng.random_range(0..n)];
        row *= r;
    }
    let mut x = z * scatter_root.transpose();
    let t = location.vector().transpose();
    for mut row in x.row_iter_mut() {
        row += &t;
    }
    Sample::new(x)
}

pub fn ks_test(x: &Sample, opts: &KsOptions) -> Result<TestResult> {
    if !(1..=MAX_DEGREE).contains(&opts.max_degree) {
        return Err(Error::usage(format!(
            "harmonic degree must be in 1..={MAX_DEGREE}, got {}",
            opts.max_degree
        )));
    }
    let plan = BootstrapPlan::new(opts.replicates, opts.seed, opts.workers)?;
    let fitted = fit(x)?;
    let statistic = statistic_of(&fitted.standardized, opts.max_degree)?;

    let root = sym_sqrt(&fitted.scatter)?;
    let norms = fitted.standardized.norms().to_vec();
    let reference = run_replicates(
        &plan,
        |_, rng| null_resample(&norms, &fitted.location, &root, rng),
        |sample| ks_statistic(sample, opts.max_degree),
    )?;
    let law = NullLaw::Bootstrap(ReferenceSample::new(reference)?);
    let p = pvalue(&law, statistic);

    let d = x.dim();
    let basis_size: usize = (0..=opts.max_degree).map(|k| dim_h(d, k)).sum();
    let mut result = TestResult::new(Method::KoltchinskiiSakhanenko, statistic, p, law.descriptor())?
        .with("R", opts.replicates)
        .with("seed", opts.seed)
        .with("degree", opts.max_degree);
    if x.n() <= basis_size {
        result = result.with(
            "warning",
            format!(
                "n = {} does not exceed the number of harmonics ({basis_size})",
                x.n()
            ),
        );
    }
    Ok(result)
}
