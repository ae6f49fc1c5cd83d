//! Huffer–Park Pearson chi-square test on sector × shell cells.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::estimators::{sample_cov, sample_mean, Denominator, Location, Sample};
use crate::linalg::{gram_schmidt_root, sym_sqrt, Scatter};
use crate::probdist::{pvalue, standard_normal_rows, NullLaw, ReferenceSample};
use crate::resample::{derive_seed, run_replicates, BootstrapPlan, Workers};

use super::ks::null_resample;
use super::{Method, StandardizedSample, TestResult};

/// How ℝᵈ is cut into congruent sectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SectorScheme {
    /// The 2ᵈ sign patterns; a zero coordinate counts as positive.
    Orthants,
    /// The d! coordinate orderings.
    Permutations,
    /// g equal polar-angle wedges, d = 2 only.
    BivariateAngles { g: usize },
}

impl SectorScheme {
    pub fn name(&self) -> &'static str {
        match self {
            SectorScheme::Orthants => "orthants",
            SectorScheme::Permutations => "permutations",
            SectorScheme::BivariateAngles { .. } => "bivariateangles",
        }
    }

    /// Number of sectors in dimension d.
    pub fn sectors(&self, d: usize) -> Result<usize> {
        match *self {
            SectorScheme::Orthants => {
                if d >= usize::BITS as usize - 1 {
                    return Err(Error::usage(format!("too many orthants in dimension {d}")));
                }
                Ok(1 << d)
            }
            SectorScheme::Permutations => (1..=d)
                .try_fold(1usize, |acc, k| acc.checked_mul(k))
                .ok_or_else(|| Error::usage(format!("too many permutations in dimension {d}"))),
            SectorScheme::BivariateAngles { g } => {
                if d != 2 {
                    return Err(Error::usage(format!(
                        "bivariate angle sectors need d = 2, got d = {d}"
                    )));
                }
                if g < 2 {
                    return Err(Error::usage(format!("need at least 2 angle sectors, got {g}")));
                }
                Ok(g)
            }
        }
    }

    fn sector_of(&self, y: &[f64]) -> usize {
        match *self {
            SectorScheme::Orthants => y
                .iter()
                .enumerate()
                .filter(|(_, &v)| v < 0.0)
                .fold(0, |acc, (j, _)| acc | (1 << j)),
            SectorScheme::Permutations => {
                let mut order: Vec<usize> = (0..y.len()).collect();
                order.sort_by(|&a, &b| y[a].total_cmp(&y[b]));
                lehmer_rank(&order)
            }
            SectorScheme::BivariateAngles { g } => {
                let mut angle = y[1].atan2(y[0]);
                if angle < 0.0 {
                    angle += 2.0 * PI;
                }
                ((angle * g as f64 / (2.0 * PI)).floor() as usize).min(g - 1)
            }
        }
    }
}

/// Rank of a permutation in lexicographic order.
fn lehmer_rank(perm: &[usize]) -> usize {
    let d = perm.len();
    let mut rank = 0;
    for i in 0..d {
        let smaller_after = perm[i + 1..].iter().filter(|&&p| p < perm[i]).count();
        rank = rank * (d - i) + smaller_after;
    }
    rank
}

/// Observed cell counts, indexed sector-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellPartition {
    pub scheme: SectorScheme,
    pub g: usize,
    pub c: usize,
    /// counts[s][k]: sector s, shell k (innermost shell 0).
    pub counts: Vec<Vec<usize>>,
}

impl CellPartition {
    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    /// Σ (U − np)²/(np) with p = 1/(gc).
    pub fn statistic(&self) -> f64 {
        let expected = self.total() as f64 / (self.g * self.c) as f64;
        self.counts
            .iter()
            .flatten()
            .map(|&u| (u as f64 - expected).powi(2) / expected)
            .sum()
    }
}

fn partition_of(std: &StandardizedSample, c: usize, scheme: SectorScheme) -> Result<CellPartition> {
    let n = std.n();
    let g = scheme.sectors(std.dim())?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| std.norms()[a].total_cmp(&std.norms()[b]));
    let mut counts = vec![vec![0usize; c]; g];
    let y = std.residuals();
    let mut buf = vec![0.0; std.dim()];
    for (rank, &i) in order.iter().enumerate() {
        let shell = rank * c / n;
        for (j, v) in buf.iter_mut().enumerate() {
            *v = y[(i, j)];
        }
        counts[scheme.sector_of(&buf)][shell] += 1;
    }
    Ok(CellPartition {
        scheme,
        g,
        c,
        counts,
    })
}

fn check_shells(c: usize) -> Result<()> {
    if c == 0 {
        return Err(Error::usage("the number of shells c must be at least 1"));
    }
    Ok(())
}

struct Fit {
    location: Location,
    covariance: Scatter,
    standardized: StandardizedSample,
}

fn fit(x: &Sample) -> Result<Fit> {
    let location = sample_mean(x);
    let covariance = sample_cov(x, Denominator::N)?;
    let root = gram_schmidt_root(&covariance)?;
    let standardized = StandardizedSample::new(x, &location, &root)?;
    Ok(Fit {
        location,
        covariance,
        standardized,
    })
}

/// Cell counts of the Gram–Schmidt standardized sample.
pub fn huffer_park_partition(x: &Sample, c: usize, scheme: SectorScheme) -> Result<CellPartition> {
    check_shells(c)?;
    partition_of(&fit(x)?.standardized, c, scheme)
}

pub fn huffer_park_statistic(x: &Sample, c: usize, scheme: SectorScheme) -> Result<f64> {
    Ok(huffer_park_partition(x, c, scheme)?.statistic())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HufferParkOptions {
    pub c: usize,
    pub scheme: SectorScheme,
    /// Bootstrap replicates; `None` selects the calibrated asymptotic law
    /// (orthants only).
    pub replicates: Option<usize>,
    pub seed: u64,
    pub workers: Workers,
}

impl HufferParkOptions {
    pub fn new(c: usize) -> Self {
        HufferParkOptions {
            c,
            scheme: SectorScheme::Orthants,
            replicates: None,
            seed: 1,
            workers: Workers::AllButOne,
        }
    }
}

/// Replicates used to calibrate the asymptotic orthant law.
pub const CALIBRATION_REPLICATES: usize = 2000;
const CALIBRATION_LABEL: u64 = 0x4850_6361_6c69_62;

type CalibrationKey = (usize, usize, usize, usize, u64);

fn calibration_cache() -> &'static Mutex<HashMap<CalibrationKey, ReferenceSample>> {
    static CACHE: OnceLock<Mutex<HashMap<CalibrationKey, ReferenceSample>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Statistic simulated under N(0, I_d) with the same n, d and c.
fn orthant_calibration(n: usize, d: usize, c: usize, seed: u64, workers: Workers) -> Result<ReferenceSample> {
    let key = (n, d, c, CALIBRATION_REPLICATES, seed);
    if let Some(r) = calibration_cache().lock().unwrap().get(&key) {
        return Ok(r.clone());
    }
    let plan = BootstrapPlan::new(CALIBRATION_REPLICATES, derive_seed(seed, CALIBRATION_LABEL), workers)?;
    let values = run_replicates(
        &plan,
        |_, rng| Sample::new(standard_normal_rows(n, d, rng)),
        |s| huffer_park_statistic(s, c, SectorScheme::Orthants),
    )?;
    let reference = ReferenceSample::new(values)?;
    calibration_cache()
        .lock()
        .unwrap()
        .insert(key, reference.clone());
    Ok(reference)
}

pub fn huffer_park_test(x: &Sample, opts: &HufferParkOptions) -> Result<TestResult> {
    check_shells(opts.c)?;
    let (n, d) = (x.n(), x.dim());
    let g = opts.scheme.sectors(d)?;
    if opts.replicates.is_none() && opts.scheme != SectorScheme::Orthants {
        return Err(Error::usage(format!(
            "{} sectors have no asymptotic law; give a number of bootstrap replicates",
            opts.scheme.name()
        )));
    }
    let fitted = fit(x)?;
    let statistic = partition_of(&fitted.standardized, opts.c, opts.scheme)?.statistic();

    let law = match opts.replicates {
        Some(r) => {
            let plan = BootstrapPlan::new(r, opts.seed, opts.workers)?;
            let root = sym_sqrt(&fitted.covariance)?;
            let norms = fitted.standardized.norms().to_vec();
            let values = run_replicates(
                &plan,
                |_, rng| null_resample(&norms, &fitted.location, &root, rng),
                |s| huffer_park_statistic(s, opts.c, opts.scheme),
            )?;
            NullLaw::Bootstrap(ReferenceSample::new(values)?)
        }
        None => NullLaw::MonteCarlo(orthant_calibration(n, d, opts.c, opts.seed, opts.workers)?),
    };
    let p = pvalue(&law, statistic);

    let mut result = TestResult::new(Method::HufferPark, statistic, p, law.descriptor())?
        .with("c", opts.c)
        .with("sector", opts.scheme.name())
        .with("g", g)
        .with("seed", opts.seed);
    if let Some(r) = opts.replicates {
        result = result.with("R", r);
    }
    if (g * opts.c) as f64 > n as f64 / 5.0 {
        result = result.with(
            "warning",
            format!(
                "average cell count n/(gc) = {:.2} is below 5",
                n as f64 / (g * opts.c) as f64
            ),
        );
    }
    Ok(result)
}
