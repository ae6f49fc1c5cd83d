//! The six tests for elliptical symmetry.

mod huffer_park;
mod ks;
mod mpq;
mod pseudo_gaussian;
mod schott;
mod skew_optimal;

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{centered, Location, Sample};
use crate::linalg::Matrix;
use crate::probdist::NullLawDescriptor;

pub use huffer_park::{
    huffer_park_partition, huffer_park_statistic, huffer_park_test, CellPartition, HufferParkOptions,
    SectorScheme,
};
pub use ks::{ks_statistic, ks_test, KsOptions};
pub use mpq::{mpq_statistic, mpq_test, mpq_degrees_of_freedom};
pub use pseudo_gaussian::{
    pseudo_gaussian_components, pseudo_gaussian_specified_naive, pseudo_gaussian_test, c_d,
    PseudoGaussianComponents, PseudoGaussianOptions,
};
pub use schott::{schott_degrees_of_freedom, schott_moments, schott_test, SchottMoments};
pub use skew_optimal::{
    skew_optimal_components, skew_optimal_test, SkewOptimalComponents, SkewOptimalOptions,
    STANDARD_NORMAL_DENSITY_AT_ZERO,
};

/// Which test produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Method {
    KoltchinskiiSakhanenko,
    #[serde(rename = "MPQ")]
    Mpq,
    Schott,
    HufferPark,
    PseudoGaussian,
    SkewOptimal,
}

impl Method {
    /// Heading line of the text report.
    pub fn title(&self) -> &'static str {
        match self {
            Method::KoltchinskiiSakhanenko => {
                "Test for elliptical symmetry by Koltchinskii and Sakhanenko"
            }
            Method::Mpq => "Test for elliptical symmetry by Manzotti et al.",
            Method::Schott => "Schott test for elliptical symmetry",
            Method::HufferPark => "Test for elliptical symmetry by Huffer and Park",
            Method::PseudoGaussian => "Pseudo-Gaussian test for elliptical symmetry",
            Method::SkewOptimal => "SkewOptimal test for elliptical symmetry",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::KoltchinskiiSakhanenko => "KoltchinskiiSakhanenko",
            Method::Mpq => "MPQ",
            Method::Schott => "Schott",
            Method::HufferPark => "HufferPark",
            Method::PseudoGaussian => "PseudoGaussian",
            Method::SkewOptimal => "SkewOptimal",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ParamValue {
    Int(i64),
    Real(f64),
    Text(String),
    Reals(Vec<f64>),
}

impl From<usize> for ParamValue {
    fn from(v: usize) -> Self {
        ParamValue::Int(v as i64)
    }
}

impl From<u64> for ParamValue {
    fn from(v: u64) -> Self {
        ParamValue::Int(v as i64)
    }
}

impl From<f64> for ParamValue {
    fn from(v: f64) -> Self {
        ParamValue::Real(v)
    }
}

impl From<&str> for ParamValue {
    fn from(v: &str) -> Self {
        ParamValue::Text(v.to_string())
    }
}

impl From<String> for ParamValue {
    fn from(v: String) -> Self {
        ParamValue::Text(v)
    }
}

/// Outcome of one test on one sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    pub method: Method,
    pub statistic: f64,
    pub p_value: f64,
    pub null_law: NullLawDescriptor,
    pub params: BTreeMap<String, ParamValue>,
}

impl TestResult {
    pub(crate) fn new(
        method: Method,
        statistic: f64,
        p_value: f64,
        null_law: NullLawDescriptor,
    ) -> Result<Self> {
        if !statistic.is_finite() {
            return Err(Error::numeric(format!("{method} statistic is not finite")));
        }
        // rounding can push a zero quadratic form a hair below 0
        let statistic = if statistic < 0.0 && statistic > -1e-12 { 0.0 } else { statistic };
        if statistic < 0.0 {
            return Err(Error::numeric(format!(
                "{method} statistic is negative ({statistic})"
            )));
        }
        Ok(TestResult {
            method,
            statistic,
            p_value: p_value.clamp(f64::MIN_POSITIVE, 1.0),
            null_law,
            params: BTreeMap::new(),
        })
    }

    pub(crate) fn with(mut self, key: &str, value: impl Into<ParamValue>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn param(&self, key: &str) -> Option<&ParamValue> {
        self.params.get(key)
    }
}

/// Residuals Yᵢ = R(Xᵢ − θ) with their norms.
#[derive(Debug, Clone)]
pub struct StandardizedSample {
    y: Matrix,
    norms: Vec<f64>,
}

/// Norms below this are treated as zero when a direction is needed.
pub const ZERO_NORM: f64 = 1e-12;

impl StandardizedSample {
    /// Standardizes `x` about `location` with the matrix `root`.
    pub fn new(x: &Sample, location: &Location, root: &Matrix) -> Result<Self> {
        location.check_dim(x.dim())?;
        let y = centered(x, location) * root.transpose();
        let norms = y.row_iter().map(|r| r.norm()).collect();
        Ok(StandardizedSample { y, norms })
    }

    pub fn residuals(&self) -> &Matrix {
        &self.y
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    pub fn n(&self) -> usize {
        self.y.nrows()
    }

    pub fn dim(&self) -> usize {
        self.y.ncols()
    }

    /// Unit directions Uᵢ = Yᵢ/‖Yᵢ‖ as rows; fails if some residual vanishes.
    pub fn directions(&self) -> Result<Matrix> {
        let mut u = self.y.clone();
        for (i, (mut row, &r)) in u.row_iter_mut().zip(&self.norms).enumerate() {
            if r < ZERO_NORM {
                return Err(Error::domain(format!(
                    "standardized observation {} is at the origin; its direction is undefined",
                    i + 1
                )));
            }
            row /= r;
        }
        Ok(u)
    }
}
