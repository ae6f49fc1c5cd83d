//! Hypothesis tests for elliptical symmetry of multivariate data.
//!
//! Six tests are provided, each returning a [`TestResult`]:
//! Koltchinskii–Sakhanenko ([`ks_test`]), Manzotti–Pérez–Quiroz ([`mpq_test`]),
//! Schott ([`schott_test`]), Huffer–Park ([`huffer_park_test`]),
//! Pseudo-Gaussian ([`pseudo_gaussian_test`]) and SkewOptimal
//! ([`skew_optimal_test`]). The supporting estimators, spherical harmonics,
//! null distributions and the replicate engine are public as well.
//!
//! Bootstrap and Monte Carlo replicates run on a rayon pool when the default
//! `parallel` feature is enabled and sequentially otherwise; results are
//! identical either way.

pub mod elltest;
pub mod error;
pub mod estimators;
pub mod harmonics;
pub mod linalg;
pub mod probdist;
pub mod resample;

pub use elltest::*;
pub use error::{Error, Result};
pub use estimators::{Location, Sample};
pub use linalg::{Matrix, Scatter, Vector};
