//! Exact Lipschitz-free space computations on finite pointed metric spaces.

#![allow(clippy::needless_range_loop, clippy::type_complexity)]

pub mod diametral;
pub mod error;
pub mod free;
pub mod io;
pub mod lip;
pub mod metric;
pub mod optimizer;
pub mod random;
pub mod report;
pub mod repro;
pub mod scalar;

pub use error::{Error, Result};
pub use free::{free_dist, free_norm, FreeElement, FreeNorm, Molecule};
pub use lip::{LipFunction, PointFunction};
pub use metric::FiniteMetricSpace;
pub use report::{CertificateReport, Check, Rel};
pub use scalar::{Float, Rational, Scalar};
