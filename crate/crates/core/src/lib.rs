//! Numerical toolkit for the double coset space H\G/K of a reductive matrix
//! group G with commuting involutions.
//!
//! Given a matrix group with involutions (sigma, theta, delta, phi) the crate
//! computes closed-orbit representatives via gradient flow of the moment-map
//! norm square, membership in the Kempf-Ness set, transversal slices, the
//! maximal compact split torus with its twisted Weyl group, the isotropy
//! stratification of that torus, and a minimal collection of translated tori
//! covering the quotient.
//!
//! The layering is bottom-up:
//!
//! * [`linalg`] - dense complex matrix and Lie-algebra coordinate primitives,
//! * [`setup`] - validated group data and eigenspace decompositions,
//! * [`coset`] - the coset manifold X = beta(G), transversals, principal points,
//! * [`moment`] - moment map, Kempf-Ness membership, gradient flow, orbit closedness,
//! * [`atlas`] - tori, Weyl tables, stratification, minimal torus collections,
//! * [`config`] / [`report`] / [`golden`] - JSON config, machine-readable reports,
//!   and the bundled fixture check suites driven by the `hgk` binary.

pub mod atlas;
pub mod cli;
pub mod config;
pub mod coset;
pub mod fixtures;
pub mod golden;
pub mod linalg;
pub mod moment;
pub mod report;
pub mod setup;

pub use config::{Config, ConfigError};
pub use coset::PointX;
pub use linalg::{CMat, Tol};
pub use setup::{GroupSpec, Structure};

/// Version string stamped into reports.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
