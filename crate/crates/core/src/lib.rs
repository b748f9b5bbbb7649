//! Kinematic-wave traffic dynamics on diverge-merge networks.
//!
//! The crate pairs a multi-commodity cell-transmission simulator with the
//! one-dimensional first-return map that governs the out-flux of the
//! congested intermediate link. Module overview:
//!
//! - [`diagram`]: fundamental diagrams and the demand/supply decomposition.
//! - [`network`]: DM specifications, the stationary-state catalog, density
//!   profiles, and flat network descriptions for DM, (DM)^n, and beltways.
//! - [`poincare`]: regime sets, the piecewise-linear map, fixed points,
//!   stability classes, and period-2 points.
//! - [`bifurcation`]: sweeps over the route-choice proportion.
//! - [`extended`]: the (DM)^n and beltway maps.
//! - [`ctm`]: the Godunov (cell-transmission) discretization.
//! - [`validation`]: oscillation detection and simulation-vs-map comparison.
//! - [`scenario`] and [`cli`]: scenario files and command implementations.

pub mod bifurcation;
pub mod cli;
pub mod ctm;
pub mod diagram;
pub mod error;
pub mod extended;
pub mod network;
pub mod piecewise;
pub mod poincare;
pub mod scenario;
pub mod validation;

pub use error::{Error, Result};

/// Absolute tolerance for comparisons of proportions and capacities.
///
/// Proportions live in [0, 1] and capacities are O(1) in scaled units, so
/// an absolute tolerance is adequate.
pub const EPS: f64 = 1e-12;

pub(crate) fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= EPS
}

/// `a < b` outside the tolerance band.
pub(crate) fn lt(a: f64, b: f64) -> bool {
    a < b - EPS
}

/// `a <= b` with the tolerance band counted as equality.
pub(crate) fn le(a: f64, b: f64) -> bool {
    a <= b + EPS
}
