//! Boundary and junction fluxes of the Godunov scheme.

use serde::{Deserialize, Serialize};

use crate::diagram::FundamentalDiagram;

/// Density and commodity-1 share of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellState {
    pub density: f64,
    /// Fraction of the vehicles in the cell that belong to commodity 1.
    pub commodity1: f64,
}

impl CellState {
    pub fn new(density: f64, commodity1: f64) -> Self {
        Self {
            density,
            commodity1,
        }
    }

    pub fn commodity1_density(&self) -> f64 {
        self.density * self.commodity1
    }
}

/// Flux between two adjacent cells: `min{D(up), S(down)}`, with the
/// commodity-1 share taken from the upstream cell.
pub fn link_flux(
    up: CellState,
    up_fd: &FundamentalDiagram,
    down: CellState,
    down_fd: &FundamentalDiagram,
) -> (f64, f64) {
    let q = up_fd
        .demand_unchecked(up.density)
        .min(down_fd.supply_unchecked(down.density));
    (q, up.commodity1 * q)
}

/// FIFO diverge: returns `(q0, q1, q2)` with `q1 = xi q0`. A branch that
/// receives nothing (`xi` of 0 or 1) does not constrain the flow.
pub fn diverge_flux(d0: f64, s1: f64, s2: f64, xi: f64) -> (f64, f64, f64) {
    let mut q0 = d0;
    if xi > 0.0 {
        q0 = q0.min(s1 / xi);
    }
    if xi < 1.0 {
        q0 = q0.min(s2 / (1.0 - xi));
    }
    let q1 = xi * q0;
    (q0, q1, q0 - q1)
}

/// Priority merge with merging ratio `beta` for approach 1: returns
/// `(q3, q1, q2)`.
pub fn merge_flux(d1: f64, d2: f64, s3: f64, beta: f64) -> (f64, f64, f64) {
    let q1 = d1.min((s3 - d2).max(beta * s3));
    let q2 = d2.min((s3 - d1).max((1.0 - beta) * s3));
    (q1 + q2, q1, q2)
}
