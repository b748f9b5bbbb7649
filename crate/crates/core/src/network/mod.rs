//! Declarative network specifications.
//!
//! [`DmSpec`] fixes a diverge-merge (DM) instance: origin link 0 feeds a
//! FIFO diverge, route 1 uses link 1 and route 2 uses link 2, both rejoin at
//! a priority merge onto link 3. [`stationary`] holds the catalog of
//! stationary states and density profiles, [`topology`] the flat link and
//! junction lists consumed by the simulator.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

pub mod stationary;
pub mod topology;

pub use stationary::{
    stationary_profile, stationary_states, FractionRange, LinkProfile, LinkRegime,
    StationaryState,
};
pub use topology::{
    build_beltway, build_dm, build_dmn, BeltwayParams, DiagramParams, DmnParams, Junction, Link,
    Network, NetworkKind, ShapeKind, Split,
};

/// Capacities, merge priority, and route proportion of a DM network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DmSpec {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// Merge priority of link 1.
    pub beta: f64,
    /// Fraction of origin traffic taking route 1.
    pub xi: f64,
    /// Link lengths, used only by the simulator.
    #[serde(default = "default_lengths")]
    pub lengths: [f64; 4],
}

fn default_lengths() -> [f64; 4] {
    [1.0; 4]
}

impl DmSpec {
    pub fn new(c0: f64, c1: f64, c2: f64, c3: f64, beta: f64, xi: f64) -> Result<Self> {
        Self {
            c0,
            c1,
            c2,
            c3,
            beta,
            xi,
            lengths: default_lengths(),
        }
        .validated()
    }

    pub fn with_lengths(mut self, lengths: [f64; 4]) -> Result<Self> {
        self.lengths = lengths;
        self.validated()
    }

    pub fn with_xi(mut self, xi: f64) -> Result<Self> {
        self.xi = xi;
        self.validated()
    }

    pub fn validated(self) -> Result<Self> {
        for (name, c) in [("c0", self.c0), ("c1", self.c1), ("c2", self.c2), ("c3", self.c3)] {
            if !(c.is_finite() && c > 0.0) {
                return domain(format!("capacity {name} must be positive, got {c}"));
            }
        }
        for (name, p) in [("beta", self.beta), ("xi", self.xi)] {
            if !(0.0..=1.0).contains(&p) {
                return domain(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        if let Some(x) = self.lengths.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
            return domain(format!("link lengths must be positive, got {x}"));
        }
        Ok(self)
    }

    pub fn capacities(&self) -> [f64; 4] {
        [self.c0, self.c1, self.c2, self.c3]
    }

    /// Lower end `1 - C2/C3` of the open interval where both SOC-SUC and
    /// SUC-SOC can occur.
    pub fn xi_lower(&self) -> f64 {
        1.0 - self.c2 / self.c3
    }

    /// Upper end `C1/C3` of that interval.
    pub fn xi_upper(&self) -> f64 {
        self.c1 / self.c3
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_parameters() {
        assert!(DmSpec::new(0.0, 1.0, 1.0, 1.0, 0.5, 0.5).is_err());
        assert!(DmSpec::new(1.0, 1.0, 1.0, 1.0, 1.5, 0.5).is_err());
        assert!(DmSpec::new(1.0, 1.0, 1.0, 1.0, 0.5, -0.1).is_err());
        let ok = DmSpec::new(3.0, 1.0, 2.0, 2.0, 1.0 / 3.0, 0.45).unwrap();
        assert!(ok.with_lengths([1.0, 0.0, 1.0, 1.0]).is_err());
    }
}
