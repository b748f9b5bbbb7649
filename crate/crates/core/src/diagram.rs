//! Fundamental diagrams and the demand/supply decomposition.
//!
//! Every flux in the simulator is built from `demand(k) = Q(min{k_c, k})`
//! and `supply(k) = Q(max{k_c, k})`. A demand/supply pair determines the
//! density uniquely, which is what [`FundamentalDiagram::state_to_density`]
//! inverts.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Shape of a concave flow-density relation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    /// `Q(k) = min{vf k, w (kj - k)}`.
    Triangular {
        free_flow_speed: f64,
        congested_wave_speed: f64,
        jam_density: f64,
    },
    /// `Q(k) = vf k (1 - k / kj)`.
    Greenshields { free_flow_speed: f64, jam_density: f64 },
}

/// A unimodal fundamental diagram together with its derived capacity and
/// critical density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FundamentalDiagram {
    shape: Shape,
    capacity: f64,
    critical_density: f64,
}

/// A traffic state in demand-supply space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficState {
    pub demand: f64,
    pub supply: f64,
}

impl TrafficState {
    pub fn new(demand: f64, supply: f64) -> Self {
        Self { demand, supply }
    }

    pub fn flow(&self) -> f64 {
        self.demand.min(self.supply)
    }
}

fn positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        domain(format!("{name} must be positive and finite, got {value}"))
    }
}

impl FundamentalDiagram {
    pub fn triangular(free_flow_speed: f64, congested_wave_speed: f64, jam_density: f64) -> Result<Self> {
        positive("free_flow_speed", free_flow_speed)?;
        positive("congested_wave_speed", congested_wave_speed)?;
        positive("jam_density", jam_density)?;
        let critical_density =
            congested_wave_speed * jam_density / (free_flow_speed + congested_wave_speed);
        Ok(Self {
            shape: Shape::Triangular {
                free_flow_speed,
                congested_wave_speed,
                jam_density,
            },
            capacity: free_flow_speed * critical_density,
            critical_density,
        })
    }

    /// Triangular diagram parameterized by capacity; jam density is derived
    /// as `C / vf + C / w`.
    pub fn triangular_from_capacity(
        capacity: f64,
        free_flow_speed: f64,
        congested_wave_speed: f64,
    ) -> Result<Self> {
        positive("capacity", capacity)?;
        positive("free_flow_speed", free_flow_speed)?;
        positive("congested_wave_speed", congested_wave_speed)?;
        let critical_density = capacity / free_flow_speed;
        Ok(Self {
            shape: Shape::Triangular {
                free_flow_speed,
                congested_wave_speed,
                jam_density: critical_density + capacity / congested_wave_speed,
            },
            capacity,
            critical_density,
        })
    }

    pub fn greenshields(free_flow_speed: f64, jam_density: f64) -> Result<Self> {
        positive("free_flow_speed", free_flow_speed)?;
        positive("jam_density", jam_density)?;
        Ok(Self {
            shape: Shape::Greenshields {
                free_flow_speed,
                jam_density,
            },
            capacity: free_flow_speed * jam_density / 4.0,
            critical_density: jam_density / 2.0,
        })
    }

    /// Greenshields diagram with the given capacity; `kj = 4 C / vf`.
    pub fn greenshields_from_capacity(capacity: f64, free_flow_speed: f64) -> Result<Self> {
        positive("capacity", capacity)?;
        Self::greenshields(free_flow_speed, 4.0 * capacity / free_flow_speed)
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn critical_density(&self) -> f64 {
        self.critical_density
    }

    pub fn jam_density(&self) -> f64 {
        match self.shape {
            Shape::Triangular { jam_density, .. } | Shape::Greenshields { jam_density, .. } => {
                jam_density
            }
        }
    }

    pub fn free_flow_speed(&self) -> f64 {
        match self.shape {
            Shape::Triangular { free_flow_speed, .. }
            | Shape::Greenshields { free_flow_speed, .. } => free_flow_speed,
        }
    }

    /// Largest characteristic speed magnitude in congested traffic.
    ///
    /// For Greenshields this is `|Q'(kj)| = vf`.
    pub fn congested_wave_speed(&self) -> f64 {
        match self.shape {
            Shape::Triangular {
                congested_wave_speed,
                ..
            } => congested_wave_speed,
            Shape::Greenshields { free_flow_speed, .. } => free_flow_speed,
        }
    }

    fn check_density(&self, k: f64) -> Result<()> {
        let kj = self.jam_density();
        if k.is_finite() && k >= -crate::EPS && k <= kj + crate::EPS {
            Ok(())
        } else {
            domain(format!("density {k} outside [0, {kj}]"))
        }
    }

    /// Raw flow-density relation; no range check, clamps to [0, kj].
    pub(crate) fn flow_unchecked(&self, k: f64) -> f64 {
        let k = k.clamp(0.0, self.jam_density());
        match self.shape {
            Shape::Triangular {
                free_flow_speed,
                congested_wave_speed,
                jam_density,
            } => (free_flow_speed * k).min(congested_wave_speed * (jam_density - k)),
            Shape::Greenshields {
                free_flow_speed,
                jam_density,
            } => free_flow_speed * k * (1.0 - k / jam_density),
        }
    }

    pub fn flow(&self, k: f64) -> Result<f64> {
        self.check_density(k)?;
        Ok(self.flow_unchecked(k))
    }

    pub(crate) fn demand_unchecked(&self, k: f64) -> f64 {
        if k >= self.critical_density {
            self.capacity
        } else {
            self.flow_unchecked(k)
        }
    }

    pub(crate) fn supply_unchecked(&self, k: f64) -> f64 {
        if k <= self.critical_density {
            self.capacity
        } else {
            self.flow_unchecked(k)
        }
    }

    /// Sending flow `Q(min{k_c, k})`.
    pub fn demand(&self, k: f64) -> Result<f64> {
        self.check_density(k)?;
        Ok(self.demand_unchecked(k))
    }

    /// Receiving flow `Q(max{k_c, k})`.
    pub fn supply(&self, k: f64) -> Result<f64> {
        self.check_density(k)?;
        Ok(self.supply_unchecked(k))
    }

    pub fn state(&self, k: f64) -> Result<TrafficState> {
        self.check_density(k)?;
        Ok(TrafficState::new(self.demand_unchecked(k), self.supply_unchecked(k)))
    }

    fn check_flow(&self, q: f64) -> Result<()> {
        if q.is_finite() && q >= -crate::EPS && q <= self.capacity + crate::EPS {
            Ok(())
        } else {
            domain(format!("flow {q} outside [0, {}]", self.capacity))
        }
    }

    /// The under-critical density carrying flow `q`.
    pub fn under_critical_density(&self, q: f64) -> Result<f64> {
        self.check_flow(q)?;
        let q = q.clamp(0.0, self.capacity);
        Ok(match self.shape {
            Shape::Triangular { free_flow_speed, .. } => q / free_flow_speed,
            Shape::Greenshields { jam_density, .. } => {
                0.5 * jam_density * (1.0 - (1.0 - q / self.capacity).max(0.0).sqrt())
            }
        })
    }

    /// The over-critical density carrying flow `q`.
    pub fn over_critical_density(&self, q: f64) -> Result<f64> {
        self.check_flow(q)?;
        let q = q.clamp(0.0, self.capacity);
        Ok(match self.shape {
            Shape::Triangular {
                congested_wave_speed,
                jam_density,
                ..
            } => jam_density - q / congested_wave_speed,
            Shape::Greenshields { jam_density, .. } => {
                0.5 * jam_density * (1.0 + (1.0 - q / self.capacity).max(0.0).sqrt())
            }
        })
    }

    /// Inverts a demand/supply pair: under-critical branch when `d <= s`,
    /// over-critical branch otherwise.
    pub fn state_to_density(&self, u: TrafficState) -> Result<f64> {
        let c = self.capacity;
        if u.demand < -crate::EPS || u.supply < -crate::EPS {
            return domain(format!("negative demand/supply ({}, {})", u.demand, u.supply));
        }
        if (u.demand.max(u.supply) - c).abs() > crate::EPS * c.max(1.0) {
            return domain(format!(
                "inconsistent state ({}, {}): neither equals capacity {c}",
                u.demand, u.supply
            ));
        }
        if u.demand <= u.supply {
            self.under_critical_density(u.demand)
        } else {
            self.over_critical_density(u.supply)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri() -> FundamentalDiagram {
        FundamentalDiagram::triangular(1.0, 0.5, 3.0).unwrap()
    }

    fn gs() -> FundamentalDiagram {
        FundamentalDiagram::greenshields(1.0, 4.0).unwrap()
    }

    #[test]
    fn triangular_derived_quantities() {
        let fd = tri();
        assert_eq!(fd.critical_density(), 1.0);
        assert_eq!(fd.capacity(), 1.0);
        let from_cap = FundamentalDiagram::triangular_from_capacity(1.0, 1.0, 0.5).unwrap();
        assert_eq!(from_cap.jam_density(), 3.0);
        assert_eq!(from_cap.critical_density(), 1.0);
    }

    #[test]
    fn demand_examples() {
        assert_eq!(tri().demand(0.0).unwrap(), 0.0);
        assert_eq!(tri().demand(3.0).unwrap(), 1.0);
        assert_eq!(gs().demand(2.0).unwrap(), 1.0);
    }

    #[test]
    fn supply_examples() {
        assert_eq!(tri().supply(0.0).unwrap(), 1.0);
        assert_eq!(tri().supply(3.0).unwrap(), 0.0);
        assert!((gs().supply(3.0).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_density_is_rejected() {
        assert!(matches!(tri().demand(-0.5), Err(crate::Error::Domain(_))));
        assert!(matches!(tri().supply(3.5), Err(crate::Error::Domain(_))));
        assert!(tri().flow(f64::NAN).is_err());
    }

    #[test]
    fn state_to_density_examples() {
        let fd = tri();
        assert_eq!(fd.state_to_density(TrafficState::new(1.0, 1.0)).unwrap(), 1.0);
        assert_eq!(fd.state_to_density(TrafficState::new(0.5, 1.0)).unwrap(), 0.5);
        assert_eq!(fd.state_to_density(TrafficState::new(1.0, 0.5)).unwrap(), 2.0);
        assert!(fd.state_to_density(TrafficState::new(0.5, 0.5)).is_err());
    }

    #[test]
    fn endpoints_and_peak() {
        for fd in [tri(), gs()] {
            assert_eq!(fd.flow(0.0).unwrap(), 0.0);
            assert!(fd.flow(fd.jam_density()).unwrap().abs() < 1e-15);
            assert!((fd.flow(fd.critical_density()).unwrap() - fd.capacity()).abs() < 1e-15);
        }
    }

    #[test]
    fn dense_grid_monotonicity_and_recovery() {
        for fd in [tri(), gs()] {
            let kj = fd.jam_density();
            let mut prev = fd.state(0.0).unwrap();
            for i in 0..=1000 {
                let k = kj * i as f64 / 1000.0;
                let u = fd.state(k).unwrap();
                assert!(u.demand >= prev.demand - 1e-15, "demand decreased at {k}");
                assert!(u.supply <= prev.supply + 1e-15, "supply increased at {k}");
                assert!((u.demand.max(u.supply) - fd.capacity()).abs() <= 1e-12);
                assert!((u.flow() - fd.flow(k).unwrap()).abs() <= 1e-12);
                assert!(fd.flow(k).unwrap() <= fd.capacity() + 1e-15);
                prev = u;
            }
        }
    }

    #[test]
    fn triangular_round_trip_is_exact_to_tolerance() {
        let fd = tri();
        for i in 0..=1000 {
            let k = 3.0 * i as f64 / 1000.0;
            let back = fd.state_to_density(fd.state(k).unwrap()).unwrap();
            assert!((back - k).abs() <= 1e-12, "k={k} back={back}");
        }
    }

    #[test]
    fn greenshields_round_trip() {
        // The inverse is ill-conditioned at k_c (Q'(k_c) = 0), so the tight
        // tolerance applies away from the peak.
        let fd = gs();
        for i in 0..=1000 {
            let k = 4.0 * i as f64 / 1000.0;
            let back = fd.state_to_density(fd.state(k).unwrap()).unwrap();
            let tol = if (k - 2.0).abs() > 0.004 { 1e-12 } else { 1e-6 };
            assert!((back - k).abs() <= tol, "k={k} back={back}");
        }
    }
}
