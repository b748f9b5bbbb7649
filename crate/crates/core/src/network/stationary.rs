//! Stationary states of the DM network and their density profiles.
//!
//! Under constant boundary conditions (origin demand `C0`, destination
//! supply `C3`, route proportion `xi`) link 0 is over-critical at `(C0, q)`,
//! link 3 is under-critical at `(q, C3)`, and links 1 and 2 carry `xi q` and
//! `(1 - xi) q`. Each intermediate link is in one of four stationary
//! regimes; the admissible combinations depend on which part of the network
//! is the bottleneck.

use serde::{Deserialize, Serialize};

use super::DmSpec;
use crate::diagram::FundamentalDiagram;
use crate::error::{domain, Result};
use crate::{approx_eq, le, lt};

/// Stationary regime of one intermediate link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinkRegime {
    /// Critical: flow equals capacity, any congested fraction.
    C,
    /// Strictly under-critical everywhere.
    Suc,
    /// Strictly over-critical everywhere.
    Soc,
    /// Zero-speed shock: under-critical upstream, over-critical downstream.
    Zs,
}

impl LinkRegime {
    pub fn label(&self) -> &'static str {
        match self {
            LinkRegime::C => "C",
            LinkRegime::Suc => "SUC",
            LinkRegime::Soc => "SOC",
            LinkRegime::Zs => "ZS",
        }
    }

    /// Admissible congested fractions `l` for this regime.
    pub fn fraction_range(&self) -> FractionRange {
        match self {
            LinkRegime::C => FractionRange::Closed(0.0, 1.0),
            LinkRegime::Suc => FractionRange::Exactly(0.0),
            LinkRegime::Soc => FractionRange::Exactly(1.0),
            LinkRegime::Zs => FractionRange::Open(0.0, 1.0),
        }
    }
}

impl std::fmt::Display for LinkRegime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Set of congested fractions allowed by a regime. ZS leaves `l` free on
/// the open interval; no canonical value is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FractionRange {
    Exactly(f64),
    Open(f64, f64),
    Closed(f64, f64),
}

impl FractionRange {
    pub fn contains(&self, l: f64) -> bool {
        match *self {
            FractionRange::Exactly(v) => l == v,
            FractionRange::Open(a, b) => l > a && l < b,
            FractionRange::Closed(a, b) => l >= a && l <= b,
        }
    }
}

/// One row alternative of the stationary-state catalog.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryState {
    pub link1: LinkRegime,
    pub link2: LinkRegime,
    /// Total stationary flow through links 0 and 3.
    pub q: f64,
}

impl StationaryState {
    fn new(link1: LinkRegime, link2: LinkRegime, q: f64) -> Self {
        Self { link1, link2, q }
    }

    pub fn label(&self) -> String {
        format!("{}-{}", self.link1, self.link2)
    }

    /// Flows `(xi q, (1 - xi) q)` on links 1 and 2.
    pub fn link_flows(&self, xi: f64) -> (f64, f64) {
        (xi * self.q, (1.0 - xi) * self.q)
    }
}

use LinkRegime::{Soc, Suc, Zs, C};

fn product(out: &mut Vec<StationaryState>, l1: &[LinkRegime], l2: &[LinkRegime], q: f64) {
    for &a in l1 {
        for &b in l2 {
            out.push(StationaryState::new(a, b, q));
        }
    }
}

/// Which part of the DM network limits the stationary flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum CapacityCase {
    /// `C0 < min{C1 + C2, C3}`.
    Upstream,
    /// `C1 + C2 <= min{C0, C3}`.
    Middle,
    /// `C3 = C0 < C1 + C2`.
    DownstreamEqual,
    /// `C3 < min{C0, C1 + C2}`.
    Downstream,
}

pub(crate) fn capacity_case(s: &DmSpec) -> CapacityCase {
    let middle = s.c1 + s.c2;
    if lt(s.c0, middle.min(s.c3)) {
        CapacityCase::Upstream
    } else if le(middle, s.c0.min(s.c3)) {
        CapacityCase::Middle
    } else if approx_eq(s.c3, s.c0) {
        CapacityCase::DownstreamEqual
    } else {
        CapacityCase::Downstream
    }
}

/// Every stationary state admissible for `spec`.
///
/// Rows where the catalog lists alternatives (boundary values of `xi`,
/// `xi = beta`, or several regimes on one link) return all of them.
pub fn stationary_states(spec: &DmSpec) -> Vec<StationaryState> {
    let (c0, c1, c2, c3, beta, xi) = (spec.c0, spec.c1, spec.c2, spec.c3, spec.beta, spec.xi);
    let mut out = Vec::new();
    match capacity_case(spec) {
        CapacityCase::Upstream => {
            if le(xi, 1.0 - c2 / c0) {
                product(&mut out, &[Suc], &[C], c2 / (1.0 - xi));
            } else if lt(xi, c1 / c0) {
                product(&mut out, &[Suc], &[Suc], c0);
            } else {
                product(&mut out, &[C], &[Suc], c1 / xi);
            }
        }
        CapacityCase::Middle => {
            let split = c1 / (c1 + c2);
            if approx_eq(xi, split) {
                product(&mut out, &[C], &[C], c1 / xi);
            } else if xi < split {
                product(&mut out, &[Suc], &[C], c2 / (1.0 - xi));
            } else {
                product(&mut out, &[C], &[Suc], c1 / xi);
            }
        }
        case @ (CapacityCase::DownstreamEqual | CapacityCase::Downstream) => {
            let lo = spec.xi_lower();
            let hi = spec.xi_upper();
            let at_beta = approx_eq(xi, beta);
            if lt(xi, lo) {
                product(&mut out, &[Suc], &[C], c2 / (1.0 - xi));
            } else if approx_eq(xi, lo) {
                if lt(xi, beta) {
                    product(&mut out, &[Suc], &[C], c3);
                } else {
                    product(&mut out, &[Suc, Soc, Zs], &[C], c3);
                }
            } else if lt(xi, hi) {
                let equal = case == CapacityCase::DownstreamEqual;
                match (equal, at_beta, xi < beta) {
                    (true, false, true) => product(&mut out, &[Suc], &[Suc, Soc, Zs], c3),
                    (true, true, _) => product(&mut out, &[Suc, Soc, Zs], &[Suc, Soc, Zs], c3),
                    (true, false, false) => product(&mut out, &[Suc, Soc, Zs], &[Suc], c3),
                    (false, false, true) => product(&mut out, &[Suc], &[Soc], c3),
                    (false, true, _) => {
                        product(&mut out, &[Soc], &[Suc, Soc, Zs], c3);
                        product(&mut out, &[Suc, Zs], &[Soc], c3);
                    }
                    (false, false, false) => product(&mut out, &[Soc], &[Suc], c3),
                }
            } else if approx_eq(xi, hi) {
                if le(xi, beta) {
                    product(&mut out, &[C], &[Suc, Soc, Zs], c3);
                } else {
                    product(&mut out, &[C], &[Suc], c3);
                }
            } else {
                product(&mut out, &[C], &[Suc], c1 / xi);
            }
        }
    }
    out
}

/// A piecewise-constant stationary density profile on one link:
/// under-critical on `[0, split)`, over-critical on `[split, length]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkProfile {
    pub under_density: f64,
    pub over_density: f64,
    /// Position `(1 - l) X` of the zero-speed shock.
    pub split: f64,
    pub length: f64,
}

impl LinkProfile {
    pub fn density_at(&self, x: f64) -> f64 {
        if x < self.split {
            self.under_density
        } else {
            self.over_density
        }
    }

    pub fn total_vehicles(&self) -> f64 {
        self.under_density * self.split + self.over_density * (self.length - self.split)
    }

    /// Exact cell averages over `n` equal cells.
    pub fn cell_densities(&self, n: usize) -> Vec<f64> {
        let dx = self.length / n as f64;
        (0..n)
            .map(|i| {
                let a = i as f64 * dx;
                let b = a + dx;
                let under = (self.split.min(b) - a).clamp(0.0, dx);
                (self.under_density * under + self.over_density * (dx - under)) / dx
            })
            .collect()
    }

    /// Uniform profile at density `k`.
    pub fn uniform(k: f64, length: f64) -> Self {
        Self {
            under_density: k,
            over_density: k,
            split: length,
            length,
        }
    }
}

/// Stationary profile of one link carrying `flow` in `regime` with
/// congested fraction `l`.
pub fn link_profile(
    fd: &FundamentalDiagram,
    flow: f64,
    regime: LinkRegime,
    l: f64,
    length: f64,
) -> Result<LinkProfile> {
    if !regime.fraction_range().contains(l) {
        return domain(format!(
            "congested fraction {l} inconsistent with regime {regime} ({:?})",
            regime.fraction_range()
        ));
    }
    let cap = fd.capacity();
    let at_capacity = (flow - cap).abs() <= crate::EPS * cap.max(1.0);
    if regime == LinkRegime::C && !at_capacity {
        return domain(format!("regime C requires flow = capacity {cap}, got {flow}"));
    }
    if regime != LinkRegime::C && flow > cap + crate::EPS {
        return domain(format!("flow {flow} exceeds capacity {cap}"));
    }
    let flow = flow.min(cap);
    Ok(LinkProfile {
        under_density: fd.under_critical_density(flow)?,
        over_density: fd.over_critical_density(flow)?,
        split: (1.0 - l) * length,
        length,
    })
}

/// Density profiles of links 0 through 3 for a stationary state.
///
/// `l1` and `l2` are the congested fractions of links 1 and 2. Link 0 is
/// over-critical and link 3 under-critical throughout.
pub fn stationary_profile(
    spec: &DmSpec,
    ss: &StationaryState,
    l1: f64,
    l2: f64,
    diagrams: &[FundamentalDiagram; 4],
) -> Result<[LinkProfile; 4]> {
    let (q1, q2) = ss.link_flows(spec.xi);
    let x = spec.lengths;
    let over = |fd: &FundamentalDiagram, q: f64, len: f64| -> Result<LinkProfile> {
        Ok(LinkProfile::uniform(fd.over_critical_density(q.min(fd.capacity()))?, len))
    };
    let under = |fd: &FundamentalDiagram, q: f64, len: f64| -> Result<LinkProfile> {
        Ok(LinkProfile::uniform(fd.under_critical_density(q.min(fd.capacity()))?, len))
    };
    Ok([
        over(&diagrams[0], ss.q, x[0])?,
        link_profile(&diagrams[1], q1, ss.link1, l1, x[1])?,
        link_profile(&diagrams[2], q2, ss.link2, l2, x[2])?,
        under(&diagrams[3], ss.q, x[3])?,
    ])
}
