//! First-return map of the congested intermediate link.
//!
//! When the downstream link is the bottleneck, the out-flux `v` of link 1
//! at one return time determines the out-flux at the next through a
//! nonincreasing piecewise-linear map `F` on `[0, C3]`. Two branch forms
//! exist: one where link 1 carries the queue and one where link 2 does
//! (for the latter `v = C3 - v2`). This module classifies the parameter
//! regime, builds `F`, and reports fixed points, stability, and period-2
//! points.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::network::stationary::{capacity_case, CapacityCase};
use crate::network::{stationary_states, DmSpec};
use crate::piecewise::{PiecewiseLinear, Root};
use crate::{approx_eq, le, lt};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// `C0 < min{C1 + C2, C3}`: the origin link limits the flow.
    UpstreamBottleneck,
    /// `C1 + C2 <= min{C0, C3}`: the intermediate links limit the flow.
    MiddleBottleneck,
    /// Downstream bottleneck, queue on link 1 (`xi >= C1/C3`, or interior
    /// with `xi >= beta`), excluding the strict sub-case below.
    Xi1,
    /// Downstream bottleneck, queue on link 2, mirror of [`Regime::Xi1`].
    Xi2,
    /// Interior `xi` with `xi = beta`: both branch forms apply.
    Xi1Xi2Overlap,
    /// Interior, `C3 < C0`, `xi > beta`: link 1 congested, link 2 not,
    /// and the fixed point sits on the sloped piece of the map.
    TildeXi1,
    /// Interior, `C3 < C0`, `xi < beta`.
    TildeXi2,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::UpstreamBottleneck => "upstream_bottleneck",
            Regime::MiddleBottleneck => "middle_bottleneck",
            Regime::Xi1 => "xi1",
            Regime::Xi2 => "xi2",
            Regime::Xi1Xi2Overlap => "xi1_xi2_overlap",
            Regime::TildeXi1 => "tilde_xi1",
            Regime::TildeXi2 => "tilde_xi2",
        }
    }

    pub fn has_map(&self) -> bool {
        !matches!(self, Regime::UpstreamBottleneck | Regime::MiddleBottleneck)
    }

    /// Whether the link-1 branch form applies.
    pub fn in_xi1(&self) -> bool {
        matches!(self, Regime::Xi1 | Regime::Xi1Xi2Overlap | Regime::TildeXi1)
    }

    pub fn in_xi2(&self) -> bool {
        matches!(self, Regime::Xi2 | Regime::Xi1Xi2Overlap | Regime::TildeXi2)
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

pub fn classify_regime(spec: &DmSpec) -> Regime {
    match capacity_case(spec) {
        CapacityCase::Upstream => return Regime::UpstreamBottleneck,
        CapacityCase::Middle => return Regime::MiddleBottleneck,
        _ => {}
    }
    let xi = spec.xi;
    if le(spec.xi_upper(), xi) {
        return Regime::Xi1;
    }
    if le(xi, spec.xi_lower()) {
        return Regime::Xi2;
    }
    if approx_eq(xi, spec.beta) {
        return Regime::Xi1Xi2Overlap;
    }
    let strict = lt(spec.c3, spec.c0);
    match (xi > spec.beta, strict) {
        (true, true) => Regime::TildeXi1,
        (true, false) => Regime::Xi1,
        (false, true) => Regime::TildeXi2,
        (false, false) => Regime::Xi2,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `F v = min{C1, max{A1, C3 - lambda v}}`, `lambda = (1 - xi)/xi`.
    Counterclockwise,
    /// `F v = max{C3 - C2, min{A2', mu (C3 - v)}}`, `mu = xi/(1 - xi)`.
    Clockwise,
}

/// The map `F` on `[0, C3]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseMap {
    pub branch: Branch,
    /// `lambda` on the counterclockwise branch, `mu` on the clockwise one.
    pub slope: f64,
    /// `A1` (inner floor) or `A2'` (inner ceiling).
    pub inner: f64,
    /// `C1` (outer cap) or `C3 - C2` (outer floor).
    pub outer: f64,
    pub c3: f64,
}

impl PiecewiseMap {
    pub fn eval(&self, v: f64) -> f64 {
        match self.branch {
            Branch::Counterclockwise => self.outer.min(self.inner.max(self.c3 - self.slope * v)),
            Branch::Clockwise => self.outer.max(self.inner.min(self.slope * (self.c3 - v))),
        }
    }

    /// Abscissae in `(0, C3)` where the sloped piece meets a flat piece.
    pub fn kinks(&self) -> Vec<f64> {
        let hits = match self.branch {
            Branch::Counterclockwise => [
                (self.c3 - self.inner) / self.slope,
                (self.c3 - self.outer) / self.slope,
            ],
            Branch::Clockwise => [
                self.c3 - self.inner / self.slope,
                self.c3 - self.outer / self.slope,
            ],
        };
        let mut k: Vec<f64> = hits
            .into_iter()
            .filter(|&x| x.is_finite() && x > 0.0 && x < self.c3)
            .collect();
        k.sort_by(f64::total_cmp);
        k.dedup();
        k
    }

    pub fn to_piecewise(&self) -> PiecewiseLinear {
        PiecewiseLinear::from_fn(0.0, self.c3, &self.kinks(), |v| self.eval(v))
            .expect("C3 is positive")
    }

    /// Components of the solution set of `F^k v = v`, found exactly on the
    /// composed piecewise-linear function.
    pub fn periodic_points(&self, k: usize) -> Vec<Root> {
        self.to_piecewise().iterate(k).fixed_points(1e-12)
    }
}

fn check_flow(map: &PiecewiseMap, v: f64) -> Result<()> {
    if v.is_finite() && v >= -crate::EPS && v <= map.c3 + crate::EPS {
        Ok(())
    } else {
        domain(format!("flow {v} outside [0, {}]", map.c3))
    }
}

/// Builds `F` for the regime of `spec`. On the overlap regime the
/// counterclockwise form is used; see [`build_map_branch`].
pub fn build_map(spec: &DmSpec) -> Result<PiecewiseMap> {
    let regime = classify_regime(spec);
    if !regime.has_map() {
        return Err(Error::UnsupportedRegime(format!(
            "no return map in the {regime} regime"
        )));
    }
    let branch = if regime.in_xi1() {
        Branch::Counterclockwise
    } else {
        Branch::Clockwise
    };
    build_map_branch(spec, branch)
}

/// Builds `F` with an explicit branch form. The branch must be admissible
/// for the regime (both are on the overlap).
pub fn build_map_branch(spec: &DmSpec, branch: Branch) -> Result<PiecewiseMap> {
    let regime = classify_regime(spec);
    if !regime.has_map() {
        return Err(Error::UnsupportedRegime(format!(
            "no return map in the {regime} regime"
        )));
    }
    let (c0, c1, c2, c3, beta, xi) = (spec.c0, spec.c1, spec.c2, spec.c3, spec.beta, spec.xi);
    match branch {
        Branch::Counterclockwise => {
            if !regime.in_xi1() {
                return Err(Error::UnsupportedRegime(format!(
                    "link-1 branch requested in the {regime} regime"
                )));
            }
            if xi == 0.0 {
                return Err(Error::DegenerateSlope("xi = 0 on the link-1 branch".into()));
            }
            let a1 = (c3 - (1.0 - xi) * c0).max(c3 - c2).max(beta * c3);
            Ok(PiecewiseMap {
                branch,
                slope: (1.0 - xi) / xi,
                inner: a1,
                outer: c1,
                c3,
            })
        }
        Branch::Clockwise => {
            if !regime.in_xi2() {
                return Err(Error::UnsupportedRegime(format!(
                    "link-2 branch requested in the {regime} regime"
                )));
            }
            if xi == 1.0 {
                return Err(Error::DegenerateSlope("xi = 1 on the link-2 branch".into()));
            }
            let a2p = (xi * c0).min(c1).min(beta * c3);
            Ok(PiecewiseMap {
                branch,
                slope: xi / (1.0 - xi),
                inner: a2p,
                outer: c3 - c2,
                c3,
            })
        }
    }
}

pub fn apply(map: &PiecewiseMap, v: f64) -> Result<f64> {
    check_flow(map, v)?;
    Ok(map.eval(v))
}

/// `[v0, F v0, ..., F^n v0]`.
pub fn iterate(map: &PiecewiseMap, v0: f64, n: usize) -> Result<Vec<f64>> {
    check_flow(map, v0)?;
    let mut orbit = Vec::with_capacity(n + 1);
    orbit.push(v0);
    let mut v = v0;
    for _ in 0..n {
        v = map.eval(v);
        orbit.push(v);
    }
    Ok(orbit)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub from: (f64, f64),
    pub to: (f64, f64),
}

/// Cobweb segments of the first `n` iterations: a vertical step to the
/// graph followed by a horizontal step to the diagonal.
pub fn cobweb(map: &PiecewiseMap, v0: f64, n: usize) -> Result<Vec<Segment>> {
    let orbit = iterate(map, v0, n)?;
    let mut segs = Vec::with_capacity(2 * n);
    for w in orbit.windows(2) {
        let (a, b) = (w[0], w[1]);
        segs.push(Segment {
            from: (a, a),
            to: (a, b),
        });
        segs.push(Segment {
            from: (a, b),
            to: (b, b),
        });
    }
    Ok(segs)
}

/// Out-flux of link 1 in the stationary state the map returns to.
pub fn fixed_point(spec: &DmSpec) -> Result<f64> {
    let regime = classify_regime(spec);
    let v = match regime {
        Regime::UpstreamBottleneck | Regime::MiddleBottleneck => {
            return Err(Error::UnsupportedRegime(format!(
                "no return map in the {regime} regime"
            )))
        }
        Regime::Xi1 if le(spec.xi_upper(), spec.xi) => spec.c1,
        Regime::Xi2 if le(spec.xi, spec.xi_lower()) => spec.c3 - spec.c2,
        _ => spec.xi * spec.c3,
    };
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum StabilityClass {
    /// Every orbit lands on the fixed point after at most `max_steps`
    /// iterations. `None` where no map exists (bottleneck regimes).
    FiniteTime { max_steps: Option<u8> },
    Asymptotic,
    Unstable,
    /// `xi = 1/2` on the sloped piece: every nearby point has period 2.
    NeutralTwoCycleContinuum,
}

impl StabilityClass {
    pub fn label(&self) -> &'static str {
        match self {
            StabilityClass::FiniteTime { .. } => "finite_time",
            StabilityClass::Asymptotic => "asymptotic",
            StabilityClass::Unstable => "unstable",
            StabilityClass::NeutralTwoCycleContinuum => "neutral",
        }
    }

    /// Same class ignoring the step count.
    pub fn same_kind(&self, other: &StabilityClass) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }
}

impl fmt::Display for StabilityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Period-2 structure around the fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Period2 {
    None,
    /// The attracting 2-cycle `{v_minus, v_plus}`.
    Pair { v_minus: f64, v_plus: f64 },
    /// Every point of `[v_minus, v_plus]` other than the fixed point has
    /// period 2.
    Continuum { v_minus: f64, v_plus: f64 },
}

impl Period2 {
    pub fn bounds(&self) -> Option<(f64, f64)> {
        match *self {
            Period2::None => None,
            Period2::Pair { v_minus, v_plus } | Period2::Continuum { v_minus, v_plus } => {
                Some((v_minus, v_plus))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub regime: Regime,
    /// Link-1 out-flux at the fixed point (for bottleneck regimes, the
    /// stationary link-1 flow).
    pub fixed_point: f64,
    pub class: StabilityClass,
    pub period2: Period2,
    /// Whether the local slope magnitude is at least 1, i.e. the linear
    /// criterion calls the state unstable. True on the neutral case too.
    pub linear_unstable: bool,
}

fn finite_time_steps(map: &PiecewiseMap, v_star: f64) -> Option<u8> {
    // F is nonincreasing, so F([0, C3]) = [F(C3), F(0)] and F^2 is
    // constant iff F maps both ends of that image to the fixed point.
    let hi = map.eval(0.0);
    let lo = map.eval(map.c3);
    let at = |v: f64| (v - v_star).abs() <= 1e-12;
    if at(hi) && at(lo) {
        Some(1)
    } else if at(map.eval(hi)) && at(map.eval(lo)) {
        Some(2)
    } else {
        None
    }
}

/// Map for classification purposes: on the overlap, falls back to the
/// other branch when the default one has a degenerate slope.
fn usable_map(spec: &DmSpec, regime: Regime) -> Result<PiecewiseMap> {
    match build_map(spec) {
        Err(Error::DegenerateSlope(_)) if regime == Regime::Xi1Xi2Overlap => {
            build_map_branch(spec, Branch::Clockwise)
        }
        other => other,
    }
}

pub fn classify_stability(spec: &DmSpec) -> StabilityReport {
    let regime = classify_regime(spec);
    if !regime.has_map() {
        let q = stationary_states(spec).first().map_or(0.0, |s| s.q);
        return StabilityReport {
            regime,
            fixed_point: spec.xi * q,
            class: StabilityClass::FiniteTime { max_steps: None },
            period2: Period2::None,
            linear_unstable: false,
        };
    }
    let v_star = fixed_point(spec).expect("regime has a map");
    let (class, linear_unstable) = match regime {
        Regime::TildeXi1 | Regime::TildeXi2 => {
            // Local slope magnitude: lambda on Tilde Xi1, mu on Tilde Xi2.
            let toward = if regime == Regime::TildeXi1 {
                spec.xi
            } else {
                1.0 - spec.xi
            };
            if approx_eq(spec.xi, 0.5) {
                (StabilityClass::NeutralTwoCycleContinuum, true)
            } else if toward > 0.5 {
                (StabilityClass::Asymptotic, false)
            } else {
                (StabilityClass::Unstable, true)
            }
        }
        _ => {
            let steps = usable_map(spec, regime)
                .ok()
                .and_then(|m| finite_time_steps(&m, v_star));
            if steps.is_none() {
                log::warn!("finite-time convergence not confirmed for {spec:?}");
            }
            (StabilityClass::FiniteTime { max_steps: steps }, false)
        }
    };
    let period2 = match class {
        StabilityClass::Unstable | StabilityClass::NeutralTwoCycleContinuum => {
            period2_points(spec).expect("regime has a map")
        }
        _ => Period2::None,
    };
    StabilityReport {
        regime,
        fixed_point: v_star,
        class,
        period2,
        linear_unstable,
    }
}

/// The 2-cycle (or, at `xi = 1/2`, the interval of period-2 points) on
/// the strict interior regimes. `Period2::None` wherever orbits converge.
pub fn period2_points(spec: &DmSpec) -> Result<Period2> {
    let regime = classify_regime(spec);
    if !regime.has_map() {
        return Err(Error::UnsupportedRegime(format!(
            "no return map in the {regime} regime"
        )));
    }
    let xi = spec.xi;
    let neutral = approx_eq(xi, 0.5);
    let (c1, c2, c3) = (spec.c1, spec.c2, spec.c3);
    let bounds = match regime {
        Regime::TildeXi1 if neutral || xi < 0.5 => {
            let m = build_map(spec)?;
            let (lambda, a1) = (m.slope, m.inner);
            Some(((a1).max(c3 - lambda * c1), c1.min(c3 - lambda * a1)))
        }
        Regime::TildeXi2 if neutral || xi > 0.5 => {
            let m = build_map(spec)?;
            let (mu, a2p) = (m.slope, m.inner);
            let a2 = c3 - a2p;
            Some(((c3 - c2).max(mu * a2), a2p.min(mu * c2)))
        }
        _ => None,
    };
    Ok(match bounds {
        None => Period2::None,
        Some((v_minus, v_plus)) if neutral => Period2::Continuum { v_minus, v_plus },
        Some((v_minus, v_plus)) => Period2::Pair { v_minus, v_plus },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig(xi: f64) -> DmSpec {
        DmSpec::new(3.0, 1.5, 2.0, 2.5, 0.3, xi).unwrap()
    }

    fn small(xi: f64) -> DmSpec {
        DmSpec::new(3.0, 1.0, 2.0, 2.0, 1.0 / 3.0, xi).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn regime_examples() {
        assert_eq!(classify_regime(&small(0.45)), Regime::TildeXi1);
        let up = DmSpec::new(1.0, 1.0, 1.0, 3.0, 0.5, 0.5).unwrap();
        assert_eq!(classify_regime(&up), Regime::UpstreamBottleneck);
        assert_eq!(classify_regime(&fig(0.25)), Regime::TildeXi2);
        assert_eq!(classify_regime(&fig(0.3)), Regime::Xi1Xi2Overlap);
        assert_eq!(classify_regime(&fig(0.6)), Regime::Xi1);
        assert_eq!(classify_regime(&fig(0.2)), Regime::Xi2);
        let mid = DmSpec::new(4.0, 1.0, 1.0, 3.0, 0.5, 0.5).unwrap();
        assert_eq!(classify_regime(&mid), Regime::MiddleBottleneck);
        let eq = DmSpec::new(2.5, 1.5, 2.0, 2.5, 0.3, 0.4).unwrap();
        assert_eq!(classify_regime(&eq), Regime::Xi1);
    }

    #[test]
    fn map_examples() {
        let m = build_map(&fig(0.4)).unwrap();
        assert_eq!(m.branch, Branch::Counterclockwise);
        assert!(close(m.slope, 1.5) && close(m.inner, 0.75) && close(m.outer, 1.5));
        assert!(close(apply(&m, 0.75).unwrap(), 1.375));
        let m = build_map(&small(0.45)).unwrap();
        assert!(close(apply(&m, 1.0).unwrap(), 7.0 / 9.0));
        let m = build_map(&small(0.25)).unwrap();
        assert_eq!(m.branch, Branch::Clockwise);
        assert!(close(m.slope, 1.0 / 3.0) && close(m.outer, 0.0));
        assert!(close(m.inner, 2.0 / 3.0));
        assert!(apply(&m, 2.5).is_err());
        assert!(apply(&m, -0.1).is_err());
    }

    #[test]
    fn overlap_branches_share_fixed_point() {
        let s = fig(0.3);
        let v = fixed_point(&s).unwrap();
        assert!(close(v, 0.75));
        let a = build_map_branch(&s, Branch::Counterclockwise).unwrap();
        let b = build_map_branch(&s, Branch::Clockwise).unwrap();
        assert!(close(a.eval(v), v) && close(b.eval(v), v));
        assert!(matches!(
            build_map_branch(&fig(0.4), Branch::Clockwise),
            Err(Error::UnsupportedRegime(_))
        ));
    }

    #[test]
    fn degenerate_and_unsupported() {
        // C2 > C3 lets xi = beta = 0 sit in the interior.
        let s = DmSpec::new(3.0, 1.0, 3.0, 2.0, 0.0, 0.0).unwrap();
        assert_eq!(classify_regime(&s), Regime::Xi1Xi2Overlap);
        assert!(matches!(build_map(&s), Err(Error::DegenerateSlope(_))));
        let r = classify_stability(&s);
        assert!(matches!(r.class, StabilityClass::FiniteTime { max_steps: Some(_) }));
        let up = DmSpec::new(1.0, 1.0, 1.0, 3.0, 0.5, 0.5).unwrap();
        assert!(matches!(build_map(&up), Err(Error::UnsupportedRegime(_))));
        assert!(fixed_point(&up).is_err());
        assert!(period2_points(&up).is_err());
        let r = classify_stability(&up);
        assert_eq!(r.class, StabilityClass::FiniteTime { max_steps: None });
        assert!(close(r.fixed_point, 0.5));
    }

    #[test]
    fn fixed_point_examples() {
        assert!(close(fixed_point(&fig(0.55)).unwrap(), 1.375));
        assert!(close(fixed_point(&fig(0.7)).unwrap(), 1.5));
        assert!(close(fixed_point(&fig(0.1)).unwrap(), 0.5));
    }

    #[test]
    fn stability_examples() {
        for (xi, want) in [
            (0.1, "finite_time"),
            (0.25, "asymptotic"),
            (0.3, "finite_time"),
            (0.4, "unstable"),
            (0.5, "neutral"),
            (0.55, "asymptotic"),
            (0.6, "finite_time"),
            (1.0, "finite_time"),
        ] {
            assert_eq!(classify_stability(&fig(xi)).class.label(), want, "xi = {xi}");
        }
        let r = classify_stability(&small(1.0 / 3.0));
        assert!(matches!(r.class, StabilityClass::FiniteTime { .. }));
        assert!(close(r.fixed_point, 2.0 / 3.0));
        let sym = |xi| DmSpec::new(3.0, 1.5, 1.5, 2.0, 0.5, xi).unwrap();
        for i in 1..50 {
            let xi = 0.25 + 0.5 * i as f64 / 50.0;
            let c = classify_stability(&sym(xi)).class;
            assert_ne!(c, StabilityClass::Unstable, "xi = {xi}");
        }
    }

    #[test]
    fn period2_examples() {
        let p = period2_points(&small(0.45)).unwrap();
        let (a, b) = p.bounds().unwrap();
        assert!(close(a, 7.0 / 9.0) && close(b, 1.0));
        let p = period2_points(&fig(0.4)).unwrap();
        assert!(matches!(p, Period2::Pair { .. }));
        let (a, b) = p.bounds().unwrap();
        assert!(close(a, 0.75) && close(b, 1.375));
        let p = period2_points(&fig(0.5)).unwrap();
        assert!(matches!(p, Period2::Continuum { .. }));
        let (a, b) = p.bounds().unwrap();
        assert!(close(a, 1.0) && close(b, 1.5));
        assert_eq!(period2_points(&fig(0.55)).unwrap(), Period2::None);
    }

    #[test]
    fn mirrored_period2_is_a_cycle() {
        // Tilde Xi2 with xi > 1/2 needs beta > 1/2.
        let s = DmSpec::new(3.0, 2.0, 1.5, 2.5, 0.7, 0.6).unwrap();
        assert_eq!(classify_regime(&s), Regime::TildeXi2);
        let r = classify_stability(&s);
        assert_eq!(r.class, StabilityClass::Unstable);
        let (a, b) = r.period2.bounds().unwrap();
        let m = build_map(&s).unwrap();
        assert!(a < r.fixed_point && r.fixed_point < b);
        assert!(close(m.eval(a), b) && close(m.eval(b), a));
    }

    #[test]
    fn orbits_and_cobweb() {
        let m = build_map(&fig(0.55)).unwrap();
        let o = iterate(&m, 1.1, 200).unwrap();
        assert!((o[200] - 1.375).abs() < 1e-9);
        let m = build_map(&fig(0.4)).unwrap();
        let o = iterate(&m, 1.1, 50).unwrap();
        let tail: Vec<f64> = o[48..].to_vec();
        assert!(tail.iter().all(|&v| close(v, 0.75) || close(v, 1.375)));
        assert_eq!(iterate(&m, 1.1, 0).unwrap(), vec![1.1]);
        assert!(cobweb(&m, 1.1, 0).unwrap().is_empty());
        let v = fixed_point(&fig(0.4)).unwrap();
        let segs = cobweb(&m, v, 5).unwrap();
        assert_eq!(segs.len(), 10);
        assert!(segs.iter().all(|s| close(s.from.0, v) && close(s.to.1, v)));
    }

    #[test]
    fn finite_time_steps_reported() {
        let r = classify_stability(&fig(0.7));
        assert_eq!(r.class, StabilityClass::FiniteTime { max_steps: Some(1) });
        let r = classify_stability(&fig(0.1));
        assert!(matches!(r.class, StabilityClass::FiniteTime { max_steps: Some(_) }));
    }
}
