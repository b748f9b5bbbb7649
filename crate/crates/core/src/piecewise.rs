//! Continuous piecewise-linear functions of one variable.
//!
//! Used to compose the first-return map with itself and locate periodic
//! points exactly, segment by segment.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Continuous piecewise-linear function given by its knots. Outside the
/// knot range the end segments are extended linearly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    knots: Vec<(f64, f64)>,
}

/// A solution set component of `f(x) = x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Root {
    Point(f64),
    Interval(f64, f64),
}

impl Root {
    pub fn contains(&self, x: f64, tol: f64) -> bool {
        match *self {
            Root::Point(r) => (x - r).abs() <= tol,
            Root::Interval(a, b) => x >= a - tol && x <= b + tol,
        }
    }
}

impl PiecewiseLinear {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return domain("piecewise-linear function needs at least two knots");
        }
        if knots.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return domain("non-finite knot");
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return domain("knot abscissae must be strictly increasing");
        }
        Ok(Self { knots })
    }

    /// Samples `f` at the given breakpoints (deduplicated, sorted) over
    /// `[lo, hi]`. Exact when `f` is linear between consecutive breakpoints.
    pub fn from_fn(lo: f64, hi: f64, breaks: &[f64], f: impl Fn(f64) -> f64) -> Result<Self> {
        if !(hi > lo) {
            return domain(format!("empty interval [{lo}, {hi}]"));
        }
        let mut xs: Vec<f64> = breaks
            .iter()
            .copied()
            .filter(|&x| x > lo && x < hi)
            .chain([lo, hi])
            .collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);
        Self::new(xs.into_iter().map(|x| (x, f(x))).collect())
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0].0, self.knots[self.knots.len() - 1].0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = &self.knots;
        // Index of the segment containing x, clamped to the end segments.
        let i = k.partition_point(|p| p.0 <= x).clamp(1, k.len() - 1) - 1;
        let (x0, y0) = k[i];
        let (x1, y1) = k[i + 1];
        if x == x1 {
            return y1;
        }
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// `self ∘ inner` on the domain of `inner`.
    pub fn compose(&self, inner: &PiecewiseLinear) -> PiecewiseLinear {
        let mut xs: Vec<f64> = Vec::with_capacity(inner.knots.len() * 2);
        let interior = &self.knots[1..self.knots.len() - 1];
        for w in inner.knots.windows(2) {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            xs.push(x0);
            if y0 != y1 {
                let (lo, hi) = if y0 < y1 { (y0, y1) } else { (y1, y0) };
                let mut cross: Vec<f64> = interior
                    .iter()
                    .filter(|p| p.0 > lo && p.0 < hi)
                    .map(|p| x0 + (p.0 - y0) * (x1 - x0) / (y1 - y0))
                    .collect();
                cross.sort_by(f64::total_cmp);
                xs.extend(cross.into_iter().filter(|&x| x > x0 && x < x1));
            }
        }
        xs.push(inner.knots[inner.knots.len() - 1].0);
        xs.dedup();
        let knots = xs.into_iter().map(|x| (x, self.eval(inner.eval(x)))).collect();
        PiecewiseLinear { knots }.simplified()
    }

    /// The `k`-fold composite; `k = 0` gives the identity on the domain.
    pub fn iterate(&self, k: usize) -> PiecewiseLinear {
        let (lo, hi) = self.domain();
        let mut out = PiecewiseLinear {
            knots: vec![(lo, lo), (hi, hi)],
        };
        for _ in 0..k {
            out = self.compose(&out);
        }
        out
    }

    /// Drops knots where the slope does not change.
    fn simplified(mut self) -> Self {
        if self.knots.len() <= 2 {
            return self;
        }
        let mut kept = vec![self.knots[0]];
        for i in 1..self.knots.len() - 1 {
            let (xa, ya) = *kept.last().unwrap();
            let (xb, yb) = self.knots[i];
            let (xc, yc) = self.knots[i + 1];
            let s1 = (yb - ya) / (xb - xa);
            let s2 = (yc - yb) / (xc - xb);
            if (s1 - s2).abs() > 1e-12 * (1.0 + s1.abs().max(s2.abs())) {
                kept.push((xb, yb));
            }
        }
        kept.push(self.knots[self.knots.len() - 1]);
        self.knots = kept;
        self
    }

    /// Solutions of `f(x) = x` inside the domain. Segments lying within
    /// `tol` of the diagonal at both ends are reported as intervals;
    /// overlapping or adjacent components are merged and points closer
    /// than 1e-9 are deduplicated.
    pub fn fixed_points(&self, tol: f64) -> Vec<Root> {
        let mut roots: Vec<Root> = Vec::new();
        let push = |roots: &mut Vec<Root>, r: Root| {
            if let Some(last) = roots.last_mut() {
                let (la, lb) = bounds(*last);
                let (ra, rb) = bounds(r);
                if ra <= lb + 1e-9 {
                    let (a, b) = (la.min(ra), lb.max(rb));
                    *last = if b - a <= 1e-9 {
                        Root::Point(0.5 * (a + b))
                    } else {
                        Root::Interval(a, b)
                    };
                    return;
                }
            }
            roots.push(r);
        };
        for w in self.knots.windows(2) {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            let g0 = y0 - x0;
            let g1 = y1 - x1;
            if g0.abs() <= tol && g1.abs() <= tol {
                push(&mut roots, Root::Interval(x0, x1));
            } else if g0.abs() <= tol {
                push(&mut roots, Root::Point(x0));
            } else if g1.abs() <= tol {
                push(&mut roots, Root::Point(x1));
            } else if (g0 < 0.0) != (g1 < 0.0) {
                push(&mut roots, Root::Point(x0 - g0 * (x1 - x0) / (g1 - g0)));
            }
        }
        roots
    }
}

fn bounds(r: Root) -> (f64, f64) {
    match r {
        Root::Point(x) => (x, x),
        Root::Interval(a, b) => (a, b),
    }
}
