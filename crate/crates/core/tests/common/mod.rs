#![allow(dead_code)]

use dmflow_core::network::DmSpec;
use dmflow_core::poincare::{classify_regime, Regime};
use proptest::prelude::*;

pub fn fig(xi: f64) -> DmSpec {
    DmSpec::new(3.0, 1.5, 2.0, 2.5, 0.3, xi).unwrap()
}

pub fn small(xi: f64) -> DmSpec {
    DmSpec::new(3.0, 1.0, 2.0, 2.0, 1.0 / 3.0, xi).unwrap()
}

/// Specs with a downstream bottleneck (`C3 <= C0`, `C3 < C1 + C2`), so the
/// return map exists. About one in five has `C0 = C3`.
pub fn mapped_spec() -> impl Strategy<Value = DmSpec> {
    (
        1.0..3.0f64,
        prop_oneof![1 => Just(1.0), 4 => 1.01..2.0f64],
        0.2..1.2f64,
        0.2..1.2f64,
        0.0..=1.0f64,
        0.0..=1.0f64,
    )
        .prop_filter_map("needs C3 < C1 + C2", |(c3, r0, r1, r2, beta, xi)| {
            let (c1, c2) = (r1 * c3, r2 * c3);
            if c1 + c2 <= c3 * 1.001 {
                return None;
            }
            DmSpec::new(r0 * c3, c1, c2, c3, beta, xi).ok()
        })
}

/// Specs in the strict interior regimes, away from `xi = beta` and from
/// the neutral `xi = 1/2`.
pub fn tilde_spec() -> impl Strategy<Value = DmSpec> {
    (
        1.0..3.0f64,
        1.05..2.0f64,
        0.3..1.1f64,
        0.3..1.1f64,
        0.0..=1.0f64,
        0.0..1.0f64,
    )
        .prop_filter_map("strict interior regime", |(c3, r0, r1, r2, beta, u)| {
            let lo = (1.0 - r2).max(0.0);
            let hi = r1.min(1.0);
            if hi - lo < 1e-3 {
                return None;
            }
            let xi = lo + (hi - lo) * u;
            if (xi - beta).abs() < 1e-6 || (xi - 0.5).abs() < 1e-6 {
                return None;
            }
            let s = DmSpec::new(r0 * c3, r1 * c3, r2 * c3, c3, beta, xi).ok()?;
            matches!(classify_regime(&s), Regime::TildeXi1 | Regime::TildeXi2).then_some(s)
        })
}

/// Roots of `g` on `[a, b]` by a uniform scan of `n` intervals and
/// bisection on each sign change; exact zeros at grid points count too.
pub fn scan_roots(g: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> Vec<f64> {
    let x = |i: usize| a + (b - a) * i as f64 / n as f64;
    let mut roots: Vec<f64> = Vec::new();
    let push = |r: f64, roots: &mut Vec<f64>| {
        if roots.last().is_none_or(|&l| (r - l).abs() > 1e-9) {
            roots.push(r);
        }
    };
    let mut prev = (x(0), g(x(0)));
    if prev.1 == 0.0 {
        push(prev.0, &mut roots);
    }
    for i in 1..=n {
        let cur = (x(i), g(x(i)));
        if cur.1 == 0.0 {
            push(cur.0, &mut roots);
        } else if prev.1 != 0.0 && prev.1.signum() != cur.1.signum() {
            let (mut lo, mut hi) = (prev.0, cur.0);
            let s = prev.1.signum();
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if g(mid).signum() == s {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            push(0.5 * (lo + hi), &mut roots);
        }
        prev = cur;
    }
    roots
}
