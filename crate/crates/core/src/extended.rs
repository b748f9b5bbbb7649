//! Return maps of the symmetric (DM)^n ring and of beltways.
//!
//! In the (DM)^n ring each congested link has capacity `s`, each
//! uncongested link `2s`, and each merge supply `2s`; the out-flux of
//! congested link `i` one return time later is
//! `min{s, 2s - lambda v_(i-1)}` with `lambda = (1 - xi)/xi`. Beltways
//! lose or gain a factor `(1 - beta)/(1 - xi)` of mainline flow per ramp
//! pair.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::{approx_eq, EPS};

/// Whether `xi` lies in `(1/3, 1/2)`, where the congested links stay
/// congested and the symmetric analysis holds.
pub fn dmn_analyzed(xi: f64) -> bool {
    xi > 1.0 / 3.0 && xi < 0.5
}

fn check_xi(xi: f64) -> Result<f64> {
    if xi > 0.0 && xi < 1.0 {
        Ok((1.0 - xi) / xi)
    } else {
        domain(format!("xi must lie in (0, 1), got {xi}"))
    }
}

/// One return step of the ring with unit scale.
pub fn dmn_step(n: usize, xi: f64, state: &[f64]) -> Result<Vec<f64>> {
    dmn_step_scaled(n, xi, 1.0, state)
}

/// `new[i] = min{s, 2s - lambda old[i-1]}` cyclically.
pub fn dmn_step_scaled(n: usize, xi: f64, scale: f64, state: &[f64]) -> Result<Vec<f64>> {
    let lambda = check_xi(xi)?;
    if n == 0 || state.len() != n {
        return domain(format!("state has {} components, expected n = {n} >= 1", state.len()));
    }
    if let Some(v) = state.iter().find(|v| !(**v >= -EPS && **v <= scale + EPS)) {
        return domain(format!("component {v} outside [0, {scale}]"));
    }
    let next: Vec<f64> = (0..n)
        .map(|i| scale.min(2.0 * scale - lambda * state[(i + n - 1) % n]))
        .collect();
    if let Some(v) = next.iter().find(|v| **v < -EPS) {
        return domain(format!("iterate {v} became negative; xi = {xi} is too small"));
    }
    Ok(next)
}

/// `[state, step(state), ...]` with `steps` applications.
pub fn dmn_orbit(n: usize, xi: f64, state: &[f64], steps: usize) -> Result<Vec<Vec<f64>>> {
    let mut out = vec![state.to_vec()];
    for _ in 0..steps {
        let next = dmn_step(n, xi, out.last().unwrap())?;
        out.push(next);
    }
    Ok(out)
}

/// Growth of a perturbation of the symmetric state over `n` steps:
/// `(-lambda)^n`.
pub fn dmn_perturbation_factor(n: usize, xi: f64) -> Result<f64> {
    if xi == 0.0 || xi == 1.0 {
        return Err(Error::DegenerateSlope(format!("xi = {xi}")));
    }
    let lambda = check_xi(xi)?;
    Ok((-lambda).powi(n as i32))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "pattern", rename_all = "snake_case")]
pub enum DmnPattern {
    /// Odd ring: every congested link oscillates between the two values.
    Ppo { cycle: (f64, f64) },
    /// Even ring: two stable asymmetric fixed points and the unstable
    /// symmetric one.
    Bistable {
        stable: [Vec<f64>; 2],
        unstable: Vec<f64>,
    },
    /// `xi > 1/2`: every link settles at capacity.
    Stable { fixed_point: Vec<f64> },
    Unanalyzed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmnReport {
    pub n: usize,
    pub xi: f64,
    pub pattern: DmnPattern,
    /// False outside `(1/3, 1/2)`.
    pub analyzed: bool,
}

pub fn dmn_classify(n: usize, xi: f64) -> Result<DmnReport> {
    dmn_classify_scaled(n, xi, 1.0)
}

pub fn dmn_classify_scaled(n: usize, xi: f64, scale: f64) -> Result<DmnReport> {
    let lambda = check_xi(xi)?;
    if n == 0 {
        return domain("(DM)^n requires n >= 1");
    }
    let low = scale * (2.0 - lambda);
    let analyzed = dmn_analyzed(xi);
    let pattern = if analyzed && n % 2 == 1 {
        DmnPattern::Ppo {
            cycle: (low, scale),
        }
    } else if analyzed {
        let alt = |first: f64, second: f64| {
            (0..n)
                .map(|i| if i % 2 == 0 { first } else { second })
                .collect::<Vec<_>>()
        };
        DmnPattern::Bistable {
            stable: [alt(scale, low), alt(low, scale)],
            unstable: vec![2.0 * xi * scale; n],
        }
    } else if xi > 0.5 {
        DmnPattern::Stable {
            fixed_point: vec![scale; n],
        }
    } else {
        DmnPattern::Unanalyzed
    };
    Ok(DmnReport {
        n,
        xi,
        pattern,
        analyzed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeltwaySpec {
    /// On-ramp merging ratio.
    pub beta: f64,
    /// Off-ramp turning proportion.
    pub xi: f64,
    /// Number of off-ramp / on-ramp pairs.
    pub n: usize,
}

impl BeltwaySpec {
    pub fn new(beta: f64, xi: f64, n: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&beta) {
            return domain(format!("beta must lie in [0, 1), got {beta}"));
        }
        if !(0.0..=1.0).contains(&xi) {
            return domain(format!("xi must lie in [0, 1], got {xi}"));
        }
        if n == 0 {
            return domain("beltway needs at least one ramp pair");
        }
        Ok(Self { beta, xi, n })
    }

    pub fn alpha(&self) -> f64 {
        self.beta / (1.0 - self.beta)
    }

    pub fn mu(&self) -> f64 {
        self.xi / (1.0 - self.xi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeltwayFactor {
    /// `(1 - beta)/(1 - xi)`.
    pub per_pair: f64,
    /// `per_pair^n`.
    pub per_lap: f64,
    /// `(1 + mu)/(1 + alpha)`, equal to `per_pair`.
    pub alpha_mu_form: f64,
}

pub fn beltway_factor(spec: &BeltwaySpec) -> Result<BeltwayFactor> {
    if spec.xi == 1.0 {
        return Err(Error::DegenerateSlope("off-ramp takes all traffic (xi = 1)".into()));
    }
    let per_pair = (1.0 - spec.beta) / (1.0 - spec.xi);
    Ok(BeltwayFactor {
        per_pair,
        per_lap: per_pair.powi(spec.n as i32),
        alpha_mu_form: (1.0 + spec.mu()) / (1.0 + spec.alpha()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridlockClass {
    /// Flow decays to zero: the ring jams.
    GridlockStable,
    /// Flow grows away from gridlock.
    GridlockUnstable,
    /// Flow is preserved lap to lap.
    Neutral,
}

pub fn beltway_classify(spec: &BeltwaySpec) -> GridlockClass {
    match beltway_factor(spec) {
        Err(_) => GridlockClass::GridlockUnstable,
        Ok(f) if approx_eq(f.per_pair, 1.0) => GridlockClass::Neutral,
        Ok(f) if f.per_pair < 1.0 => GridlockClass::GridlockStable,
        Ok(_) => GridlockClass::GridlockUnstable,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfLife {
    pub pairs: f64,
    pub laps: f64,
}

/// Ramp pairs (and laps) for mainline flow to halve.
pub fn beltway_half_life(spec: &BeltwaySpec) -> Result<HalfLife> {
    let f = beltway_factor(spec)?;
    if !(f.per_pair < 1.0) || approx_eq(f.per_pair, 1.0) {
        return Err(Error::UndefinedHalfLife(f.per_lap));
    }
    let pairs = 0.5f64.ln() / f.per_pair.ln();
    Ok(HalfLife {
        pairs,
        laps: pairs / spec.n as f64,
    })
}
