//! Simulation-vs-map comparison.
//!
//! Runs the CTM from an empty network, reduces the section out-flux to a
//! verdict (converged, persistent oscillation, undetermined), and compares
//! it with the stability class and the fixed and period-2 points of the
//! return map. Also holds the (DM)^n and beltway cross-checks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ctm::{NetworkState, SimOptions, Simulator};
use crate::error::{Error, Result};
use crate::extended::{beltway_factor, dmn_analyzed, dmn_classify_scaled, BeltwaySpec, DmnPattern};
use crate::network::stationary::LinkProfile;
use crate::network::{
    build_beltway, build_dm, build_dmn, BeltwayParams, DiagramParams, DmSpec, DmnParams,
};
use crate::piecewise::Root;
use crate::poincare::{classify_stability, PiecewiseMap, StabilityClass, StabilityReport};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Converged { value: f64 },
    PersistentOscillation { low: f64, high: f64, period: f64 },
    Undetermined,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Converged { .. } => "converged",
            Verdict::PersistentOscillation { .. } => "persistent_oscillation",
            Verdict::Undetermined => "undetermined",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillationReport {
    pub verdict: Verdict,
    pub warmup_used: f64,
    pub window: f64,
}

/// Classifies the samples in `[warmup, warmup + window]` (times measured
/// with sample spacing `dt`).
///
/// Converged when the window range is below `tol`. Otherwise the window is
/// split in halves; if the extrema of the halves differ by more than `tol`
/// or the signal crosses its mid level upwards fewer than twice, the
/// verdict is undetermined. The period is the mean spacing of upward
/// mid-level crossings.
pub fn detect_oscillation(
    series: &[f64],
    dt: f64,
    warmup: f64,
    window: f64,
    tol: f64,
) -> Result<OscillationReport> {
    let start = (warmup / dt).round() as usize;
    let len = (window / dt).round() as usize;
    if len < 4 {
        return Err(Error::InsufficientData(format!(
            "window {window} holds {len} samples at dt = {dt}, need at least 4"
        )));
    }
    if start + len > series.len() {
        return Err(Error::InsufficientData(format!(
            "{} samples, need {} for warmup {warmup} and window {window}",
            series.len(),
            start + len
        )));
    }
    let w = &series[start..start + len];
    let range = |s: &[f64]| {
        s.iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    };
    let (low, high) = range(w);
    let report = |verdict| OscillationReport {
        verdict,
        warmup_used: start as f64 * dt,
        window: len as f64 * dt,
    };
    if high - low < tol {
        let value = w.iter().sum::<f64>() / len as f64;
        return Ok(report(Verdict::Converged { value }));
    }
    let (a, b) = w.split_at(len / 2);
    let (la, ha) = range(a);
    let (lb, hb) = range(b);
    if (la - lb).abs() > tol || (ha - hb).abs() > tol {
        return Ok(report(Verdict::Undetermined));
    }
    let mid = 0.5 * (low + high);
    let ups: Vec<f64> = w
        .windows(2)
        .enumerate()
        .filter(|(_, p)| p[0] < mid && p[1] >= mid)
        .map(|(i, p)| i as f64 + (mid - p[0]) / (p[1] - p[0]))
        .collect();
    if ups.len() < 2 {
        return Ok(report(Verdict::Undetermined));
    }
    let period = (ups[ups.len() - 1] - ups[0]) / (ups.len() - 1) as f64 * dt;
    Ok(report(Verdict::PersistentOscillation { low, high, period }))
}

/// Settings for simulation-vs-map comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationOptions {
    pub sim: SimOptions,
    pub diagram: DiagramParams,
    /// Warmup as a fraction of the horizon.
    pub warmup_fraction: f64,
    /// Detection window as a fraction of the horizon.
    pub window_fraction: f64,
    /// Flow range below which the window counts as converged.
    pub tol: f64,
    /// Relative tolerance on oscillation extrema.
    pub extrema_tolerance: f64,
    /// Relative tolerance on converged values.
    pub converged_tolerance: f64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            sim: SimOptions::default(),
            diagram: DiagramParams::default(),
            warmup_fraction: 0.5,
            window_fraction: 0.25,
            tol: 1e-3,
            extrema_tolerance: 0.05,
            converged_tolerance: 0.01,
        }
    }
}

impl ValidationOptions {
    fn detect(&self, series: &[f64], dt: f64) -> Result<OscillationReport> {
        let h = self.sim.horizon;
        detect_oscillation(
            series,
            dt,
            self.warmup_fraction * h,
            self.window_fraction * h,
            self.tol,
        )
    }
}

/// One measured-versus-predicted quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub quantity: String,
    pub expected: f64,
    pub measured: f64,
    pub relative_error: f64,
    pub tolerance: f64,
    pub ok: bool,
}

impl Comparison {
    fn new(quantity: &str, expected: f64, measured: f64, tolerance: f64) -> Self {
        let relative_error = (measured - expected).abs() / expected.abs().max(1e-12);
        Self {
            quantity: quantity.to_string(),
            expected,
            measured,
            relative_error,
            tolerance,
            ok: relative_error <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub spec: DmSpec,
    pub stability: StabilityReport,
    /// `link1` when the section flux is the link-1 out-flux, `link2` when
    /// it is `C3` minus the link-2 out-flux.
    pub section: String,
    pub oscillation: OscillationReport,
    /// Whether the simulated verdict matches the stability class.
    pub verdict_agrees: bool,
    pub comparisons: Vec<Comparison>,
    pub passed: bool,
}

/// Link-1 return-map variable from a DM run: the link-1 out-flux, or
/// `C3 - q2` when link 2 holds the queue.
fn map_variable(spec: &DmSpec, report: &StabilityReport, opts: &ValidationOptions) -> Result<(String, Vec<f64>, f64)> {
    let net = build_dm(spec, &opts.diagram)?;
    let sim = Simulator::new(net, &opts.sim)?;
    let rec = sim.run(sim.empty_state())?;
    let use_link2 = report.regime.in_xi2() && !report.regime.in_xi1();
    let series = if use_link2 {
        rec.section(2)
            .expect("link 2 is a section")
            .iter()
            .map(|q| spec.c3 - q)
            .collect()
    } else {
        rec.section(1).expect("link 1 is a section").to_vec()
    };
    let name = if use_link2 { "link2" } else { "link1" };
    Ok((name.to_string(), series, rec.dt))
}

/// Simulates `spec` from an empty network and compares the section flux
/// with the return map's predictions.
pub fn validate_spec(spec: &DmSpec, opts: &ValidationOptions) -> Result<ValidationReport> {
    let stability = classify_stability(spec);
    let (section, series, dt) = map_variable(spec, &stability, opts)?;
    let oscillation = opts.detect(&series, dt)?;
    let v_star = stability.fixed_point;
    let mut comparisons = Vec::new();
    let verdict_agrees = match (stability.class, oscillation.verdict) {
        (StabilityClass::FiniteTime { .. } | StabilityClass::Asymptotic, Verdict::Converged { value }) => {
            comparisons.push(Comparison::new("v_star", v_star, value, opts.converged_tolerance));
            true
        }
        (StabilityClass::Unstable, Verdict::PersistentOscillation { low, high, .. }) => {
            let (vm, vp) = stability.period2.bounds().expect("unstable reports a cycle");
            comparisons.push(Comparison::new("v_minus", vm, low, opts.extrema_tolerance));
            comparisons.push(Comparison::new("v_plus", vp, high, opts.extrema_tolerance));
            true
        }
        (StabilityClass::NeutralTwoCycleContinuum, v) => {
            // Either verdict is consistent; values must stay in the band.
            let (vm, vp) = stability.period2.bounds().expect("neutral reports a band");
            let slack = opts.extrema_tolerance * vp;
            let inside = |x: f64| x >= vm - slack && x <= vp + slack;
            match v {
                Verdict::Converged { value } => inside(value),
                Verdict::PersistentOscillation { low, high, .. } => inside(low) && inside(high),
                Verdict::Undetermined => false,
            }
        }
        _ => false,
    };
    let passed = verdict_agrees && comparisons.iter().all(|c| c.ok);
    Ok(ValidationReport {
        spec: *spec,
        stability,
        section,
        oscillation,
        verdict_agrees,
        comparisons,
        passed,
    })
}

/// Validates each spec independently (in parallel), preserving order.
pub fn validate_family(specs: &[DmSpec], opts: &ValidationOptions) -> Result<Vec<ValidationReport>> {
    specs.par_iter().map(|s| validate_spec(s, opts)).collect()
}

/// `xi` grid with the given step, dropping points within `exclusion`
/// (inclusive) of a class boundary of `template`.
pub fn agreement_grid(template: &DmSpec, step: f64, exclusion: f64) -> Result<Vec<f64>> {
    let bounds = crate::bifurcation::boundary_candidates(template);
    Ok(crate::bifurcation::xi_grid(0.0, 1.0, step)?
        .into_iter()
        .filter(|x| bounds.iter().all(|b| (x - b).abs() > exclusion + 1e-9))
        .collect())
}

/// Roots of `F^order v = v` over `[0, C3]`, enumerated exactly segment by
/// segment on the composed map.
pub fn brute_force_period_roots(map: &PiecewiseMap, order: usize) -> Vec<Root> {
    map.periodic_points(order)
}

/// Symmetric (DM)^n stationary state (stage inflow `2s`, congested-link
/// flow `2 xi s`) with the flow of the uncongested link feeding stage 0
/// scaled by `1 + perturbation`.
pub fn dmn_start(sim: &Simulator, p: &DmnParams, perturbation: f64) -> Result<NetworkState> {
    let s = p.scale;
    let v = 2.0 * p.xi * s;
    let links = &sim.network().links;
    let mut profiles = Vec::with_capacity(links.len());
    let mut fractions = Vec::with_capacity(links.len());
    for (idx, link) in links.iter().enumerate() {
        let (i, j) = (idx / 4, idx % 4);
        let fd = &link.diagram;
        let k = match j {
            0 => fd.over_critical_density(2.0 * s)?,
            1 => fd.over_critical_density(v)?,
            2 if i == p.n - 1 => fd.under_critical_density((2.0 * s - v) * (1.0 + perturbation))?,
            2 => fd.under_critical_density(2.0 * s - v)?,
            _ => fd.critical_density(),
        };
        profiles.push(LinkProfile::uniform(k, link.length));
        fractions.push(match j {
            1 => 1.0,
            2 => 0.0,
            _ => p.xi,
        });
    }
    sim.state_from_profiles(&profiles, &fractions)
}

/// Congested beltway: mainline and on-ramps over-critical at
/// `initial_flow`, off-ramps empty.
pub fn beltway_start(sim: &Simulator, initial_flow: f64) -> Result<NetworkState> {
    let densities = sim
        .network()
        .links
        .iter()
        .enumerate()
        .map(|(i, l)| match i % 4 {
            2 => Ok(0.0),
            _ => l.diagram.over_critical_density(initial_flow),
        })
        .collect::<Result<Vec<_>>>()?;
    sim.uniform_state(&densities, &vec![0.0; densities.len()])
}

/// Outcome of a (DM)^n simulation started near the symmetric state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmnValidation {
    pub n: usize,
    pub xi: f64,
    pub predicted: DmnPattern,
    /// Verdict per congested link.
    pub verdicts: Vec<Verdict>,
    /// `ppo`, `bistable`, `stable`, or `unclear`.
    pub observed: String,
    pub agrees: bool,
}

/// Runs the (DM)^n ring from its symmetric stationary state with the
/// uncongested link feeding stage 0 perturbed by `perturbation` (relative
/// flow change), then reads the congested-link out-fluxes.
pub fn validate_dmn(
    p: &DmnParams,
    perturbation: f64,
    opts: &ValidationOptions,
) -> Result<DmnValidation> {
    let sim = Simulator::new(build_dmn(p, &opts.diagram)?, &opts.sim)?;
    let s = p.scale;
    let rec = sim.run(dmn_start(&sim, p, perturbation)?)?;
    let verdicts = rec
        .sections
        .iter()
        .map(|series| opts.detect(series, rec.dt).map(|r| r.verdict))
        .collect::<Result<Vec<_>>>()?;
    let predicted = dmn_classify_scaled(p.n, p.xi, s)?.pattern;
    let close = |a: f64, b: f64| (a - b).abs() <= opts.converged_tolerance * b.abs().max(1e-12);
    let converged: Option<Vec<f64>> = verdicts
        .iter()
        .map(|v| match v {
            Verdict::Converged { value } => Some(*value),
            _ => None,
        })
        .collect();
    let observed = if verdicts
        .iter()
        .all(|v| matches!(v, Verdict::PersistentOscillation { .. }))
    {
        "ppo"
    } else if let Some(vals) = &converged {
        if vals.iter().all(|&x| close(x, vals[0])) {
            "stable"
        } else {
            "bistable"
        }
    } else {
        "unclear"
    };
    let agrees = match &predicted {
        DmnPattern::Ppo { cycle } => verdicts.iter().all(|v| match *v {
            Verdict::PersistentOscillation { low, high, .. } => {
                (low - cycle.0).abs() <= opts.extrema_tolerance * cycle.0
                    && (high - cycle.1).abs() <= opts.extrema_tolerance * cycle.1
            }
            _ => false,
        }),
        DmnPattern::Bistable { stable, .. } => converged.as_ref().is_some_and(|vals| {
            stable
                .iter()
                .any(|fp| fp.iter().zip(vals).all(|(&a, &b)| close(b, a)))
        }),
        DmnPattern::Stable { fixed_point } => converged
            .as_ref()
            .is_some_and(|vals| fixed_point.iter().zip(vals).all(|(&a, &b)| close(b, a))),
        DmnPattern::Unanalyzed => !dmn_analyzed(p.xi),
    };
    Ok(DmnValidation {
        n: p.n,
        xi: p.xi,
        predicted,
        verdicts,
        observed: observed.to_string(),
        agrees,
    })
}

/// Measured against predicted per-pair decay of beltway mainline flow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeltwayMeasurement {
    pub predicted_per_pair: f64,
    pub measured_per_pair: f64,
    pub relative_error: f64,
    /// Time for a congestion wave to cross one ramp pair.
    pub pair_time: f64,
    /// Section-mean flux at the start and end of the fitted range.
    pub flux_start: f64,
    pub flux_end: f64,
}

/// Runs a congested beltway (mainline at `initial_flow` on the congested
/// branch, on-ramps queued, off-ramps empty) and fits a log-linear decay
/// rate to the mean section flux after half the horizon's warmup.
pub fn measure_beltway_ratio(
    p: &BeltwayParams,
    initial_flow: f64,
    opts: &ValidationOptions,
) -> Result<BeltwayMeasurement> {
    let spec = BeltwaySpec::new(p.beta, p.xi, p.n)?;
    let predicted = beltway_factor(&spec)?.per_pair;
    let net = build_beltway(p, &opts.diagram)?;
    let sim = Simulator::new(net.clone(), &opts.sim)?;
    let init = beltway_start(&sim, initial_flow)?;
    let rec = sim.run(init)?;
    let steps = rec.steps();
    let mean: Vec<f64> = (0..steps)
        .map(|i| rec.sections.iter().map(|s| s[i]).sum::<f64>() / rec.sections.len() as f64)
        .collect();
    let start = (opts.warmup_fraction * steps as f64) as usize;
    let pts: Vec<(f64, f64)> = (start..steps)
        .filter(|&i| mean[i] > 1e-9)
        .map(|i| (rec.time(i), mean[i].ln()))
        .collect();
    if pts.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "only {} positive flux samples after warmup",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let (mt, my) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), &(t, y)| (a + t / n, b + y / n));
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), &(t, y)| {
        (a + (t - mt) * (y - my), b + (t - mt) * (t - mt))
    });
    let rate = sxy / sxx;
    let w = net.links[0].diagram.congested_wave_speed();
    let pair_time = 2.0 * p.segment_length / w;
    let measured = (rate * pair_time).exp();
    Ok(BeltwayMeasurement {
        predicted_per_pair: predicted,
        measured_per_pair: measured,
        relative_error: (measured - predicted).abs() / predicted,
        pair_time,
        flux_start: mean[start],
        flux_end: mean[steps - 1],
    })
}
