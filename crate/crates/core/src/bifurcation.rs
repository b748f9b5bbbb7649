//! Sweeps of the route-choice proportion `xi`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::network::DmSpec;
use crate::poincare::{classify_stability, Regime, StabilityClass};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BifurcationPoint {
    pub xi: f64,
    pub regime: Regime,
    pub v_star: f64,
    pub class: StabilityClass,
    pub v_minus: Option<f64>,
    pub v_plus: Option<f64>,
}

impl BifurcationPoint {
    pub fn at(template: &DmSpec, xi: f64) -> Result<Self> {
        let spec = template.with_xi(xi)?;
        let r = classify_stability(&spec);
        let b = r.period2.bounds();
        Ok(Self {
            xi,
            regime: r.regime,
            v_star: r.fixed_point,
            class: r.class,
            v_minus: b.map(|b| b.0),
            v_plus: b.map(|b| b.1),
        })
    }
}

/// `xi` values where the class may change: `1 - C2/C3`, `beta`, `1/2`,
/// `C1/C3`, restricted to `[0, 1]`, sorted and deduplicated.
pub fn boundary_candidates(template: &DmSpec) -> Vec<f64> {
    let mut b: Vec<f64> = [template.xi_lower(), template.beta, 0.5, template.xi_upper()]
        .into_iter()
        .filter(|x| (0.0..=1.0).contains(x))
        .collect();
    b.sort_by(f64::total_cmp);
    b.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    b
}

/// Evaluates every grid point plus the boundary values lying within the
/// grid's range. Output is ascending in `xi`; points closer than 1e-15
/// are merged, keeping the grid value.
pub fn sweep_xi(template: &DmSpec, grid: &[f64]) -> Result<Vec<BifurcationPoint>> {
    if let Some(x) = grid.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return domain(format!("grid value {x} outside [0, 1]"));
    }
    if grid.is_empty() {
        return Ok(Vec::new());
    }
    let lo = grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // (xi, injected) so that grid values win ties.
    let mut xs: Vec<(f64, bool)> = grid.iter().map(|&x| (x, false)).collect();
    xs.extend(
        boundary_candidates(template)
            .into_iter()
            .filter(|&b| b >= lo && b <= hi)
            .map(|b| (b, true)),
    );
    xs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut merged: Vec<(f64, bool)> = Vec::with_capacity(xs.len());
    for p in xs {
        match merged.last_mut() {
            Some(last) if (p.0 - last.0).abs() <= 1e-15 => {
                if last.1 && !p.1 {
                    *last = p;
                }
            }
            _ => merged.push(p),
        }
    }
    merged
        .par_iter()
        .map(|&(xi, _)| BifurcationPoint::at(template, xi))
        .collect()
}

/// `xi_min, xi_min + step, ...` up to `xi_max`, each rounded to 12
/// decimals so that accumulated error does not perturb boundary hits.
pub fn xi_grid(xi_min: f64, xi_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(xi_max >= xi_min) {
        return domain(format!("invalid grid [{xi_min}, {xi_max}] step {step}"));
    }
    let n = ((xi_max - xi_min) / step + 1e-9).floor() as usize;
    Ok((0..=n)
        .map(|i| ((xi_min + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Boundary {
    pub xi: f64,
    /// Class just below `xi` (absent at `xi = 0`).
    pub left: Option<StabilityClass>,
    pub at: StabilityClass,
    /// Class just above `xi` (absent at `xi = 1`).
    pub right: Option<StabilityClass>,
}

impl Boundary {
    pub fn is_transition(&self) -> bool {
        let differs = |c: Option<StabilityClass>| c.is_some_and(|c| !c.same_kind(&self.at));
        differs(self.left) || differs(self.right)
    }
}

/// Each boundary candidate with the classes on either side, sampled at the
/// midpoints of the neighbouring intervals.
pub fn regime_boundaries(template: &DmSpec) -> Result<Vec<Boundary>> {
    let b = boundary_candidates(template);
    let class = |xi: f64| BifurcationPoint::at(template, xi).map(|p| p.class);
    b.iter()
        .enumerate()
        .map(|(i, &xi)| {
            let prev = if i == 0 { 0.0 } else { b[i - 1] };
            let next = b.get(i + 1).copied().unwrap_or(1.0);
            let left = if xi > 0.0 {
                Some(class(0.5 * (prev + xi))?)
            } else {
                None
            };
            let right = if xi < 1.0 {
                Some(class(0.5 * (xi + next))?)
            } else {
                None
            };
            Ok(Boundary {
                xi,
                left,
                at: class(xi)?,
                right,
            })
        })
        .collect()
}

/// Writes `xi,v_star,class,v_minus,v_plus` with empty fields for absent
/// period-2 points.
pub fn write_csv<W: std::io::Write>(points: &[BifurcationPoint], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["xi", "v_star", "class", "v_minus", "v_plus"])?;
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for p in points {
        w.write_record([
            p.xi.to_string(),
            p.v_star.to_string(),
            p.class.label().to_string(),
            opt(p.v_minus),
            opt(p.v_plus),
        ])?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig() -> DmSpec {
        DmSpec::new(3.0, 1.5, 2.0, 2.5, 0.3, 0.0).unwrap()
    }

    #[test]
    fn grid_rounding() {
        let g = xi_grid(0.0, 1.0, 0.001).unwrap();
        assert_eq!(g.len(), 1001);
        assert_eq!(g[300], 0.3);
        assert_eq!(g[1000], 1.0);
        assert!(xi_grid(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn sweep_injects_and_orders() {
        let pts = sweep_xi(&fig(), &[0.0, 0.25, 0.55, 1.0]).unwrap();
        let xs: Vec<f64> = pts.iter().map(|p| p.xi).collect();
        assert_eq!(xs.len(), 8);
        assert!(xs.windows(2).all(|w| w[0] < w[1]));
        for b in [0.3, 0.5, 0.6] {
            assert!(xs.contains(&b));
        }
        assert!(xs.iter().any(|&x| (x - 0.2).abs() < 1e-15));
        // Boundaries outside the grid hull are not injected.
        let pts = sweep_xi(&fig(), &[0.35, 0.45]).unwrap();
        assert_eq!(pts.len(), 2);
        assert!(sweep_xi(&fig(), &[1.5]).is_err());
    }

    #[test]
    fn endpoints() {
        let pts = sweep_xi(&fig(), &[0.0, 1.0]).unwrap();
        assert!((pts[0].v_star - 0.5).abs() < 1e-12);
        assert!((pts.last().unwrap().v_star - 1.5).abs() < 1e-12);
    }

    #[test]
    fn boundaries_of_examples() {
        let xs: Vec<f64> = regime_boundaries(&fig()).unwrap().iter().map(|b| b.xi).collect();
        let want = [0.2, 0.3, 0.5, 0.6];
        assert_eq!(xs.len(), 4);
        assert!(xs.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-12));
        let small = DmSpec::new(3.0, 1.0, 2.0, 2.0, 1.0 / 3.0, 0.0).unwrap();
        let b = regime_boundaries(&small).unwrap();
        let xs: Vec<f64> = b.iter().map(|b| b.xi).collect();
        assert_eq!(xs, vec![0.0, 1.0 / 3.0, 0.5]);
        assert_eq!(b[1].left, Some(StabilityClass::Asymptotic));
        assert_eq!(b[1].right, Some(StabilityClass::Unstable));
        let sym = DmSpec::new(3.0, 1.5, 1.5, 2.0, 0.5, 0.0).unwrap();
        for b in regime_boundaries(&sym).unwrap() {
            assert_ne!(b.left, Some(StabilityClass::Unstable));
            assert_ne!(b.right, Some(StabilityClass::Unstable));
        }
    }

    #[test]
    fn csv_has_empty_optionals() {
        let pts = sweep_xi(&fig(), &[0.1, 0.4]).unwrap();
        let mut buf = Vec::new();
        write_csv(&pts, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "xi,v_star,class,v_minus,v_plus");
        assert_eq!(lines[1], "0.1,0.5,finite_time,,");
        assert!(lines.last().unwrap().starts_with("0.4,1,unstable,0.75,1.375"));
    }
}
