//! Scenario files (TOML).
//!
//! ```toml
//! [network]
//! kind = "dm"            # "dm", "dmn", or "beltway"
//! c0 = 3.0
//! c1 = 1.5
//! c2 = 2.0
//! c3 = 2.5
//! beta = 0.3
//! xi = 0.4
//!
//! [diagram]
//! shape = "triangular"   # or "greenshields"
//! free_flow_speed = 1.0
//! congested_wave_speed = 0.5
//!
//! [simulation]
//! cells_per_link = 20
//! dt = "auto"            # or a number
//! horizon = 400.0
//!
//! [output]
//! dir = "out"
//! format = "csv"         # or "json"
//! ```
//!
//! See `scenarios/SCHEMA.md` for every key.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ctm::SimOptions;
use crate::error::{Error, Result};
use crate::network::{BeltwayParams, DiagramParams, DmSpec, DmnParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub network: NetworkSection,
    #[serde(default)]
    pub diagram: DiagramParams,
    #[serde(default)]
    pub simulation: SimulationSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NetworkSection {
    Dm {
        c0: f64,
        c1: f64,
        c2: f64,
        c3: f64,
        beta: f64,
        xi: f64,
        #[serde(default = "unit_lengths")]
        lengths: [f64; 4],
    },
    Dmn {
        n: usize,
        xi: f64,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default = "dmn_priority")]
        priority: f64,
        #[serde(default = "one")]
        length: f64,
        /// Relative flow perturbation applied to the symmetric start.
        #[serde(default = "dmn_perturbation")]
        perturbation: f64,
    },
    Beltway {
        n: usize,
        beta: f64,
        xi: f64,
        #[serde(default = "one")]
        capacity: f64,
        #[serde(default = "one")]
        segment_length: f64,
        #[serde(default = "one")]
        ramp_length: f64,
        /// Mainline flow of the congested start, as a fraction of capacity.
        #[serde(default = "beltway_flow")]
        initial_flow: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn unit_lengths() -> [f64; 4] {
    [1.0; 4]
}

fn dmn_priority() -> f64 {
    0.2
}

fn dmn_perturbation() -> f64 {
    1e-3
}

fn beltway_flow() -> f64 {
    0.6
}

/// `"auto"` or a positive number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeStep {
    Value(f64),
    Keyword(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    #[serde(default = "cells")]
    pub cells_per_link: usize,
    pub dx: Option<f64>,
    pub dt: Option<TimeStep>,
    #[serde(default = "horizon")]
    pub horizon: f64,
}

fn cells() -> usize {
    20
}

fn horizon() -> f64 {
    400.0
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            cells_per_link: cells(),
            dx: None,
            dt: None,
            horizon: horizon(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<String>,
    #[serde(default)]
    pub format: Format,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        s.check()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    fn check(&self) -> Result<()> {
        let cfg = |e: Error| Error::Config(e.to_string());
        match self.network {
            NetworkSection::Dm { .. } => {
                self.dm_spec().map_err(cfg)?;
            }
            NetworkSection::Dmn { n, xi, scale, .. } => {
                if n == 0 || !(0.0..=1.0).contains(&xi) || !(scale > 0.0) {
                    return Err(Error::Config(format!(
                        "dmn network needs n >= 1, xi in [0, 1], positive scale (got n = {n}, xi = {xi}, scale = {scale})"
                    )));
                }
            }
            NetworkSection::Beltway {
                n,
                beta,
                xi,
                initial_flow,
                ..
            } => {
                crate::extended::BeltwaySpec::new(beta, xi, n).map_err(cfg)?;
                if !(initial_flow > 0.0 && initial_flow <= 1.0) {
                    return Err(Error::Config(format!(
                        "initial_flow must lie in (0, 1], got {initial_flow}"
                    )));
                }
            }
        }
        self.sim_options()?;
        Ok(())
    }

    pub fn kind(&self) -> &'static str {
        match self.network {
            NetworkSection::Dm { .. } => "dm",
            NetworkSection::Dmn { .. } => "dmn",
            NetworkSection::Beltway { .. } => "beltway",
        }
    }

    pub fn xi(&self) -> f64 {
        match self.network {
            NetworkSection::Dm { xi, .. }
            | NetworkSection::Dmn { xi, .. }
            | NetworkSection::Beltway { xi, .. } => xi,
        }
    }

    /// Replaces the route or turning proportion.
    pub fn set_xi(&mut self, value: f64) -> Result<()> {
        match &mut self.network {
            NetworkSection::Dm { xi, .. }
            | NetworkSection::Dmn { xi, .. }
            | NetworkSection::Beltway { xi, .. } => *xi = value,
        }
        self.check()
    }

    pub fn dm_spec(&self) -> Result<DmSpec> {
        match self.network {
            NetworkSection::Dm {
                c0,
                c1,
                c2,
                c3,
                beta,
                xi,
                lengths,
            } => DmSpec::new(c0, c1, c2, c3, beta, xi)?.with_lengths(lengths),
            _ => Err(Error::Config(format!(
                "a dm network is required, scenario has kind = \"{}\"",
                self.kind()
            ))),
        }
    }

    /// `(params, perturbation)` of a dmn scenario.
    pub fn dmn_params(&self) -> Option<(DmnParams, f64)> {
        match self.network {
            NetworkSection::Dmn {
                n,
                xi,
                scale,
                priority,
                length,
                perturbation,
            } => Some((
                DmnParams {
                    n,
                    xi,
                    scale,
                    priority,
                    length,
                },
                perturbation,
            )),
            _ => None,
        }
    }

    /// `(params, initial mainline flow)` of a beltway scenario.
    pub fn beltway_params(&self) -> Option<(BeltwayParams, f64)> {
        match self.network {
            NetworkSection::Beltway {
                n,
                beta,
                xi,
                capacity,
                segment_length,
                ramp_length,
                initial_flow,
            } => Some((
                BeltwayParams {
                    n,
                    beta,
                    xi,
                    capacity,
                    segment_length,
                    ramp_length,
                },
                initial_flow * capacity,
            )),
            _ => None,
        }
    }

    pub fn sim_options(&self) -> Result<SimOptions> {
        let s = &self.simulation;
        let dt = match &s.dt {
            None => None,
            Some(TimeStep::Keyword(k)) if k == "auto" => None,
            Some(TimeStep::Keyword(k)) => {
                return Err(Error::Config(format!(
                    "simulation.dt must be \"auto\" or a number, got \"{k}\""
                )))
            }
            Some(TimeStep::Value(v)) => Some(*v),
        };
        Ok(SimOptions {
            cells_per_link: s.cells_per_link,
            dx: s.dx,
            dt,
            horizon: s.horizon,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG: &str = r#"
[network]
kind = "dm"
c0 = 3.0
c1 = 1.5
c2 = 2.0
c3 = 2.5
beta = 0.3
xi = 0.4

[simulation]
dt = "auto"
"#;

    #[test]
    fn parses_dm() {
        let s = Scenario::parse(FIG).unwrap();
        let spec = s.dm_spec().unwrap();
        assert_eq!(spec.c3, 2.5);
        assert_eq!(s.sim_options().unwrap(), SimOptions::default());
        assert_eq!(s.diagram, DiagramParams::default());
        assert_eq!(s.output.format, Format::Csv);
    }

    #[test]
    fn errors_carry_locations() {
        let bad = FIG.replace("c1 = 1.5", "c1 = \"x\"");
        let e = Scenario::parse(&bad).unwrap_err().to_string();
        assert!(e.contains("line"), "{e}");
        let unknown = FIG.replace("beta = 0.3", "beta = 0.3\ngamma = 1");
        assert!(Scenario::parse(&unknown).is_err());
        let neg = FIG.replace("c1 = 1.5", "c1 = -1.5");
        assert!(matches!(Scenario::parse(&neg), Err(Error::Config(_))));
        let dt = FIG.replace("\"auto\"", "\"fast\"");
        assert!(Scenario::parse(&dt).is_err());
    }

    #[test]
    fn parses_other_kinds() {
        let s = Scenario::parse("[network]\nkind = \"beltway\"\nn = 4\nbeta = 0.3\nxi = 0.2\n").unwrap();
        let (p, v) = s.beltway_params().unwrap();
        assert_eq!((p.n, v), (4, 0.6));
        assert!(s.dm_spec().is_err());
        let s = Scenario::parse("[network]\nkind = \"dmn\"\nn = 2\nxi = 0.4\n[simulation]\ndt = 0.04\n").unwrap();
        assert_eq!(s.dmn_params().unwrap().0.priority, 0.2);
        assert_eq!(s.sim_options().unwrap().dt, Some(0.04));
    }
}
