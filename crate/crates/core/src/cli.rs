//! Command implementations behind the `dmflow` binary.
//!
//! Every command writes its primary output to the given writer (or to
//! files under `--out`) so that it can be driven from tests.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bifurcation::{sweep_xi, write_csv as write_sweep_csv, xi_grid};
use crate::ctm::Simulator;
use crate::error::Error;
use crate::extended::{
    beltway_classify, beltway_factor, beltway_half_life, dmn_classify_scaled, dmn_orbit,
    dmn_perturbation_factor, BeltwaySpec,
};
use crate::network::{build_beltway, build_dm, build_dmn};
use crate::poincare::{build_map, classify_stability, cobweb, iterate, Regime, StabilityClass};
use crate::scenario::{Format, Scenario};
use crate::validation::{
    agreement_grid, beltway_start, dmn_start, measure_beltway_ratio, validate_dmn,
    validate_family, validate_spec, ValidationOptions,
};

#[derive(Debug, Parser)]
#[command(name = "dmflow", version, about = "Diverge-merge traffic dynamics: return-map analysis and CTM simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Regime, fixed point, stability class, and period-2 points.
    Analyze(Common),
    /// Orbit of the return map and its cobweb segments.
    Orbit {
        #[command(flatten)]
        common: Common,
        /// Initial flow; for (DM)^n a comma-separated state (one value is
        /// broadcast).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        v0: Vec<f64>,
        #[arg(long, default_value_t = 60)]
        steps: usize,
    },
    /// Bifurcation data over a grid of route proportions.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.0)]
        xi_min: f64,
        #[arg(long, default_value_t = 1.0)]
        xi_max: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
    },
    /// Runs the cell-transmission simulation and records section fluxes.
    Simulate(Common),
    /// Compares simulation against the return map.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Validate every xi on a 0.01 grid away from class boundaries.
        #[arg(long)]
        family: bool,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario file (TOML).
    pub scenario: PathBuf,
    /// Overrides the route / turning proportion.
    #[arg(long)]
    pub xi: Option<f64>,
    /// Output directory; files are written there instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for configuration and input errors, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(Error::InsufficientData(_)) => 3,
            CliError::Model(_) => 2,
            CliError::Io(_) | CliError::Json(_) => 3,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    ValidationFailed,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::ValidationFailed => 1,
        }
    }
}

type CliResult = Result<Outcome, CliError>;

struct Ctx {
    scenario: Scenario,
    out: Option<PathBuf>,
    format: Format,
}

impl Ctx {
    fn new(c: &Common) -> Result<Self, CliError> {
        let mut scenario = Scenario::load(&c.scenario)?;
        if let Some(xi) = c.xi {
            scenario.set_xi(xi)?;
        }
        let out = c
            .out
            .clone()
            .or_else(|| scenario.output.dir.as_ref().map(PathBuf::from));
        let format = c.format.unwrap_or(scenario.output.format);
        Ok(Self {
            scenario,
            out,
            format,
        })
    }

    /// Writes `body` to `<out>/<name>` when an output directory is set,
    /// otherwise to `w`.
    fn emit(
        &self,
        w: &mut dyn Write,
        name: &str,
        body: impl FnOnce(&mut dyn Write) -> Result<(), CliError>,
    ) -> Result<(), CliError> {
        match &self.out {
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                let path = dir.join(name);
                let mut f = std::io::BufWriter::new(std::fs::File::create(&path)?);
                body(&mut f)?;
                f.flush()?;
                writeln!(w, "wrote {}", path.display())?;
                Ok(())
            }
            None => body(w),
        }
    }

    fn emit_json<T: Serialize>(&self, w: &mut dyn Write, name: &str, value: &T) -> Result<(), CliError> {
        self.emit(w, name, |f| {
            serde_json::to_writer_pretty(&mut *f, value)?;
            writeln!(f)?;
            Ok(())
        })
    }
}

pub fn run(cli: &Cli, w: &mut dyn Write) -> CliResult {
    match &cli.command {
        Command::Analyze(c) => analyze(&Ctx::new(c)?, w),
        Command::Orbit { common, v0, steps } => orbit(&Ctx::new(common)?, v0, *steps, w),
        Command::Sweep {
            common,
            xi_min,
            xi_max,
            step,
        } => sweep(&Ctx::new(common)?, *xi_min, *xi_max, *step, w),
        Command::Simulate(c) => simulate(&Ctx::new(c)?, w),
        Command::Validate { common, family } => validate(&Ctx::new(common)?, *family, w),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn analyze(ctx: &Ctx, w: &mut dyn Write) -> CliResult {
    let s = &ctx.scenario;
    if let Some((p, _)) = s.dmn_params() {
        let report = dmn_classify_scaled(p.n, p.xi, p.scale)?;
        let factor = dmn_perturbation_factor(p.n, p.xi)?;
        #[derive(Serialize)]
        struct Out<'a> {
            report: &'a crate::extended::DmnReport,
            perturbation_factor: f64,
        }
        let out = Out {
            report: &report,
            perturbation_factor: factor,
        };
        return match ctx.format {
            Format::Json => ctx.emit_json(w, "analyze.json", &out).map(|_| Outcome::Success),
            Format::Csv => {
                ctx.emit(w, "analyze.csv", |f| {
                    writeln!(f, "n,xi,pattern,analyzed,perturbation_factor")?;
                    let pattern = serde_json::to_value(&report.pattern)?;
                    writeln!(
                        f,
                        "{},{},{},{},{}",
                        p.n,
                        p.xi,
                        pattern["pattern"].as_str().unwrap_or(""),
                        report.analyzed,
                        factor
                    )?;
                    Ok(())
                })?;
                Ok(Outcome::Success)
            }
        };
    }
    if let Some((p, _)) = s.beltway_params() {
        let spec = BeltwaySpec::new(p.beta, p.xi, p.n)?;
        let factor = beltway_factor(&spec).ok();
        let class = beltway_classify(&spec);
        let half = beltway_half_life(&spec).ok();
        #[derive(Serialize)]
        struct Out {
            spec: BeltwaySpec,
            factor: Option<crate::extended::BeltwayFactor>,
            class: crate::extended::GridlockClass,
            half_life: Option<crate::extended::HalfLife>,
        }
        let out = Out {
            spec,
            factor,
            class,
            half_life: half,
        };
        match ctx.format {
            Format::Json => ctx.emit_json(w, "analyze.json", &out)?,
            Format::Csv => ctx.emit(w, "analyze.csv", |f| {
                writeln!(f, "n,beta,xi,per_pair,per_lap,class,half_life_pairs,half_life_laps")?;
                let class = serde_json::to_value(class)?;
                writeln!(
                    f,
                    "{},{},{},{},{},{},{},{}",
                    p.n,
                    p.beta,
                    p.xi,
                    fmt_opt(factor.map(|f| f.per_pair)),
                    fmt_opt(factor.map(|f| f.per_lap)),
                    class.as_str().unwrap_or(""),
                    fmt_opt(half.map(|h| h.pairs)),
                    fmt_opt(half.map(|h| h.laps)),
                )?;
                Ok(())
            })?,
        }
        return Ok(Outcome::Success);
    }
    let spec = s.dm_spec()?;
    let r = classify_stability(&spec);
    match ctx.format {
        Format::Json => ctx.emit_json(w, "analyze.json", &r)?,
        Format::Csv => ctx.emit(w, "analyze.csv", |f| {
            writeln!(f, "xi,regime,v_star,class,max_steps,v_minus,v_plus,note")?;
            let b = r.period2.bounds();
            let steps = match r.class {
                StabilityClass::FiniteTime { max_steps } => max_steps.map(|s| s.to_string()),
                _ => None,
            };
            let note = match r.regime {
                Regime::UpstreamBottleneck => "finite-time stable (upstream bottleneck)",
                Regime::MiddleBottleneck => "finite-time stable (middle bottleneck)",
                _ => "",
            };
            writeln!(
                f,
                "{},{},{},{},{},{},{},{}",
                spec.xi,
                r.regime,
                r.fixed_point,
                r.class,
                steps.unwrap_or_default(),
                fmt_opt(b.map(|b| b.0)),
                fmt_opt(b.map(|b| b.1)),
                note
            )?;
            Ok(())
        })?,
    }
    Ok(Outcome::Success)
}

fn orbit(ctx: &Ctx, v0: &[f64], steps: usize, w: &mut dyn Write) -> CliResult {
    let s = &ctx.scenario;
    if let Some((p, _)) = s.dmn_params() {
        let state: Vec<f64> = match v0 {
            [] => vec![2.0 * p.xi * p.scale; p.n],
            [v] => vec![*v; p.n],
            vs => vs.to_vec(),
        };
        let scaled: Vec<f64> = state.iter().map(|v| v / p.scale).collect();
        let orbit: Vec<Vec<f64>> = dmn_orbit(p.n, p.xi, &scaled, steps)?
            .into_iter()
            .map(|s| s.into_iter().map(|v| v * p.scale).collect())
            .collect();
        match ctx.format {
            Format::Json => ctx.emit_json(w, "orbit.json", &orbit)?,
            Format::Csv => ctx.emit(w, "orbit.csv", |f| {
                let cols: Vec<String> = (0..p.n).map(|i| format!("v{i}")).collect();
                writeln!(f, "step,{}", cols.join(","))?;
                for (i, st) in orbit.iter().enumerate() {
                    let vals: Vec<String> = st.iter().map(|v| v.to_string()).collect();
                    writeln!(f, "{i},{}", vals.join(","))?;
                }
                Ok(())
            })?,
        }
        return Ok(Outcome::Success);
    }
    if let Some((p, flow)) = s.beltway_params() {
        let spec = BeltwaySpec::new(p.beta, p.xi, p.n)?;
        let r = beltway_factor(&spec)?.per_pair;
        let start = v0.first().copied().unwrap_or(flow);
        let orbit: Vec<f64> = (0..=steps).map(|i| start * r.powi(i as i32)).collect();
        match ctx.format {
            Format::Json => ctx.emit_json(w, "orbit.json", &orbit)?,
            Format::Csv => ctx.emit(w, "orbit.csv", |f| write_orbit_csv(f, &orbit))?,
        }
        return Ok(Outcome::Success);
    }
    let spec = s.dm_spec()?;
    let map = build_map(&spec)?;
    let start = match v0 {
        [] => crate::poincare::fixed_point(&spec)?,
        [v] => *v,
        _ => return Err(Error::Config("a dm orbit takes a single --v0".into()).into()),
    };
    let orbit = iterate(&map, start, steps)?;
    let segs = cobweb(&map, start, steps)?;
    match ctx.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                map: crate::poincare::PiecewiseMap,
                orbit: &'a [f64],
                cobweb: &'a [crate::poincare::Segment],
            }
            ctx.emit_json(
                w,
                "orbit.json",
                &Out {
                    map,
                    orbit: &orbit,
                    cobweb: &segs,
                },
            )?;
        }
        Format::Csv => {
            ctx.emit(w, "orbit.csv", |f| write_orbit_csv(f, &orbit))?;
            if ctx.out.is_some() {
                ctx.emit(w, "cobweb.csv", |f| {
                    writeln!(f, "x0,y0,x1,y1")?;
                    for s in &segs {
                        writeln!(f, "{},{},{},{}", s.from.0, s.from.1, s.to.0, s.to.1)?;
                    }
                    Ok(())
                })?;
            }
        }
    }
    Ok(Outcome::Success)
}

fn write_orbit_csv(f: &mut dyn Write, orbit: &[f64]) -> Result<(), CliError> {
    writeln!(f, "step,v")?;
    for (i, v) in orbit.iter().enumerate() {
        writeln!(f, "{i},{v}")?;
    }
    Ok(())
}

fn sweep(ctx: &Ctx, xi_min: f64, xi_max: f64, step: f64, w: &mut dyn Write) -> CliResult {
    let spec = ctx.scenario.dm_spec()?;
    let grid = if xi_max < xi_min {
        Vec::new()
    } else {
        xi_grid(xi_min, xi_max, step)?
    };
    let points = sweep_xi(&spec, &grid)?;
    match ctx.format {
        Format::Json => ctx.emit_json(w, "sweep.json", &points)?,
        Format::Csv => ctx.emit(w, "sweep.csv", |f| Ok(write_sweep_csv(&points, f)?))?,
    }
    Ok(Outcome::Success)
}

fn simulate(ctx: &Ctx, w: &mut dyn Write) -> CliResult {
    let s = &ctx.scenario;
    let opts = s.sim_options()?;
    let rec = if let Some((p, pert)) = s.dmn_params() {
        let sim = Simulator::new(build_dmn(&p, &s.diagram)?, &opts)?;
        sim.run(dmn_start(&sim, &p, pert)?)?
    } else if let Some((p, flow)) = s.beltway_params() {
        let sim = Simulator::new(build_beltway(&p, &s.diagram)?, &opts)?;
        sim.run(beltway_start(&sim, flow)?)?
    } else {
        let spec = s.dm_spec()?;
        let sim = Simulator::new(build_dm(&spec, &s.diagram)?, &opts)?;
        sim.run(sim.empty_state())?
    };
    match ctx.format {
        Format::Json => ctx.emit_json(w, "run.json", &rec)?,
        Format::Csv => ctx.emit(w, "run.csv", |f| Ok(rec.write_csv(f)?))?,
    }
    Ok(Outcome::Success)
}

fn validate(ctx: &Ctx, family: bool, w: &mut dyn Write) -> CliResult {
    let s = &ctx.scenario;
    let opts = ValidationOptions {
        sim: s.sim_options()?,
        diagram: s.diagram,
        ..Default::default()
    };
    if let Some((p, pert)) = s.dmn_params() {
        let reports = [pert, -pert]
            .iter()
            .map(|&d| validate_dmn(&p, d, &opts))
            .collect::<crate::Result<Vec<_>>>()?;
        let passed = reports.iter().all(|r| r.agrees);
        ctx.emit_json(w, "validate.json", &reports)?;
        return Ok(if passed {
            Outcome::Success
        } else {
            Outcome::ValidationFailed
        });
    }
    if let Some((p, flow)) = s.beltway_params() {
        let m = measure_beltway_ratio(&p, flow, &opts)?;
        let passed = m.relative_error <= opts.extrema_tolerance;
        ctx.emit_json(w, "validate.json", &m)?;
        return Ok(if passed {
            Outcome::Success
        } else {
            Outcome::ValidationFailed
        });
    }
    let spec = s.dm_spec()?;
    if family {
        let grid = agreement_grid(&spec, 0.01, 0.01)?;
        let specs = grid
            .iter()
            .map(|&x| spec.with_xi(x))
            .collect::<crate::Result<Vec<_>>>()?;
        let reports = validate_family(&specs, &opts)?;
        let passed = reports.iter().all(|r| r.verdict_agrees);
        match ctx.format {
            Format::Json => ctx.emit_json(w, "validate.json", &reports)?,
            Format::Csv => ctx.emit(w, "validate.csv", |f| {
                writeln!(f, "xi,class,verdict,verdict_agrees,passed")?;
                for r in &reports {
                    writeln!(
                        f,
                        "{},{},{},{},{}",
                        r.spec.xi,
                        r.stability.class,
                        r.oscillation.verdict.label(),
                        r.verdict_agrees,
                        r.passed
                    )?;
                }
                Ok(())
            })?,
        }
        return Ok(if passed {
            Outcome::Success
        } else {
            Outcome::ValidationFailed
        });
    }
    let r = validate_spec(&spec, &opts)?;
    ctx.emit_json(w, "validate.json", &r)?;
    Ok(if r.passed {
        Outcome::Success
    } else {
        Outcome::ValidationFailed
    })
}

/// Parses arguments, runs, and returns the process exit code. Errors are
/// reported on stderr.
pub fn main_with_args<I, T>(args: I, w: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli, w) {
        Ok(o) => o.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Convenience for tests: runs with arguments and captures stdout.
pub fn run_to_string<I, T>(args: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let mut buf = Vec::new();
    let code = main_with_args(args, &mut buf);
    (code, String::from_utf8_lossy(&buf).into_owned())
}
