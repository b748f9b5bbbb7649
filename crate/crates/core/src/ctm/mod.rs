//! Multi-commodity cell-transmission model on a [`Network`].
//!
//! Every link is split into equal cells. Each step computes all interior,
//! junction, and boundary fluxes from the current state and then updates
//! total and commodity-1 densities with the same conservative difference.

mod flux;

pub use flux::{diverge_flux, link_flux, merge_flux, CellState};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::stationary::LinkProfile;
use crate::network::{Junction, Network, Split};

/// Discretization and run length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    /// Cells per link when `dx` is not given.
    pub cells_per_link: usize,
    /// Target cell length; each link uses the nearest whole number of cells.
    pub dx: Option<f64>,
    /// Time step; `None` picks 0.9 of the largest CFL-stable step.
    pub dt: Option<f64>,
    /// Simulated time.
    pub horizon: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            cells_per_link: 20,
            dx: None,
            dt: None,
            horizon: 400.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkState {
    pub t: f64,
    /// Cells of each link, upstream to downstream.
    pub links: Vec<Vec<CellState>>,
}

/// Fluxes of one step, per link, as `(total, commodity 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFluxes {
    pub link_in: Vec<(f64, f64)>,
    pub link_out: Vec<(f64, f64)>,
    pub origin_inflow: (f64, f64),
    pub destination_outflow: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub dt: f64,
    pub section_links: Vec<usize>,
    pub section_names: Vec<String>,
    /// `sections[j][i]`: out-flux of section `j` during step `i`.
    pub sections: Vec<Vec<f64>>,
    /// Vehicles on the network before the first step and after each step.
    pub vehicles: Vec<f64>,
    pub vehicles_commodity1: Vec<f64>,
    /// Total origin inflow and destination outflow rates per step.
    pub inflow: Vec<f64>,
    pub outflow: Vec<f64>,
    pub final_state: NetworkState,
}

impl RunRecord {
    pub fn steps(&self) -> usize {
        self.inflow.len()
    }

    /// End time of step `i`.
    pub fn time(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.dt
    }

    pub fn section(&self, link: usize) -> Option<&[f64]> {
        self.section_links
            .iter()
            .position(|&l| l == link)
            .map(|j| self.sections[j].as_slice())
    }

    /// Long-format CSV: `t,section,flux`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "section", "flux"])?;
        for i in 0..self.steps() {
            for (j, name) in self.section_names.iter().enumerate() {
                w.write_record([
                    self.time(i).to_string(),
                    name.clone(),
                    self.sections[j][i].to_string(),
                ])?;
            }
        }
        w.flush()
    }
}

#[derive(Debug, Clone)]
pub struct Simulator {
    network: Network,
    dt: f64,
    cells: Vec<usize>,
    dx: Vec<f64>,
    steps: usize,
    /// Commodity share assigned to empty cells at start.
    empty_fraction: f64,
}

impl Simulator {
    pub fn new(network: Network, opts: &SimOptions) -> Result<Self> {
        network.validate()?;
        if opts.cells_per_link == 0 && opts.dx.is_none() {
            return Err(Error::Config("cells_per_link must be positive".into()));
        }
        if !(opts.horizon >= 0.0) {
            return Err(Error::Config(format!("negative horizon {}", opts.horizon)));
        }
        let cells: Vec<usize> = match opts.dx {
            Some(dx) if dx > 0.0 => network
                .links
                .iter()
                .map(|l| ((l.length / dx).round() as usize).max(1))
                .collect(),
            Some(dx) => return Err(Error::Config(format!("non-positive cell length {dx}"))),
            None => vec![opts.cells_per_link; network.links.len()],
        };
        let dx: Vec<f64> = network
            .links
            .iter()
            .zip(&cells)
            .map(|(l, &m)| l.length / m as f64)
            .collect();
        let speed = |i: usize| {
            let fd = &network.links[i].diagram;
            fd.free_flow_speed().max(fd.congested_wave_speed())
        };
        let dt = match opts.dt {
            Some(dt) if dt > 0.0 => dt,
            Some(dt) => return Err(Error::Config(format!("non-positive time step {dt}"))),
            None => {
                0.9 * (0..network.links.len())
                    .map(|i| dx[i] / speed(i))
                    .fold(f64::INFINITY, f64::min)
            }
        };
        for (i, link) in network.links.iter().enumerate() {
            if speed(i) * dt > dx[i] * (1.0 + 1e-12) {
                return Err(Error::Config(format!(
                    "CFL violated on link {}: wave speed {} x dt {dt} > dx {}",
                    link.name,
                    speed(i),
                    dx[i]
                )));
            }
        }
        let empty_fraction = network
            .junctions
            .iter()
            .find_map(|j| match j {
                Junction::Origin { commodity1, .. } => Some(*commodity1),
                _ => None,
            })
            .unwrap_or(0.0);
        Ok(Self {
            steps: (opts.horizon / dt).round() as usize,
            network,
            dt,
            cells,
            dx,
            empty_fraction,
        })
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dx(&self, link: usize) -> f64 {
        self.dx[link]
    }

    pub fn cells(&self, link: usize) -> usize {
        self.cells[link]
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn empty_state(&self) -> NetworkState {
        NetworkState {
            t: 0.0,
            links: self
                .cells
                .iter()
                .map(|&m| vec![CellState::new(0.0, self.empty_fraction); m])
                .collect(),
        }
    }

    /// Uniform density on each link with the given commodity-1 shares.
    pub fn uniform_state(&self, densities: &[f64], fractions: &[f64]) -> Result<NetworkState> {
        let profiles: Vec<LinkProfile> = densities
            .iter()
            .zip(&self.network.links)
            .map(|(&k, l)| LinkProfile::uniform(k, l.length))
            .collect();
        self.profile_state(&profiles, fractions, densities.len())
    }

    /// Cell averages of the given link profiles.
    pub fn state_from_profiles(
        &self,
        profiles: &[LinkProfile],
        fractions: &[f64],
    ) -> Result<NetworkState> {
        self.profile_state(profiles, fractions, profiles.len())
    }

    fn profile_state(
        &self,
        profiles: &[LinkProfile],
        fractions: &[f64],
        given: usize,
    ) -> Result<NetworkState> {
        let n = self.network.links.len();
        if given != n || fractions.len() != n {
            return Err(Error::Config(format!(
                "initial state describes {given} links with {} fractions, network has {n}",
                fractions.len()
            )));
        }
        let links = profiles
            .iter()
            .zip(fractions)
            .enumerate()
            .map(|(i, (p, &f))| {
                p.cell_densities(self.cells[i])
                    .into_iter()
                    .map(|k| CellState::new(k, f))
                    .collect()
            })
            .collect();
        let state = NetworkState { t: 0.0, links };
        self.check_state(&state)?;
        Ok(state)
    }

    pub fn check_state(&self, state: &NetworkState) -> Result<()> {
        if state.links.len() != self.network.links.len() {
            return Err(Error::Config("state does not match network".into()));
        }
        for (i, cells) in state.links.iter().enumerate() {
            let kj = self.network.links[i].diagram.jam_density();
            if cells.len() != self.cells[i] {
                return Err(Error::Config(format!("link {i} has {} cells", cells.len())));
            }
            for c in cells {
                if !(c.density >= 0.0 && c.density <= kj * (1.0 + 1e-12)) {
                    return Err(Error::Config(format!(
                        "density {} outside [0, {kj}] on link {i}",
                        c.density
                    )));
                }
                if !(0.0..=1.0).contains(&c.commodity1) {
                    return Err(Error::Config(format!(
                        "commodity share {} outside [0, 1]",
                        c.commodity1
                    )));
                }
            }
        }
        Ok(())
    }

    /// `(all vehicles, commodity-1 vehicles)`.
    pub fn vehicles(&self, state: &NetworkState) -> (f64, f64) {
        let mut total = 0.0;
        let mut c1 = 0.0;
        for (cells, dx) in state.links.iter().zip(&self.dx) {
            for c in cells {
                total += c.density * dx;
                c1 += c.commodity1_density() * dx;
            }
        }
        (total, c1)
    }

    /// Advances `state` by one time step and returns the fluxes used.
    pub fn step(&self, state: &mut NetworkState) -> StepFluxes {
        let links = &self.network.links;
        let n = links.len();
        let demand = |i: usize| {
            let c = state.links[i][self.cells[i] - 1];
            links[i].diagram.demand_unchecked(c.density)
        };
        let supply = |i: usize| links[i].diagram.supply_unchecked(state.links[i][0].density);
        let tail_share = |i: usize| state.links[i][self.cells[i] - 1].commodity1;

        let mut link_in = vec![(0.0, 0.0); n];
        let mut link_out = vec![(0.0, 0.0); n];
        let mut origin = (0.0, 0.0);
        let mut destination = (0.0, 0.0);
        for j in &self.network.junctions {
            match *j {
                Junction::Origin {
                    link,
                    demand: d,
                    commodity1,
                } => {
                    let q = d.min(supply(link));
                    link_in[link] = (q, commodity1 * q);
                    origin.0 += q;
                    origin.1 += commodity1 * q;
                }
                Junction::Destination { link, supply: s } => {
                    let q = demand(link).min(s);
                    let phi = tail_share(link) * q;
                    link_out[link] = (q, phi);
                    destination.0 += q;
                    destination.1 += phi;
                }
                Junction::Diverge {
                    inbound,
                    outbound: [a, b],
                    split,
                } => {
                    let share = tail_share(inbound);
                    let p = match split {
                        Split::Commodity => share,
                        Split::Fixed(p) => p,
                    };
                    let (q0, qa, qb) = diverge_flux(demand(inbound), supply(a), supply(b), p);
                    link_out[inbound] = (q0, share * q0);
                    match split {
                        Split::Commodity => {
                            link_in[a] = (qa, qa);
                            link_in[b] = (qb, 0.0);
                        }
                        Split::Fixed(_) => {
                            link_in[a] = (qa, share * qa);
                            link_in[b] = (qb, share * qb);
                        }
                    }
                }
                Junction::Merge {
                    inbound: [a, b],
                    outbound,
                    priority,
                } => {
                    let (q, qa, qb) = merge_flux(demand(a), demand(b), supply(outbound), priority);
                    let (pa, pb) = (tail_share(a) * qa, tail_share(b) * qb);
                    link_out[a] = (qa, pa);
                    link_out[b] = (qb, pb);
                    link_in[outbound] = (q, pa + pb);
                }
            }
        }

        let mut interior: Vec<(f64, f64)> = Vec::new();
        for i in 0..n {
            let fd = &links[i].diagram;
            let kj = fd.jam_density();
            let r = self.dt / self.dx[i];
            let cells = &mut state.links[i];
            let m = cells.len();
            interior.clear();
            interior.extend(cells.windows(2).map(|w| link_flux(w[0], fd, w[1], fd)));
            for c in 0..m {
                let fin = if c == 0 { link_in[i] } else { interior[c - 1] };
                let fout = if c == m - 1 { link_out[i] } else { interior[c] };
                let cell = &mut cells[c];
                let k = cell.density + r * (fin.0 - fout.0);
                let k1 = cell.commodity1_density() + r * (fin.1 - fout.1);
                let k = k.clamp(0.0, kj);
                cell.commodity1 = if k > 1e-13 * kj {
                    (k1 / k).clamp(0.0, 1.0)
                } else if fin.0 > 0.0 {
                    (fin.1 / fin.0).clamp(0.0, 1.0)
                } else {
                    cell.commodity1
                };
                cell.density = k;
            }
        }
        state.t += self.dt;
        StepFluxes {
            link_in,
            link_out,
            origin_inflow: origin,
            destination_outflow: destination,
        }
    }

    /// Runs the configured number of steps from `initial`.
    pub fn run(&self, initial: NetworkState) -> Result<RunRecord> {
        self.check_state(&initial)?;
        let sections = &self.network.sections;
        let mut rec = RunRecord {
            dt: self.dt,
            section_links: sections.clone(),
            section_names: sections
                .iter()
                .map(|&s| self.network.links[s].name.clone())
                .collect(),
            sections: vec![Vec::with_capacity(self.steps); sections.len()],
            vehicles: Vec::with_capacity(self.steps + 1),
            vehicles_commodity1: Vec::with_capacity(self.steps + 1),
            inflow: Vec::with_capacity(self.steps),
            outflow: Vec::with_capacity(self.steps),
            final_state: initial,
        };
        let (v, v1) = self.vehicles(&rec.final_state);
        rec.vehicles.push(v);
        rec.vehicles_commodity1.push(v1);
        for _ in 0..self.steps {
            let f = self.step(&mut rec.final_state);
            for (j, &s) in sections.iter().enumerate() {
                rec.sections[j].push(f.link_out[s].0);
            }
            rec.inflow.push(f.origin_inflow.0);
            rec.outflow.push(f.destination_outflow.0);
            let (v, v1) = self.vehicles(&rec.final_state);
            rec.vehicles.push(v);
            rec.vehicles_commodity1.push(v1);
        }
        Ok(rec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{build_dm, stationary_profile, stationary_states, DiagramParams, DmSpec};

    fn dm(xi: f64) -> (DmSpec, Network) {
        let spec = DmSpec::new(3.0, 1.0, 2.0, 2.0, 1.0 / 3.0, xi).unwrap();
        let net = build_dm(&spec, &DiagramParams::default()).unwrap();
        (spec, net)
    }

    #[test]
    fn defaults_and_cfl() {
        let (_, net) = dm(0.45);
        let sim = Simulator::new(net.clone(), &SimOptions::default()).unwrap();
        assert!((sim.dt() - 0.045).abs() < 1e-15);
        assert_eq!(sim.cells(0), 20);
        let bad = SimOptions {
            dt: Some(0.1),
            ..Default::default()
        };
        assert!(matches!(Simulator::new(net, &bad), Err(Error::Config(_))));
    }

    #[test]
    fn zero_horizon_echoes_initial_state() {
        let (_, net) = dm(0.45);
        let opts = SimOptions {
            horizon: 0.0,
            ..Default::default()
        };
        let sim = Simulator::new(net, &opts).unwrap();
        let init = sim.empty_state();
        let rec = sim.run(init.clone()).unwrap();
        assert_eq!(rec.final_state, init);
        assert_eq!(rec.steps(), 0);
    }

    #[test]
    fn empty_network_without_demand_stays_empty() {
        let (mut spec, _) = dm(0.45);
        spec.c0 = 3.0;
        let mut net = build_dm(&spec, &DiagramParams::default()).unwrap();
        if let Junction::Origin { demand, .. } = &mut net.junctions[0] {
            *demand = 0.0;
        }
        let opts = SimOptions {
            horizon: 10.0,
            ..Default::default()
        };
        let sim = Simulator::new(net, &opts).unwrap();
        let rec = sim.run(sim.empty_state()).unwrap();
        assert!(rec.final_state.links.iter().flatten().all(|c| c.density == 0.0));
    }

    #[test]
    fn stationary_state_is_kept() {
        let (spec, net) = dm(0.45);
        let fds = [0, 1, 2, 3].map(|i| net.links[i].diagram);
        let ss = stationary_states(&spec)[0];
        let prof = stationary_profile(&spec, &ss, 1.0, 0.0, &fds).unwrap();
        let opts = SimOptions {
            horizon: 50.0,
            ..Default::default()
        };
        let sim = Simulator::new(net, &opts).unwrap();
        let init = sim
            .state_from_profiles(&prof, &[spec.xi, 1.0, 0.0, spec.xi])
            .unwrap();
        let rec = sim.run(init.clone()).unwrap();
        for (a, b) in init.links.iter().flatten().zip(rec.final_state.links.iter().flatten()) {
            assert!((a.density - b.density).abs() < 1e-10);
        }
    }

    #[test]
    fn conservation_from_empty() {
        let (_, net) = dm(0.45);
        let opts = SimOptions {
            horizon: 60.0,
            ..Default::default()
        };
        let sim = Simulator::new(net, &opts).unwrap();
        let rec = sim.run(sim.empty_state()).unwrap();
        for i in 0..rec.steps() {
            let dn = rec.vehicles[i + 1] - rec.vehicles[i];
            assert!((dn - sim.dt() * (rec.inflow[i] - rec.outflow[i])).abs() < 1e-10);
        }
        assert!(rec.vehicles.last().unwrap() > &0.0);
    }
}
