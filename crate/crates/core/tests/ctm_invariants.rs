mod common;

use common::mapped_spec;
use dmflow_core::ctm::{diverge_flux, merge_flux, NetworkState, SimOptions, Simulator};
use dmflow_core::network::{
    build_beltway, build_dm, stationary_profile, stationary_states, BeltwayParams, DiagramParams,
    DmSpec, LinkRegime,
};
use dmflow_core::Error;
use proptest::prelude::*;

/// Random cell densities in `[0, kj]` drawn from `u`, cycling through it.
fn random_state(sim: &Simulator, u: &[f64], fractions: &[f64]) -> NetworkState {
    let mut it = u.iter().cycle();
    let mut state = sim.empty_state();
    for (i, cells) in state.links.iter_mut().enumerate() {
        let kj = sim.network().links[i].diagram.jam_density();
        for c in cells.iter_mut() {
            c.density = kj * it.next().unwrap();
            c.commodity1 = fractions[i];
        }
    }
    state
}

fn check_bounds(sim: &Simulator, state: &NetworkState) -> Result<(), TestCaseError> {
    for (i, cells) in state.links.iter().enumerate() {
        let kj = sim.network().links[i].diagram.jam_density();
        for c in cells {
            prop_assert!(c.density >= 0.0 && c.density <= kj, "density {} on link {i}", c.density);
            prop_assert!((0.0..=1.0).contains(&c.commodity1));
            prop_assert!(c.commodity1_density() <= c.density);
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dm_runs_conserve_and_stay_bounded(
        s in mapped_spec(),
        u in prop::collection::vec(0.0..=1.0f64, 1..50),
    ) {
        let net = build_dm(&s, &DiagramParams::default()).unwrap();
        let sim = Simulator::new(net, &SimOptions::default()).unwrap();
        let mut state = random_state(&sim, &u, &[s.xi, 1.0, 0.0, s.xi]);
        let dt = sim.dt();
        for _ in 0..300 {
            let before = sim.vehicles(&state);
            let share = state.links[0].last().unwrap().commodity1;
            let f = sim.step(&mut state);
            let after = sim.vehicles(&state);
            let net0 = f.origin_inflow.0 - f.destination_outflow.0;
            let net1 = f.origin_inflow.1 - f.destination_outflow.1;
            prop_assert!((after.0 - before.0 - dt * net0).abs() < 1e-10);
            prop_assert!((after.1 - before.1 - dt * net1).abs() < 1e-10);
            check_bounds(&sim, &state)?;
            let (q1, q2) = (f.link_in[1].0, f.link_in[2].0);
            if q1 > 0.0 && q2 > 0.0 {
                prop_assert!((q1 * (1.0 - share) - q2 * share).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn beltway_runs_conserve(
        beta in 0.0..0.9f64,
        xi in 0.0..0.9f64,
        n in 1usize..5,
        u in prop::collection::vec(0.0..=1.0f64, 1..30),
    ) {
        let net = build_beltway(&BeltwayParams::new(n, beta, xi), &DiagramParams::default()).unwrap();
        let sim = Simulator::new(net, &SimOptions::default()).unwrap();
        let fr = vec![0.0; sim.network().links.len()];
        let mut state = random_state(&sim, &u, &fr);
        for _ in 0..200 {
            let before = sim.vehicles(&state).0;
            let f = sim.step(&mut state);
            let after = sim.vehicles(&state).0;
            let net0 = f.origin_inflow.0 - f.destination_outflow.0;
            prop_assert!((after - before - sim.dt() * net0).abs() < 1e-10);
            check_bounds(&sim, &state)?;
        }
    }

    #[test]
    fn fifo_diverge(d0 in 0.0..5.0f64, s1 in 0.0..3.0f64, s2 in 0.0..3.0f64, xi in 0.0..=1.0f64) {
        let (q0, q1, q2) = diverge_flux(d0, s1, s2, xi);
        prop_assert!(q0 <= d0 && q1 <= s1 + 1e-12 && q2 <= s2 + 1e-12);
        prop_assert!((q1 - xi * q0).abs() < 1e-12 && (q1 + q2 - q0).abs() < 1e-12);
        // Maximal: one of the three constraints binds.
        let binds = (q0 - d0).abs() < 1e-12
            || (xi > 0.0 && (q1 - s1).abs() < 1e-12)
            || (xi < 1.0 && (q2 - s2).abs() < 1e-12);
        prop_assert!(binds);
        if q1 > 0.0 && q2 > 0.0 {
            prop_assert!((q1 / q2 - xi / (1.0 - xi)).abs() < 1e-9 * (1.0 + xi / (1.0 - xi)));
        }
    }

    #[test]
    fn merge_is_work_conserving(d1 in 0.0..3.0f64, d2 in 0.0..3.0f64, s3 in 0.0..3.0f64, beta in 0.0..=1.0f64) {
        let (q3, q1, q2) = merge_flux(d1, d2, s3, beta);
        prop_assert!(q1 <= d1 && q2 <= d2 && q3 <= s3 + 1e-12);
        prop_assert!((q3 - (d1 + d2).min(s3)).abs() < 1e-12);
        prop_assert!(q1 >= d1.min(beta * s3) - 1e-12);
        prop_assert!(q2 >= d2.min((1.0 - beta) * s3) - 1e-12);
    }

    /// A zero-speed shock on a cell boundary is a discrete fixed point.
    #[test]
    fn zero_speed_shock_persists(j in 1usize..20, xi in 0.205..0.295f64) {
        let s = DmSpec::new(2.5, 1.5, 2.0, 2.5, 0.3, xi).unwrap();
        let net = build_dm(&s, &DiagramParams::default()).unwrap();
        let fds = [0, 1, 2, 3].map(|i| net.links[i].diagram);
        let opts = SimOptions { horizon: 10.0, ..Default::default() };
        let sim = Simulator::new(net, &opts).unwrap();
        let l = j as f64 / 20.0;
        let states = stationary_states(&s);
        let zs = states.iter().find(|st| st.link2 == LinkRegime::Zs).unwrap();
        let prof = stationary_profile(&s, zs, 0.0, l, &fds).unwrap();
        let init = sim.state_from_profiles(&prof, &[xi, 1.0, 0.0, xi]).unwrap();
        let rec = sim.run(init.clone()).unwrap();
        for (a, b) in init.links.iter().flatten().zip(rec.final_state.links.iter().flatten()) {
            prop_assert!((a.density - b.density).abs() < 1e-10);
        }
    }
}

#[test]
fn cfl_violation_is_a_config_error() {
    let s = common::small(0.45);
    let net = build_dm(&s, &DiagramParams::default()).unwrap();
    let opts = SimOptions {
        dt: Some(0.051),
        ..Default::default()
    };
    assert!(matches!(Simulator::new(net.clone(), &opts), Err(Error::Config(_))));
    let opts = SimOptions {
        dt: Some(0.05),
        ..Default::default()
    };
    assert!(Simulator::new(net, &opts).is_ok());
}

#[test]
fn uniform_free_flow_link_is_unchanged() {
    // Link 3 alone at a uniform under-critical density with the rest empty
    // keeps its interior cells.
    let s = common::small(0.45);
    let net = build_dm(&s, &DiagramParams::default()).unwrap();
    let sim = Simulator::new(net, &SimOptions::default()).unwrap();
    let k = sim.network().links[3].diagram.under_critical_density(1.0).unwrap();
    let mut state = sim.uniform_state(&[0.0, 0.0, 0.0, k], &[0.45, 1.0, 0.0, 0.45]).unwrap();
    sim.step(&mut state);
    for c in &state.links[3][1..] {
        assert!((c.density - k).abs() < 1e-15);
    }
}

#[test]
fn run_starts_from_the_given_state() {
    let s = common::fig(0.4);
    let net = build_dm(&s, &DiagramParams::default()).unwrap();
    let opts = SimOptions {
        horizon: 5.0,
        ..Default::default()
    };
    let sim = Simulator::new(net, &opts).unwrap();
    let rec = sim.run(sim.empty_state()).unwrap();
    assert_eq!(rec.steps(), sim.steps());
    assert_eq!(rec.vehicles[0], 0.0);
    assert_eq!(rec.sections.len(), 2);
    let bad = NetworkState {
        t: 0.0,
        links: vec![],
    };
    assert!(sim.run(bad).is_err());
}
