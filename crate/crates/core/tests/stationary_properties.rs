use dmflow_core::network::{
    stationary::link_profile, stationary_profile, stationary_states, DiagramParams, DmSpec,
    LinkRegime,
};
use proptest::prelude::*;

/// Any admissible capacity vector, not only downstream bottlenecks.
fn any_spec() -> impl Strategy<Value = DmSpec> {
    (
        0.2..4.0f64,
        0.2..3.0f64,
        0.2..3.0f64,
        0.2..4.0f64,
        0.0..=1.0f64,
        0.0..=1.0f64,
    )
        .prop_map(|(c0, c1, c2, c3, beta, xi)| DmSpec::new(c0, c1, c2, c3, beta, xi).unwrap())
}

fn diagrams(s: &DmSpec) -> [dmflow_core::diagram::FundamentalDiagram; 4] {
    let p = DiagramParams::default();
    s.capacities().map(|c| p.diagram(c).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn catalog_is_never_empty_and_respects_capacities(s in any_spec()) {
        let states = stationary_states(&s);
        prop_assert!(!states.is_empty(), "{s:?}");
        let tol = 1e-12;
        for st in &states {
            prop_assert!(st.q >= 0.0);
            prop_assert!(st.q <= s.c0.min(s.c3).min(s.c1 + s.c2) + tol, "{st:?}");
            let (q1, q2) = st.link_flows(s.xi);
            prop_assert!(q1 <= s.c1 + tol && q2 <= s.c2 + tol, "{st:?}");
            if st.link1 == LinkRegime::C {
                prop_assert!((q1 - s.c1).abs() <= tol);
            }
            if st.link2 == LinkRegime::C {
                prop_assert!((q2 - s.c2).abs() <= tol);
            }
        }
    }

    /// Every catalog row yields a profile whose densities carry the row's
    /// flows.
    #[test]
    fn profiles_carry_the_stationary_flows(s in any_spec(), l in 0.01..0.99f64) {
        let fds = diagrams(&s);
        for st in stationary_states(&s) {
            let pick = |r: LinkRegime| match r {
                LinkRegime::Suc => 0.0,
                LinkRegime::Soc => 1.0,
                _ => l,
            };
            let prof = stationary_profile(&s, &st, pick(st.link1), pick(st.link2), &fds).unwrap();
            let (q1, q2) = st.link_flows(s.xi);
            for (i, q) in [st.q, q1, q2, st.q].into_iter().enumerate() {
                let p = &prof[i];
                for k in [p.under_density, p.over_density] {
                    prop_assert!(k >= 0.0 && k <= fds[i].jam_density() + 1e-12);
                    prop_assert!((fds[i].flow(k).unwrap() - q).abs() < 1e-9, "link {i} of {st:?}");
                }
            }
        }
    }

    /// Moving a zero-speed shock upstream adds vehicles.
    #[test]
    fn shock_mass_grows_with_congested_fraction(
        c in 0.5..2.0f64,
        frac in 0.05..0.95f64,
        l in 0.01..0.98f64,
    ) {
        let fd = DiagramParams::default().diagram(c).unwrap();
        let a = link_profile(&fd, frac * c, LinkRegime::Zs, l, 1.0).unwrap();
        let b = link_profile(&fd, frac * c, LinkRegime::Zs, l + 0.01, 1.0).unwrap();
        prop_assert!(b.total_vehicles() > a.total_vehicles());
        let cells = a.cell_densities(37);
        let mean = cells.iter().sum::<f64>() / 37.0;
        prop_assert!((mean - a.total_vehicles()).abs() < 1e-12);
    }
}

#[test]
fn regimes_reject_foreign_fractions() {
    let fd = DiagramParams::default().diagram(1.0).unwrap();
    assert!(link_profile(&fd, 0.5, LinkRegime::Suc, 0.3, 1.0).is_err());
    assert!(link_profile(&fd, 0.5, LinkRegime::Zs, 0.0, 1.0).is_err());
    assert!(link_profile(&fd, 0.5, LinkRegime::C, 0.5, 1.0).is_err());
    assert!(link_profile(&fd, 1.0, LinkRegime::C, 0.5, 1.0).is_ok());
}
