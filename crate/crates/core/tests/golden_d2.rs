//! The two-sector fixture under a 50% labor shock on S0, checked day by day
//! against a trajectory produced by `oracle/d2_golden.py`.

use std::path::PathBuf;

use shocknet_core::dynamics::BehavioralParams;
use shocknet_core::fixtures::load_fixture;
use shocknet_core::integrator::{simulate, IntegrationConfig};
use shocknet_core::shocks::Scenario;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * b.abs().max(1.0)
}

#[test]
fn matches_brute_force_oracle() {
    let fx = load_fixture(&root().join("data/fixtures/d2")).unwrap();
    let sc = Scenario::resolve(&fx.scenario, &fx.economy).unwrap();
    let golden = std::fs::read_to_string(
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/oracle/d2_labor_shock.csv"),
    )
    .unwrap();
    let mut lines = golden.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    let t_end = rows.last().unwrap()[0];

    let traj = simulate(
        &fx.economy,
        &sc,
        &BehavioralParams::default(),
        &IntegrationConfig::discrete(1.0),
        t_end,
    )
    .unwrap();
    assert_eq!(traj.len(), rows.len() + 1);

    for (row, s) in rows.iter().zip(&traj.states[1..]) {
        assert_eq!(row[0], s.t);
        let b2b = s.b2b_out();
        let mut model = vec![s.t];
        for i in 0..2 {
            model.extend([s.x[i], s.d[i], s.l[i], s.c[i], s.f[i], b2b[i]]);
        }
        model.extend(s.s.iter().copied());
        model.push(s.c_agg_d);
        assert_eq!(model.len(), header.len());
        for ((name, g), m) in header.iter().zip(row).zip(&model) {
            assert!(close(*m, *g), "t = {}: {name} model {m} oracle {g}", s.t);
        }
    }

    // labor capacity of S0 settles at half its baseline once the ramp is over
    let last = traj.states.last().unwrap();
    assert!(close(last.x[0], 0.5 * fx.economy.x0()[0]));
    let before = &traj.states[13];
    assert!(close(before.x[0], fx.economy.x0()[0]));
}
