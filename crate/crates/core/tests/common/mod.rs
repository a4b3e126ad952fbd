// Shared helpers for the integration tests. Each test binary includes it with `mod common;`.
#![allow(dead_code)]

use euler1d::{Boundary, GasSpec, Grid, Numerics, Profile, RunResult, ScenarioSpec, Solver};

pub fn window(n: usize) -> Grid {
    Grid::new(-100.0, 100.0, n, Boundary::Frozen).unwrap()
}

pub fn spec(gamma: f64, grid: Grid, profile: Profile, horizon: f64, interval: f64) -> ScenarioSpec {
    ScenarioSpec {
        name: "test".into(),
        gas: GasSpec::new(gamma),
        grid,
        profile,
        horizon,
        snapshot_interval: interval,
    }
}

pub fn run(spec: &ScenarioSpec) -> RunResult {
    let numerics = Numerics::default();
    let (gas, state) = spec.initial_state(numerics.order).unwrap();
    Solver::new(spec.grid, gas, numerics)
        .unwrap()
        .run(state, spec.run_options())
        .unwrap()
}

pub fn rarefaction(amplitude: f64) -> Profile {
    Profile::Rarefaction {
        amplitude,
        width: 5.0,
        eta0: 1.0,
        m0: 1.0,
    }
}
