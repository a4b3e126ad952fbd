//! Acceptance gate: runs every primary criterion at its stated tolerance
//! and prints one PASS/FAIL line each. Exits nonzero if any line fails.
//!
//! Run with `cargo test -p euler1d --test acceptance` (about a minute in
//! the test profile on one core).

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use euler1d::characteristics::{
    d_eta_along, riccati_rhs_tilde, riccati_rhs_transformed, OracleVariable,
};
use euler1d::diagnostics::oracle::{
    oracle_snapshot_interval, oracle_study, OracleReport, TraceSeeds,
};
use euler1d::diagnostics::{bound_params, Analysis};
use euler1d::{
    certify, Boundary, DiagnosticsOptions, Direction, FieldState, GasConstants, GasSpec, Grid,
    Numerics, Profile, RunResult, ScenarioSpec, Solver, Termination,
};

const HORIZON: f64 = 200.0;
const CELLS: usize = 4096;
const RUNTIME_LIMIT: Duration = Duration::from_secs(120);

struct Outcome {
    spec: ScenarioSpec,
    run: RunResult,
    analysis: Analysis,
    elapsed: Duration,
}

fn rarefaction() -> Profile {
    Profile::Rarefaction {
        amplitude: 2.0,
        width: 5.0,
        eta0: 1.0,
        m0: 1.0,
    }
}

fn nonisentropic() -> Profile {
    Profile::Nonisentropic {
        entropy_amplitude: 0.5,
        entropy_width: 10.0,
        amplitude: 2.0,
        width: 5.0,
        eta0: 1.0,
    }
}

fn scenario(name: &str, gamma: f64, profile: Profile, n: usize, horizon: f64) -> ScenarioSpec {
    ScenarioSpec {
        name: name.into(),
        gas: GasSpec::new(gamma),
        grid: Grid::new(-100.0, 100.0, n, Boundary::Frozen).unwrap(),
        profile,
        horizon,
        snapshot_interval: 1.0,
    }
}

fn integrate(spec: &ScenarioSpec) -> euler1d::Result<RunResult> {
    let numerics = Numerics::default();
    let (gas, state) = spec.initial_state(numerics.order)?;
    Solver::new(spec.grid, gas, numerics)?.run(state, spec.run_options())
}

fn execute(spec: ScenarioSpec) -> euler1d::Result<Outcome> {
    let start = Instant::now();
    let run = integrate(&spec)?;
    let elapsed = start.elapsed();
    let analysis = certify(&run, &spec.name, &DiagnosticsOptions::default())?;
    Ok(Outcome {
        spec,
        run,
        analysis,
        elapsed,
    })
}

struct Gate {
    failed: usize,
}

impl Gate {
    fn report(&mut self, id: &str, pass: bool, detail: String) {
        if !pass {
            self.failed += 1;
        }
        println!("{} {id}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
}

fn reached_horizon(o: &Outcome) -> bool {
    matches!(o.run.termination, Termination::Horizon { .. })
}

fn criterion_decay(gate: &mut Gate, o: &Outcome) {
    let c = &o.analysis.certificate;
    match c.fit {
        Some(fit) => {
            let pass = (-1.15..=-0.85).contains(&fit.exponent)
                && o.elapsed <= RUNTIME_LIMIT
                && reached_horizon(o);
            gate.report(
                "C1 decay order",
                pass,
                format!(
                    "exponent {:.4} over t in [{}, {}] ({} samples, rms {:.2e}), runtime {:.1} s, {:?}",
                    fit.exponent,
                    fit.window[0],
                    fit.window[1],
                    fit.samples,
                    fit.residual,
                    o.elapsed.as_secs_f64(),
                    o.run.termination
                ),
            );
        }
        None => gate.report(
            "C1 decay order",
            false,
            format!("no fit: {}", c.fit_note.clone().unwrap_or_default()),
        ),
    }
}

fn criterion_floor(gate: &mut Gate, runs: &[&Outcome]) {
    let mut pass = true;
    let mut parts = vec![];
    for o in runs {
        let c = &o.analysis.certificate;
        pass &= !c.floor.violated && reached_horizon(o) && c.certified_snapshots == c.snapshots;
        parts.push(format!(
            "{}: C1 {:.4}, {} violations in {} snapshots, min rho/floor {:.4}",
            o.spec.name, c.bounds.c1, c.floor.violations, c.certified_snapshots, c.floor.min_ratio
        ));
    }
    gate.report("C2 density floor", pass, parts.join("; "));
}

fn criterion_invariant(gate: &mut Gate, runs: &[Outcome]) {
    let gammas: std::collections::BTreeSet<u64> =
        runs.iter().map(|o| o.spec.gas.gamma.to_bits()).collect();
    let mut pass = runs.len() >= 5 && gammas.len() >= 4;
    let mut parts = vec![];
    for o in runs {
        let c = &o.analysis.certificate;
        pass &= !c.invariant.violated && c.invariant.max_ratio <= 1.0 + 1e-6;
        parts.push(format!(
            "{} (gamma {:.4}): M {:.4}, max ratio {:.6}, until t={}",
            o.spec.name, c.gamma, c.bounds.level, c.invariant.max_ratio, c.certified_until
        ));
    }
    gate.report("C3 invariant domain", pass, parts.join("; "));
}

fn criterion_lemma(gate: &mut Gate, runs: &[Outcome]) {
    let mut pass = true;
    let mut points = 0;
    let mut excess = f64::NEG_INFINITY;
    let (mut drift, mut slope, mut quad) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut quad_excess = f64::NEG_INFINITY;
    for o in runs {
        let l = &o.analysis.certificate.lemma;
        pass &= !l.violated;
        points += l.points;
        if l.points > 0 {
            excess = excess.max(l.max_excess);
            drift = drift.min(l.min_drift);
            slope = slope.min(l.min_slope);
            quad = quad.min(l.min_quadratic);
            quad_excess = quad_excess.max(l.max_quadratic_excess);
        }
    }
    pass &= points > 0;
    gate.report(
        "C4 growth lemma",
        pass,
        format!(
            "{points} strip points; max excess {excess:.3e}; min brackets {drift:.3e}, {slope:.3e}, {quad:.3e}; max quadratic - 5M/4 {quad_excess:.3e}"
        ),
    );
}

fn oracle_run(n: usize) -> euler1d::Result<OracleReport> {
    let mut spec = scenario("nonisentropic", 3.0, nonisentropic(), n, 20.0);
    let numerics = Numerics::default();
    let (gas, state) = spec.initial_state(numerics.order)?;
    spec.snapshot_interval = oracle_snapshot_interval(spec.grid.dx(), &state, &gas);
    let run = Solver::new(spec.grid, gas, numerics)?.run(state, spec.run_options())?;
    let params = bound_params(&run, DiagnosticsOptions::default().level_choice())?;
    oracle_study(&run, &TraceSeeds::default(), params.lambda)
}

fn criterion_oracle(gate: &mut Gate) {
    let (base, fine) = match (oracle_run(CELLS), oracle_run(2 * CELLS)) {
        (Ok(b), Ok(f)) => (b, f),
        (b, f) => {
            let err = b.err().or(f.err()).unwrap();
            gate.report("C5 oracle", false, format!("run failed: {err}"));
            return;
        }
    };
    let count = |d: Direction| {
        let v = match d {
            Direction::Forward => OracleVariable::AlphaTilde,
            Direction::Backward => OracleVariable::BetaTilde,
        };
        base.traces.iter().filter(|t| t.variable == v).count()
    };
    let (fwd, bwd) = (count(Direction::Forward), count(Direction::Backward));
    let mut pass = fwd >= 10 && bwd >= 10 && base.max_relative_discrepancy <= 0.05;
    let mut parts = vec![format!("{fwd} forward, {bwd} backward traces")];
    for v in [
        OracleVariable::AlphaTilde,
        OracleVariable::Alpha,
        OracleVariable::BetaTilde,
        OracleVariable::Beta,
    ] {
        let (b, f) = (base.max_for(v), fine.max_for(v));
        let ratio = b / f;
        pass &= ratio >= 1.7;
        parts.push(format!("{v:?} {b:.3e} -> {f:.3e} (x{ratio:.2})"));
    }
    gate.report("C5 oracle", pass, parts.join("; "));
}

fn criterion_identities(gate: &mut Gate, runs: &[Outcome]) {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let gammas = [1.4, 5.0 / 3.0, 2.0, 3.0];
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let gamma = gammas[rng.gen_range(0..gammas.len())];
        let gas: GasConstants<f64> =
            GasConstants::new(gamma, GasConstants::unit_k(gamma), 1.0).unwrap();
        let eta: f64 = rng.gen_range(0.1..3.0);
        let m_x: f64 = rng.gen_range(-1.0..1.0);
        let at: f64 = rng.gen_range(-3.0..3.0);
        let bt: f64 = rng.gen_range(-3.0..3.0);
        let lambda: f64 = rng.gen_range(0.0..2.0);
        let (a, b) = (at + lambda * eta, bt + lambda * eta);
        for dir in [Direction::Forward, Direction::Backward] {
            let opposite = match dir {
                Direction::Forward => bt,
                Direction::Backward => at,
            };
            let frem = riccati_rhs_tilde(at, bt, eta, m_x, dir, &gas).unwrap();
            let d_eta = d_eta_along(dir, eta, opposite, m_x, &gas).unwrap();
            let new = riccati_rhs_transformed(a, b, eta, m_x, lambda, dir, &gas).unwrap();
            let scale = frem.abs() + (lambda * d_eta).abs();
            worst = worst.max((new - frem - lambda * d_eta).abs() / scale.max(f64::MIN_POSITIVE));
        }
    }
    let mut field_worst: f64 = 0.0;
    for o in runs {
        let lambda = o.analysis.certificate.bounds.lambda;
        for (s, f) in o.run.snapshots.iter().zip(&o.analysis.fields) {
            for i in 0..f.len() {
                let sum = f.alpha_tilde[i] + f.beta_tilde[i] - 2.0 * f.u_x[i];
                let shift = f.alpha[i] - f.alpha_tilde[i] - lambda * s.eta[i];
                let shift_b = f.beta[i] - f.beta_tilde[i] - lambda * s.eta[i];
                let scale = 1f64.max(f.alpha_tilde[i].abs() + f.beta_tilde[i].abs());
                field_worst =
                    field_worst.max(sum.abs().max(shift.abs()).max(shift_b.abs()) / scale);
            }
        }
    }
    gate.report(
        "C6 algebraic identities",
        worst <= 1e-10 && field_worst <= 1e-12,
        format!("Riccati forms: worst relative {worst:.2e} over 1000 states; field identities: worst {field_worst:.2e}"),
    );
}

fn periodic(n: usize) -> ScenarioSpec {
    ScenarioSpec {
        name: "periodic".into(),
        gas: GasSpec::new(1.4),
        grid: Grid::new(0.0, 1.0, n, Boundary::Periodic).unwrap(),
        profile: Profile::Sinusoidal {
            u_amplitude: 0.01,
            eta_amplitude: 0.005,
            entropy_amplitude: 0.2,
            eta0: 1.0,
            modes: 1,
        },
        horizon: 2.0,
        snapshot_interval: 0.5,
    }
}

fn criterion_sanity(gate: &mut Gate, runs: &[Outcome]) {
    let static_m = runs.iter().all(|o| {
        let m0 = &o.run.initial().m;
        o.run.snapshots.iter().all(|s| s.m == *m0)
    });

    let mut finals: Vec<FieldState> = vec![];
    let mut drift: (f64, f64) = (0.0, 0.0);
    for n in [64usize, 192, 576] {
        let spec = periodic(n);
        let run = match integrate(&spec) {
            Ok(r) => r,
            Err(e) => {
                gate.report(
                    "C7 physics sanity",
                    false,
                    format!("periodic run n={n} failed: {e}"),
                );
                return;
            }
        };
        let gas = run.solver.gas;
        let dx = spec.grid.dx();
        let sums = |s: &FieldState| {
            let u: f64 = s.u.iter().sum::<f64>() * dx;
            let u_abs: f64 = s.u.iter().map(|v| v.abs()).sum::<f64>() * dx;
            let tau: f64 = s
                .eta
                .iter()
                .map(|e| gas.tau_from_eta(*e).unwrap())
                .sum::<f64>()
                * dx;
            (u, u_abs, tau)
        };
        if n == 192 {
            let (a, b) = (sums(run.initial()), sums(run.snapshots.last().unwrap()));
            let t = run.termination.time();
            drift = ((b.0 - a.0).abs() / a.1 / t, (b.2 - a.2).abs() / a.2 / t);
        }
        finals.push(run.snapshots.last().unwrap().clone());
    }
    // Cell i of a grid is cell 3i+1 of the grid refined by three.
    let err = |c: &FieldState, f: &FieldState| {
        (0..c.len())
            .map(|i| {
                (c.u[i] - f.u[3 * i + 1])
                    .abs()
                    .max((c.eta[i] - f.eta[3 * i + 1]).abs())
            })
            .fold(0.0, f64::max)
    };
    let (e1, e2) = (err(&finals[0], &finals[1]), err(&finals[1], &finals[2]));
    let order = (e1 / e2).ln() / 3f64.ln();
    gate.report(
        "C7 physics sanity",
        static_m && drift.0 <= 1e-8 && drift.1 <= 1e-8 && order >= 3.5,
        format!(
            "m static: {static_m}; drift per unit time u {:.2e}, tau {:.2e} (n=192); self-convergence order {order:.3} (n=64/192/576)",
            drift.0, drift.1
        ),
    );
}

fn criterion_isentropic(gate: &mut Gate, runs: &[&Outcome]) {
    let mut pass = !runs.is_empty();
    let mut parts = vec![];
    for o in runs {
        match &o.analysis.certificate.isentropic {
            Some(s) => {
                pass &= s.ok;
                parts.push(format!(
                    "{}: initial {:.6}, running {:.6}, excess/scale {:.2e}",
                    o.spec.name,
                    s.initial_max,
                    s.running_max,
                    (s.running_max - s.initial_max) / s.scale
                ));
            }
            None => {
                pass = false;
                parts.push(format!("{}: no isentropic summary", o.spec.name));
            }
        }
    }
    gate.report("C8 isentropic invariance", pass, parts.join("; "));
}

fn main() -> ExitCode {
    let specs = vec![
        scenario("rarefaction_g3", 3.0, rarefaction(), CELLS, HORIZON),
        scenario("rarefaction_g1.4", 1.4, rarefaction(), CELLS, HORIZON),
        scenario("nonisentropic_g3", 3.0, nonisentropic(), CELLS, HORIZON),
        scenario(
            "nonisentropic_g5/3",
            5.0 / 3.0,
            nonisentropic(),
            CELLS,
            HORIZON,
        ),
        scenario("nonisentropic_g2", 2.0, nonisentropic(), CELLS, HORIZON),
        scenario(
            "constant_g2",
            2.0,
            Profile::Constant {
                u0: 0.0,
                eta0: 1.0,
                m0: 1.0,
            },
            1024,
            HORIZON,
        ),
    ];
    let mut gate = Gate { failed: 0 };
    let mut runs = vec![];
    for spec in specs {
        let name = spec.name.clone();
        match execute(spec) {
            Ok(o) => runs.push(o),
            Err(e) => gate.report(&format!("run {name}"), false, e.to_string()),
        }
    }
    let find = |name: &str| runs.iter().find(|o| o.spec.name == name);

    match find("rarefaction_g3") {
        Some(o) => criterion_decay(&mut gate, o),
        None => gate.report("C1 decay order", false, "run missing".into()),
    }
    let floor_runs: Vec<&Outcome> = ["rarefaction_g3", "nonisentropic_g3"]
        .iter()
        .filter_map(|n| find(n))
        .collect();
    if floor_runs.len() == 2 {
        criterion_floor(&mut gate, &floor_runs);
    } else {
        gate.report("C2 density floor", false, "run missing".into());
    }
    criterion_invariant(&mut gate, &runs);
    criterion_lemma(&mut gate, &runs);
    criterion_oracle(&mut gate);
    criterion_identities(&mut gate, &runs);
    criterion_sanity(&mut gate, &runs);
    let iso: Vec<&Outcome> = runs
        .iter()
        .filter(|o| o.spec.profile.is_isentropic())
        .collect();
    criterion_isentropic(&mut gate, &iso);

    println!("acceptance: {} failed", gate.failed);
    if gate.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
