//! Certification of completed runs: the invariant-domain bound, the density
//! floor, the decay exponent and the pointwise Riccati bound on the
//! boundary strip of the invariant domain.

pub mod oracle;
pub mod report;

use serde::{Deserialize, Serialize};

use crate::characteristics::{lemma_brackets, riccati_rhs_transformed, Direction};
use crate::error::{Error, Result};
use crate::gradients::{max_of, BoundParams, DataBounds, GradientField, LevelChoice};
use crate::solver::{RunResult, Termination};

pub use oracle::{oracle_study, predict_blowup, OracleReport, TraceReport, TraceSeeds};
pub use report::{emit_report, write_json, SERIES_HEADER};

/// Relative tolerance on `max{alpha, beta} <= M`.
pub const VIOLATION_TOLERANCE: f64 = 1e-6;
/// Absolute tolerance of the pointwise Riccati and bracket checks.
pub const LEMMA_TOLERANCE: f64 = 1e-9;
/// Relative slack of the floor obtained by integrating `tau_t = u_x`.
pub const INTERMEDIATE_TOLERANCE: f64 = 1e-6;
pub const MIN_FIT_SAMPLES: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsOptions {
    /// `[t_a, t_b]` for the decay fit.
    pub fit_window: [f64; 2],
    /// Fixed invariant-domain level; `None` picks `max(M_star, (1 + margin) initial max)`.
    #[serde(rename = "M", alias = "level")]
    pub level: Option<f64>,
    pub margin: f64,
    /// Number of snapshots written as `fields_XXXX.csv`.
    pub dump_fields: usize,
    pub traces: TraceSeeds,
}

impl Default for DiagnosticsOptions {
    fn default() -> Self {
        Self {
            fit_window: [20.0, 200.0],
            level: None,
            margin: 0.05,
            dump_fields: 5,
            traces: TraceSeeds::default(),
        }
    }
}

impl DiagnosticsOptions {
    pub fn validate(&self) -> Result<()> {
        let [a, b] = self.fit_window;
        if !(a >= 0.0 && b > a) {
            return Err(Error::Precondition(format!(
                "fit window [{a}, {b}] must satisfy 0 <= t_a < t_b"
            )));
        }
        if !(self.margin >= 0.0) {
            return Err(Error::domain("margin", self.margin, ">= 0"));
        }
        if let Some(m) = self.level {
            if !m.is_finite() {
                return Err(Error::domain("M", m, "finite"));
            }
        }
        self.traces.validate()
    }

    pub fn level_choice(&self) -> LevelChoice {
        match self.level {
            Some(m) => LevelChoice::Fixed(m),
            None => LevelChoice::Auto {
                margin: self.margin,
            },
        }
    }
}

/// Number of leading snapshots taken while the solution was still smooth.
pub fn certified_len(run: &RunResult) -> usize {
    match run.termination {
        Termination::SmoothnessLost { t } | Termination::NumericalFault { t, .. } => {
            run.snapshots.iter().take_while(|s| s.t < t).count()
        }
        _ => run.snapshots.len(),
    }
}

/// Gradient fields of the certified snapshots.
pub fn certified_fields(run: &RunResult, lambda: f64) -> Result<Vec<GradientField>> {
    run.snapshots[..certified_len(run)]
        .iter()
        .map(|s| run.solver.gradient_field(s, lambda))
        .collect()
}

/// Bounds of the initial data, and of the certified part of the run.
pub fn measured_bounds(run: &RunResult) -> Result<(DataBounds, DataBounds)> {
    let n = certified_len(run);
    if n == 0 {
        return Err(Error::Precondition(
            "the initial data fail the smoothness monitor".into(),
        ));
    }
    let gas = &run.solver.gas;
    let measure = |i: usize| {
        let s = &run.snapshots[i];
        DataBounds::measure(gas, &s.u, &s.eta, &s.m, &s.m_x)
    };
    let initial = measure(0);
    let mut sup = initial;
    for i in 1..n {
        let b = measure(i);
        sup.m_eta = sup.m_eta.max(b.m_eta);
        sup.tau_max = sup.tau_max.max(b.tau_max);
        sup.m_sbar = sup.m_sbar.max(b.m_sbar);
        sup.m_rbar = sup.m_rbar.max(b.m_rbar);
    }
    Ok((initial, sup))
}

/// Bound constants from the initial data with `M_eta` taken over the run,
/// so that the constants are valid a posteriori.
pub fn bound_params(run: &RunResult, level: LevelChoice) -> Result<BoundParams> {
    let (initial, sup) = measured_bounds(run)?;
    let data = DataBounds {
        m_eta: sup.m_eta,
        ..initial
    };
    let s0 = run.initial();
    let f0 = run.solver.gradient_field(s0, 0.0)?;
    BoundParams::new(
        &run.solver.gas,
        data,
        &f0.alpha_tilde,
        &f0.beta_tilde,
        &s0.eta,
        level,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantSample {
    pub t: f64,
    pub max_alpha: f64,
    pub max_beta: f64,
    pub violated: bool,
}

/// `max_x alpha`, `max_x beta` per certified snapshot. Refuses when the
/// level fails its preconditions.
pub fn invariant_monitor(run: &RunResult, params: &BoundParams) -> Result<Vec<InvariantSample>> {
    params.check_preconditions()?;
    let fields = certified_fields(run, params.lambda)?;
    Ok(invariant_samples(&run.times(), &fields, params.level))
}

pub fn invariant_samples(
    times: &[f64],
    fields: &[GradientField],
    level: f64,
) -> Vec<InvariantSample> {
    let limit = level * (1.0 + VIOLATION_TOLERANCE);
    fields
        .iter()
        .zip(times)
        .map(|(f, t)| {
            let (a, b) = (f.max_alpha(), f.max_beta());
            InvariantSample {
                t: *t,
                max_alpha: a,
                max_beta: b,
                violated: !(a.max(b) <= limit),
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FloorSample {
    pub t: f64,
    pub min_rho: f64,
    pub floor: f64,
    pub ok: bool,
}

/// `min_x rho(t) >= C_1 / (1 + t)` per certified snapshot.
pub fn density_floor_check(run: &RunResult, c1: f64) -> Vec<FloorSample> {
    let gas = &run.solver.gas;
    run.snapshots[..certified_len(run)]
        .iter()
        .map(|s| {
            let min_rho = s.min_rho(gas);
            let floor = c1 / (1.0 + s.t);
            FloorSample {
                t: s.t,
                min_rho,
                floor,
                ok: min_rho >= floor,
            }
        })
        .collect()
}

/// `min_x rho(t) >= 1 / (tau_max(0) + G t)` with `G` the running maximum
/// of `u_x`, up to a relative slack for the discrete time integration.
pub fn intermediate_floor_check(run: &RunResult, tau_max0: f64) -> Vec<FloorSample> {
    let gas = &run.solver.gas;
    let t0 = run.initial().t;
    run.snapshots[..certified_len(run)]
        .iter()
        .zip(&run.running_max_ux)
        .map(|(s, g)| {
            let min_rho = s.min_rho(gas);
            let floor = 1.0 / (tau_max0 + g.max(0.0) * (s.t - t0));
            FloorSample {
                t: s.t,
                min_rho,
                floor,
                ok: min_rho >= floor * (1.0 - INTERMEDIATE_TOLERANCE),
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub exponent: f64,
    pub intercept: f64,
    /// Root-mean-square residual in `log(min rho)`.
    pub residual: f64,
    pub samples: usize,
    pub window: [f64; 2],
}

/// Least-squares fit of `log(min rho) = intercept + exponent log(1 + t)`
/// over the samples with `t` in the window.
pub fn decay_fit(times: &[f64], min_rho: &[f64], window: [f64; 2]) -> Result<DecayFit> {
    if times.len() != min_rho.len() {
        return Err(Error::LengthMismatch {
            name: "min_rho",
            expected: times.len(),
            got: min_rho.len(),
        });
    }
    let [a, b] = window;
    if !(b > a && a >= 0.0) {
        return Err(Error::Precondition(format!(
            "fit window [{a}, {b}] must satisfy 0 <= t_a < t_b"
        )));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(min_rho)
        .filter(|(t, r)| **t >= a && **t <= b && **r > 0.0)
        .map(|(t, r)| ((1.0 + t).ln(), r.ln()))
        .unzip();
    let n = xs.len();
    if n < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples {
            got: n,
            need: MIN_FIT_SAMPLES,
        });
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - exponent * x).powi(2))
        .sum();
    Ok(DecayFit {
        exponent,
        intercept,
        residual: (ss / nf).sqrt(),
        samples: n,
        window,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaSummary {
    /// Grid points with `M/2 <= alpha <= M` and `beta <= M`.
    pub points: usize,
    /// Largest `d+ alpha - K_1 M (M - alpha)`.
    pub max_excess: f64,
    pub min_drift: f64,
    pub min_slope: f64,
    pub min_quadratic: f64,
    /// Largest `quadratic - 5M/4`.
    pub max_quadratic_excess: f64,
    pub violated: bool,
}

/// Checks the forward growth bound and the bracket signs on the strip
/// `M/2 <= alpha <= M`, `beta <= M`.
pub fn lemma_check(
    run: &RunResult,
    fields: &[GradientField],
    params: &BoundParams,
) -> Result<LemmaSummary> {
    let gas = &run.solver.gas;
    let (big_m, lambda, k1) = (params.level, params.lambda, params.k1);
    let mut s = LemmaSummary {
        points: 0,
        max_excess: f64::NEG_INFINITY,
        min_drift: f64::INFINITY,
        min_slope: f64::INFINITY,
        min_quadratic: f64::INFINITY,
        max_quadratic_excess: f64::NEG_INFINITY,
        violated: false,
    };
    for (state, f) in run.snapshots.iter().zip(fields) {
        for i in 0..f.len() {
            let (a, b) = (f.alpha[i], f.beta[i]);
            if !(a >= 0.5 * big_m && a <= big_m && b <= big_m) {
                continue;
            }
            let (eta, m_x) = (state.eta[i], f.m_x[i]);
            let value = riccati_rhs_transformed(a, b, eta, m_x, lambda, Direction::Forward, gas)?;
            let br = lemma_brackets(a, eta, m_x, lambda, gas.gamma);
            s.points += 1;
            s.max_excess = s.max_excess.max(value - k1 * big_m * (big_m - a));
            s.min_drift = s.min_drift.min(br.drift);
            s.min_slope = s.min_slope.min(br.slope);
            s.min_quadratic = s.min_quadratic.min(br.quadratic);
            s.max_quadratic_excess = s.max_quadratic_excess.max(br.quadratic - 1.25 * big_m);
        }
    }
    s.violated = s.points > 0
        && !(s.max_excess <= LEMMA_TOLERANCE
            && s.min_drift >= -LEMMA_TOLERANCE
            && s.min_slope >= -LEMMA_TOLERANCE
            && s.min_quadratic >= -LEMMA_TOLERANCE
            && s.max_quadratic_excess <= LEMMA_TOLERANCE);
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsentropicSummary {
    pub initial_max: f64,
    pub running_max: f64,
    /// Largest `|alpha_tilde|, |beta_tilde|` of the initial data, or 1 when that is zero.
    pub scale: f64,
    pub ok: bool,
}

/// Running maximum of `max(alpha_tilde, beta_tilde)` against its initial value.
pub fn isentropic_invariance(fields: &[GradientField]) -> Option<IsentropicSummary> {
    let first = fields.first()?;
    let initial_max = first.max_tilde();
    let running_max = fields
        .iter()
        .map(|f| f.max_tilde())
        .fold(initial_max, f64::max);
    let abs = max_of(&[first.max_tilde().abs(), first.min_tilde().abs()]);
    let scale = if abs > 0.0 { abs } else { 1.0 };
    Some(IsentropicSummary {
        initial_max,
        running_max,
        scale,
        ok: running_max <= initial_max + VIOLATION_TOLERANCE * scale,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantSummary {
    pub tolerance: f64,
    pub violated: bool,
    pub violations: usize,
    /// `max_t max_x{alpha, beta} / M`.
    pub max_ratio: f64,
    pub first_violation: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FloorSummary {
    pub violated: bool,
    pub violations: usize,
    /// `min_t min_rho / floor`.
    pub min_ratio: f64,
    /// Range of `min_rho (1 + t)` over the certified snapshots.
    pub min_scaled: f64,
    pub max_scaled: f64,
}

impl FloorSummary {
    fn of(samples: &[FloorSample]) -> Self {
        let violations = samples.iter().filter(|s| !s.ok).count();
        let scaled = samples.iter().map(|s| s.min_rho * (1.0 + s.t));
        Self {
            violated: violations > 0,
            violations,
            min_ratio: samples
                .iter()
                .map(|s| s.min_rho / s.floor)
                .fold(f64::INFINITY, f64::min),
            min_scaled: scaled.clone().fold(f64::INFINITY, f64::min),
            max_scaled: scaled.fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// One row of `series.csv`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub t: f64,
    pub min_rho: f64,
    pub max_alpha: f64,
    pub max_beta: f64,
    pub max_ux: f64,
    pub floor: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub scenario: String,
    pub gamma: f64,
    pub bounds: BoundParams,
    pub initial_bounds: DataBounds,
    /// Suprema over the certified snapshots.
    pub run_bounds: DataBounds,
    pub termination: Termination,
    pub steps: usize,
    pub snapshots: usize,
    pub certified_snapshots: usize,
    pub certified_until: f64,
    pub invariant: InvariantSummary,
    pub floor: FloorSummary,
    pub intermediate_floor: FloorSummary,
    pub lemma: LemmaSummary,
    pub isentropic: Option<IsentropicSummary>,
    pub fit: Option<DecayFit>,
    pub fit_note: Option<String>,
    /// Either the invariant-domain bound or the density floor failed.
    pub violated: bool,
}

/// A certificate together with the per-snapshot data it summarizes.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub certificate: Certificate,
    pub series: Vec<SeriesRow>,
    pub fields: Vec<GradientField>,
}

/// Runs every check over the smooth part of `run`.
pub fn certify(run: &RunResult, scenario: &str, opts: &DiagnosticsOptions) -> Result<Analysis> {
    opts.validate()?;
    let (initial_bounds, run_bounds) = measured_bounds(run)?;
    let bounds = bound_params(run, opts.level_choice())?;
    let invariant = invariant_monitor(run, &bounds)?;
    let fields = certified_fields(run, bounds.lambda)?;
    let floor = density_floor_check(run, bounds.c1);
    let intermediate = intermediate_floor_check(run, initial_bounds.tau_max);
    let lemma = lemma_check(run, &fields, &bounds)?;
    let isentropic = if initial_bounds.m_d == 0.0 {
        isentropic_invariance(&fields)
    } else {
        None
    };

    let series: Vec<SeriesRow> = invariant
        .iter()
        .zip(&floor)
        .zip(&fields)
        .map(|((inv, fl), f)| SeriesRow {
            t: inv.t,
            min_rho: fl.min_rho,
            max_alpha: inv.max_alpha,
            max_beta: inv.max_beta,
            max_ux: f.max_u_x(),
            floor: fl.floor,
        })
        .collect();

    let (fit, fit_note) = {
        let t: Vec<f64> = series.iter().map(|r| r.t).collect();
        let r: Vec<f64> = series.iter().map(|r| r.min_rho).collect();
        match decay_fit(&t, &r, opts.fit_window) {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        }
    };

    let violations = invariant.iter().filter(|s| s.violated).count();
    let invariant = InvariantSummary {
        tolerance: VIOLATION_TOLERANCE,
        violated: violations > 0,
        violations,
        max_ratio: invariant
            .iter()
            .map(|s| s.max_alpha.max(s.max_beta) / bounds.level)
            .fold(f64::NEG_INFINITY, f64::max),
        first_violation: invariant.iter().find(|s| s.violated).map(|s| s.t),
    };
    let floor = FloorSummary::of(&floor);
    let n = fields.len();
    let certificate = Certificate {
        scenario: scenario.to_string(),
        gamma: run.solver.gas.gamma,
        bounds,
        initial_bounds,
        run_bounds,
        termination: run.termination.clone(),
        steps: run.steps,
        snapshots: run.snapshots.len(),
        certified_snapshots: n,
        certified_until: run.snapshots[n - 1].t,
        violated: invariant.violated || floor.violated,
        invariant,
        floor,
        intermediate_floor: FloorSummary::of(&intermediate),
        lemma,
        isentropic,
        fit,
        fit_note,
    };
    Ok(Analysis {
        certificate,
        series,
        fields,
    })
}
