//! Initial-condition library and run orchestration: single runs, refinement
//! ladders, and the per-run diagnostics pipeline.

use crate::diagnostics::{
    self, bounds_tracker, compute_summary, decay_fit, record, BoundsReport, DecayFit,
};
use crate::error::{Error, Result};
use crate::grid::{discrete_integral, Grid};
use crate::schemes::stepper::{SchemeConfig, Stepper};
use crate::state::{
    DiagnosticsRecord, Formulation, History, InitialDataSummary, PhysParams, State,
};

/// Family of initial conditions.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub enum ScenarioKind {
    /// Exact free-expansion data `(c, c(x - 1/2), c)`.
    Trivial { c: f64 },
    /// Free-expansion data plus cosine bumps on `u`, `theta` and sine bumps
    /// on `v` for each listed mode.
    Perturbed { c: f64, amp: f64, modes: Vec<usize> },
    /// Seeded low-order cosine series, clamped inside the given ranges.
    RandomSmooth {
        seed: u64,
        u_range: (f64, f64),
        theta_range: (f64, f64),
        v_amp: f64,
    },
}

/// One fully specified run.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub n: usize,
    pub beta: f64,
    pub alpha: f64,
    /// Final scaled time.
    pub t_hat_end: f64,
    /// Diagnostics cadence in scaled time.
    pub sample_every: f64,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 4 {
            return Err(Error::InvalidScenario(format!(
                "need at least 4 cells, got {}",
                self.n
            )));
        }
        if !(self.t_hat_end > 0.0) || !(self.sample_every > 0.0) {
            return Err(Error::InvalidScenario(
                "t_hat_end and sample_every must be positive".into(),
            ));
        }
        if !(self.beta >= 0.0) || !(self.alpha >= 0.0) {
            return Err(Error::InvalidScenario(
                "beta and alpha must be nonnegative".into(),
            ));
        }
        match &self.kind {
            ScenarioKind::Trivial { c } => {
                if !(*c > 0.0) {
                    return Err(Error::InvalidScenario(format!(
                        "trivial data needs c > 0, got {c}"
                    )));
                }
            }
            ScenarioKind::Perturbed { c, amp, modes } => {
                if !(*c > 0.0) {
                    return Err(Error::InvalidScenario(format!(
                        "perturbed data needs c > 0, got {c}"
                    )));
                }
                if !(*amp >= 0.0) || *amp >= 0.5 * c.min(1.0) {
                    return Err(Error::InvalidScenario(format!(
                        "perturbation amplitude {amp} must lie in [0, min(c,1)/2) for c = {c}"
                    )));
                }
                for &k in modes {
                    if k == 0 || 4 * k > self.n {
                        return Err(Error::InvalidScenario(format!(
                            "mode {k} is not resolved on {} cells",
                            self.n
                        )));
                    }
                }
            }
            ScenarioKind::RandomSmooth {
                u_range,
                theta_range,
                v_amp,
                ..
            } => {
                for (name, (lo, hi)) in [("u_range", u_range), ("theta_range", theta_range)] {
                    if !(*lo > 0.0) || !(hi > lo) {
                        return Err(Error::InvalidScenario(format!(
                            "{name} must satisfy 0 < lo < hi, got ({lo}, {hi})"
                        )));
                    }
                }
                if !(*v_amp >= 0.0) {
                    return Err(Error::InvalidScenario("v_amp must be nonnegative".into()));
                }
            }
        }
        Ok(())
    }

    pub fn params(&self) -> Result<PhysParams> {
        PhysParams::new(self.beta, self.alpha)
    }
}

/// splitmix64: tiny deterministic generator so seeded scenarios stay
/// bit-identical forever.
struct SplitMix64(u64);

impl SplitMix64 {
    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [-1, 1].
    fn symmetric(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    }
}

const RANDOM_MODES: usize = 6;

/// Build the initial scaled state at `t_hat = 0`.
pub fn make_initial(spec: &ScenarioSpec) -> Result<State> {
    spec.validate()?;
    let grid = Grid::new(spec.n)?;
    let pi = std::f64::consts::PI;
    let (u, vel, theta) = match &spec.kind {
        ScenarioKind::Trivial { c } => (
            vec![*c; spec.n],
            grid.nodes().iter().map(|x| c * (x - 0.5)).collect(),
            vec![*c; spec.n],
        ),
        ScenarioKind::Perturbed { c, amp, modes } => {
            let bump_cells = |x: f64| -> f64 {
                modes.iter().map(|&k| amp * (k as f64 * pi * x).cos()).sum()
            };
            let bump_nodes = |x: f64| -> f64 {
                modes.iter().map(|&k| amp * (k as f64 * pi * x).sin()).sum()
            };
            (
                grid.cell_centers().iter().map(|&x| c + bump_cells(x)).collect(),
                grid.nodes()
                    .iter()
                    .map(|&x| c * (x - 0.5) + bump_nodes(x))
                    .collect(),
                grid.cell_centers().iter().map(|&x| c + bump_cells(x)).collect(),
            )
        }
        ScenarioKind::RandomSmooth {
            seed,
            u_range,
            theta_range,
            v_amp,
        } => {
            let mut rng = SplitMix64(*seed);
            let mut series = |center: f64, half: f64| -> Vec<f64> {
                // Geometrically decaying coefficients with total swing below
                // 0.8 * half, so the range margins survive.
                let budget = 0.8 * half;
                let norm: f64 = (1..=RANDOM_MODES).map(|k| 0.5f64.powi(k as i32)).sum();
                let coeffs: Vec<f64> = (1..=RANDOM_MODES)
                    .map(|k| budget * 0.5f64.powi(k as i32) / norm * rng.symmetric())
                    .collect();
                grid.cell_centers()
                    .iter()
                    .map(|&x| {
                        let mut v = center;
                        for (k, a) in coeffs.iter().enumerate() {
                            v += a * ((k + 1) as f64 * pi * x).cos();
                        }
                        v.clamp(center - half * 0.99, center + half * 0.99)
                    })
                    .collect()
            };
            let u = series(0.5 * (u_range.0 + u_range.1), 0.5 * (u_range.1 - u_range.0));
            let theta = series(
                0.5 * (theta_range.0 + theta_range.1),
                0.5 * (theta_range.1 - theta_range.0),
            );
            let norm: f64 = (1..=RANDOM_MODES).map(|k| 0.5f64.powi(k as i32)).sum();
            let vcoeffs: Vec<f64> = (1..=RANDOM_MODES)
                .map(|k| v_amp * 0.5f64.powi(k as i32) / norm * rng.symmetric())
                .collect();
            let vel = grid
                .nodes()
                .iter()
                .map(|&x| {
                    let mut v = 0.0;
                    for (k, a) in vcoeffs.iter().enumerate() {
                        v += a * ((k + 1) as f64 * pi * x).sin();
                    }
                    v
                })
                .collect();
            (u, vel, theta)
        }
    };
    State::new(grid, Formulation::Scaled, 0.0, u, vel, theta)
}

/// Per-step counters accumulated over a run.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize)]
pub struct RunStats {
    pub steps: usize,
    pub rejections: usize,
    pub max_picard_iters: usize,
    pub dt_min_taken: f64,
    pub dt_max_taken: f64,
    /// Steps whose mean temperature left the admissible bracket.
    pub bracket_violations: usize,
    pub u_min: f64,
    pub u_max: f64,
    pub theta_min: f64,
    pub theta_max: f64,
}

/// Everything a finished (or partially finished) run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub summary: InitialDataSummary,
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: State,
    pub decay: Option<DecayFit>,
    pub bounds: BoundsReport,
    pub stats: RunStats,
    pub history: History,
}

/// A run that died mid-flight, with the partial series attached.
#[derive(Debug, Clone)]
pub struct RunError {
    pub source: Error,
    pub partial: Box<RunOutput>,
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.source)
    }
}

impl std::error::Error for RunError {}

/// Decay-window thresholds: enter below `0.1 * h1(0)`, leave at 100x the
/// round-off floor.
pub const DECAY_ENTER_FRACTION: f64 = 0.1;
pub const DECAY_EXIT_FLOOR: f64 = 1e-10;

/// Integrate the scaled system from `t_hat = 0` to `spec.t_hat_end`,
/// sampling diagnostics every `spec.sample_every`.
///
/// Deterministic for fixed inputs. On step failure the partial series is
/// returned inside the error.
pub fn run(spec: &ScenarioSpec, params: &PhysParams, cfg: &SchemeConfig) -> std::result::Result<RunOutput, Box<RunError>> {
    let build = || -> Result<(State, InitialDataSummary)> {
        spec.validate()?;
        params.validate()?;
        cfg.validate()?;
        if params.beta != spec.beta || params.alpha != spec.alpha {
            return Err(Error::InvalidParameter(format!(
                "scenario exponents (beta {}, alpha {}) disagree with params (beta {}, alpha {})",
                spec.beta, spec.alpha, params.beta, params.alpha
            )));
        }
        let state = make_initial(spec)?;
        let summary = compute_summary(&state, params)?;
        Ok((state, summary))
    };
    let (state, summary) = build().map_err(|source| {
        Box::new(RunError {
            source,
            partial: Box::new(empty_output(spec)),
        })
    })?;

    let mut stats = RunStats {
        dt_min_taken: f64::INFINITY,
        u_min: f64::INFINITY,
        theta_min: f64::INFINITY,
        u_max: f64::NEG_INFINITY,
        theta_max: f64::NEG_INFINITY,
        ..RunStats::default()
    };
    let mut records = Vec::new();
    let mut history = History::new();
    let mut stepper = match Stepper::new(*cfg, *params) {
        Ok(s) => s,
        Err(source) => {
            return Err(Box::new(RunError {
                source,
                partial: Box::new(empty_output(spec)),
            }))
        }
    };

    let first = record(&state, &summary, params).expect("initial state is valid");
    records.push(first);
    history.push(&state);
    track_state(&mut stats, &state, &summary);

    let mut cur = state;
    let total_samples = (spec.t_hat_end / spec.sample_every).ceil() as usize;
    let mut outcome: Result<()> = Ok(());
    'outer: for k in 1..=total_samples {
        let target = (k as f64 * spec.sample_every).min(spec.t_hat_end);
        if target <= records.last().map_or(0.0, |r| r.time) + 1e-12 {
            continue;
        }
        while cur.time < target - 1e-12 {
            match stepper.step_to(&cur, target) {
                Ok((next, report)) => {
                    stats.steps += 1;
                    stats.rejections += report.rejections;
                    stats.max_picard_iters = stats.max_picard_iters.max(report.picard_iters);
                    stats.dt_min_taken = stats.dt_min_taken.min(report.dt);
                    stats.dt_max_taken = stats.dt_max_taken.max(report.dt);
                    cur = next;
                    track_state(&mut stats, &cur, &summary);
                    history.push(&cur);
                }
                Err(source) => {
                    outcome = Err(source);
                    break 'outer;
                }
            }
        }
        if outcome.is_ok() {
            records.push(record(&cur, &summary, params).expect("accepted state is valid"));
        }
    }

    let h1_series: Vec<(f64, f64)> = records.iter().map(|r| (r.time, r.h1_dist)).collect();
    let decay = decay_fit(
        &h1_series,
        DECAY_ENTER_FRACTION * records[0].h1_dist,
        DECAY_EXIT_FLOOR,
    )
    .ok();
    let bounds = bounds_tracker(&records, &summary).expect("records are nonempty");
    let output = RunOutput {
        summary,
        records,
        final_state: cur,
        decay,
        bounds,
        stats,
        history,
    };
    match outcome {
        Ok(()) => Ok(output),
        Err(source) => Err(Box::new(RunError {
            source,
            partial: Box::new(output),
        })),
    }
}

fn empty_output(spec: &ScenarioSpec) -> RunOutput {
    let n = spec.n.max(4);
    let grid = Grid::new(n).expect("n >= 4");
    let state = State {
        grid,
        formulation: Formulation::Scaled,
        time: 0.0,
        u: vec![1.0; n],
        vel: vec![0.0; n + 1],
        theta: vec![1.0; n],
    };
    RunOutput {
        summary: InitialDataSummary {
            total_energy: 1.0,
            v0_mean: 0.0,
            asymptotic: 2.0 * 42.0f64.sqrt() - 12.0,
            entropy_const: 1.0,
            alpha1: 1.0,
            alpha2: 1.0,
        },
        records: Vec::new(),
        final_state: state,
        decay: None,
        bounds: BoundsReport {
            m_hat: 1.0,
            theta_min: 1.0,
            theta_max: 1.0,
            theta_bar_min: 1.0,
            theta_bar_max: 1.0,
            bracket_flags: 0,
        },
        stats: RunStats::default(),
        history: History::new(),
    }
}

fn track_state(stats: &mut RunStats, s: &State, summary: &InitialDataSummary) {
    stats.u_min = stats.u_min.min(s.u_min());
    stats.u_max = stats.u_max.max(s.u_max());
    stats.theta_min = stats.theta_min.min(s.theta_min());
    stats.theta_max = stats.theta_max.max(s.theta_max());
    let theta_bar = discrete_integral(&s.theta, &s.grid).expect("state is consistent");
    if theta_bar < summary.alpha1 - diagnostics::BRACKET_TOL
        || theta_bar > summary.alpha2 + diagnostics::BRACKET_TOL
    {
        stats.bracket_violations += 1;
    }
}

/// One rung of a refinement ladder.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RefinementLevel {
    pub n: usize,
    pub dt_max: f64,
    /// Interior max-norm error against the finest level; `None` on the
    /// finest level itself.
    pub err_vs_finest: Option<f64>,
    /// `log2(err_coarser / err_this)`; `None` where undefined and flagged
    /// indeterminate when errors sit at round-off.
    pub observed_order: Option<f64>,
}

/// Fraction of the domain near each wall excluded from interior error norms.
const INTERIOR_MARGIN: f64 = 0.1;

/// Error floor below which observed orders are meaningless.
pub const REFINEMENT_ROUNDOFF_FLOOR: f64 = 1e-12;

/// Run the same scenario on a ladder of `(n, dt_max)` rungs and measure
/// interior errors against the finest rung at the shared final time.
///
/// Every coarse sample point coincides with a fine node, so only a two-cell
/// average is ever interpolated.
pub fn refinement_study(
    spec: &ScenarioSpec,
    params: &PhysParams,
    cfg: &SchemeConfig,
    ladder: &[(usize, f64)],
) -> std::result::Result<Vec<RefinementLevel>, Box<RunError>> {
    if ladder.len() < 3 {
        return Err(Box::new(RunError {
            source: Error::InsufficientData(format!(
                "refinement ladder needs at least 3 levels, got {}",
                ladder.len()
            )),
            partial: Box::new(empty_output(spec)),
        }));
    }
    for pair in ladder.windows(2) {
        let ((n0, _), (n1, _)) = (pair[0], pair[1]);
        if n1 % n0 != 0 || (n1 / n0) % 2 != 0 {
            return Err(Box::new(RunError {
                source: Error::InvalidScenario(format!(
                    "ladder cell counts must refine by even factors, got {n0} -> {n1}"
                )),
                partial: Box::new(empty_output(spec)),
            }));
        }
    }

    let mut finals = Vec::new();
    for &(n, dt_max) in ladder {
        let level_spec = ScenarioSpec {
            n,
            ..spec.clone()
        };
        let level_cfg = SchemeConfig {
            dt_init: dt_max.min(cfg.dt_init),
            dt_max,
            ..*cfg
        };
        let out = run(&level_spec, params, &level_cfg)?;
        finals.push(out.final_state);
    }

    let finest = finals.last().unwrap();
    let nf = finest.grid.n();
    let mut levels = Vec::new();
    let mut prev_err: Option<f64> = None;
    for (idx, &(n, dt_max)) in ladder.iter().enumerate() {
        if idx + 1 == ladder.len() {
            levels.push(RefinementLevel {
                n,
                dt_max,
                err_vs_finest: None,
                observed_order: None,
            });
            continue;
        }
        let coarse = &finals[idx];
        let ratio = nf / n;
        let lo = (INTERIOR_MARGIN * n as f64).ceil() as usize;
        let hi = n - lo;
        let mut err = 0.0f64;
        for i in lo..hi {
            // Coarse cell center = fine node ratio*i + ratio/2.
            let m = ratio * i + ratio / 2;
            let fine_u = 0.5 * (finest.u[m - 1] + finest.u[m]);
            let fine_th = 0.5 * (finest.theta[m - 1] + finest.theta[m]);
            err = err.max((coarse.u[i] - fine_u).abs());
            err = err.max((coarse.theta[i] - fine_th).abs());
        }
        for j in lo..=hi {
            err = err.max((coarse.vel[j] - finest.vel[ratio * j]).abs());
        }
        let order = prev_err.map(|p| (p / err).log2()).filter(|_| {
            err > REFINEMENT_ROUNDOFF_FLOOR
                && prev_err.is_some_and(|p| p > REFINEMENT_ROUNDOFF_FLOOR)
        });
        levels.push(RefinementLevel {
            n,
            dt_max,
            err_vs_finest: Some(err),
            observed_order: order,
        });
        prev_err = Some(err);
    }
    Ok(levels)
}
