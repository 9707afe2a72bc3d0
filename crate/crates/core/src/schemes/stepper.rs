//! Implicit-midpoint IMEX time stepping with Picard iteration and adaptive
//! step control.
//!
//! Each Picard sweep performs, in order: a pointwise trapezoidal update of
//! `u`, a tridiagonal solve for the velocity-like field with the viscous flux
//! taken implicitly against the piecewise-linear (consistent) mass matrix,
//! and a tridiagonal solve for `theta` with conduction implicit and the
//! `kappa/u` coefficients lagged. Coefficients are frozen at the midpoint of
//! the previous iterate, so the converged update is the implicit midpoint
//! rule except for the compression term `-theta v_x / u`, which stays fully
//! implicit in `theta`.
//!
//! Consequences relied on elsewhere:
//! * trapezoid momentum and the zero mean of `w` are conserved to round-off,
//! * the energy `int(v^2/2 + theta)` (piecewise-linear velocity quadrature)
//!   drifts only through the compression term, proportionally to `dt`,
//! * steady states are exact fixed points up to the Picard tolerance.

use crate::error::{Error, FieldId, RejectReason, Result};
use crate::schemes::spatial::boundary_stress;
use crate::schemes::tridiag::solve_tridiagonal;
use crate::state::{Formulation, PhysParams, State};

/// Implicitness of the compression term in the theta solve (1 = backward).
const COMPRESSION_IMPLICITNESS: f64 = 1.0;

/// Step-control and nonlinear-iteration settings.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SchemeConfig {
    pub dt_init: f64,
    pub dt_max: f64,
    pub dt_min: f64,
    /// Growth factor applied as `dt / safety` after easy steps; in (0, 1).
    pub safety: f64,
    pub picard_max: usize,
    pub picard_tol: f64,
    /// Smallest admissible `u` or `theta` before the step is rejected.
    pub positivity_floor: f64,
    /// Test hook: setting this to false removes heat conduction.
    pub conduction_enabled: bool,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            dt_init: 1e-6,
            dt_max: 2.5e-5,
            dt_min: 1e-12,
            safety: 0.9,
            picard_max: 40,
            picard_tol: 1e-11,
            positivity_floor: 1e-9,
            conduction_enabled: true,
        }
    }
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.dt_min > 0.0
            && self.dt_min <= self.dt_init
            && self.dt_init <= self.dt_max
            && self.safety > 0.0
            && self.safety < 1.0
            && self.picard_max >= 1
            && self.picard_tol > 0.0
            && self.positivity_floor > 0.0;
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "scheme config out of range: {self:?}"
            )));
        }
        Ok(())
    }
}

/// Outcome bookkeeping for one accepted step.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct StepReport {
    /// dt actually taken (may undershoot `dt_min` when landing on a target).
    pub dt: f64,
    pub picard_iters: usize,
    pub rejections: usize,
    pub u_min: f64,
    pub theta_min: f64,
}

/// Adaptive stepper carrying the current dt across steps.
#[derive(Debug, Clone)]
pub struct Stepper {
    cfg: SchemeConfig,
    params: PhysParams,
    dt: f64,
}

impl Stepper {
    pub fn new(cfg: SchemeConfig, params: PhysParams) -> Result<Self> {
        cfg.validate()?;
        params.validate()?;
        Ok(Self {
            cfg,
            params,
            dt: cfg.dt_init,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    /// Advance one step, shrinking on rejection and growing after easy steps.
    pub fn step(&mut self, state: &State) -> Result<(State, StepReport)> {
        self.step_to(state, f64::INFINITY)
    }

    /// Advance one step without overshooting `target`; the last step before
    /// the target is stretched or clipped to land on it exactly.
    pub fn step_to(&mut self, state: &State, target: f64) -> Result<(State, StepReport)> {
        if target <= state.time {
            return Err(Error::InvalidParameter(format!(
                "step target {target} is not ahead of t = {}",
                state.time
            )));
        }
        let mut rejections = 0usize;
        let mut dt_try = self.dt.clamp(self.cfg.dt_min, self.cfg.dt_max);
        loop {
            let remaining = target - state.time;
            let landing = remaining.is_finite() && remaining <= 1.5 * dt_try;
            let dt_eff = if landing { remaining } else { dt_try };
            match advance_once(state, &self.params, &self.cfg, dt_eff) {
                Ok((next, iters)) => {
                    if !landing {
                        if iters * 3 <= self.cfg.picard_max {
                            self.dt = (dt_try / self.cfg.safety).min(self.cfg.dt_max);
                        } else {
                            self.dt = dt_try;
                        }
                    }
                    let mut next = next;
                    if landing {
                        next.time = target;
                    }
                    let report = StepReport {
                        dt: dt_eff,
                        picard_iters: iters,
                        rejections,
                        u_min: next.u_min(),
                        theta_min: next.theta_min(),
                    };
                    return Ok((next, report));
                }
                Err(reason) => {
                    rejections += 1;
                    dt_try = 0.5 * dt_eff;
                    self.dt = dt_try.max(self.cfg.dt_min);
                    if dt_try < self.cfg.dt_min {
                        return Err(Error::StepFailed {
                            time: state.time,
                            dt_min: self.cfg.dt_min,
                            reason,
                        });
                    }
                }
            }
        }
    }
}

/// One controller-driven step of the scaled system starting from `cfg.dt_init`.
pub fn step_scaled(
    s: &State,
    params: &PhysParams,
    cfg: &SchemeConfig,
) -> Result<(State, StepReport)> {
    s.require(Formulation::Scaled)?;
    Stepper::new(*cfg, *params)?.step(s)
}

/// One controller-driven step of the original-time system.
pub fn step_original(
    s: &State,
    params: &PhysParams,
    cfg: &SchemeConfig,
) -> Result<(State, StepReport)> {
    s.require(Formulation::Original)?;
    Stepper::new(*cfg, *params)?.step(s)
}

/// One controller-driven step of the w-form system.
pub fn step_wform(
    s: &State,
    params: &PhysParams,
    cfg: &SchemeConfig,
) -> Result<(State, StepReport)> {
    s.require(Formulation::WForm)?;
    Stepper::new(*cfg, *params)?.step(s)
}

struct FormulationTerms {
    /// Coefficient of `-u` in the `u` equation.
    u_damping: f64,
    /// Coefficient of `-vel` in the momentum equation.
    vel_damping: f64,
    sigma_b: f64,
    /// Whether the theta sources see `vel_x + u` instead of `vel_x`.
    grad_offset_by_u: bool,
    /// Whether the viscous coefficient carries `mu(u)`.
    variable_viscosity: bool,
}

fn terms_for(f: Formulation) -> FormulationTerms {
    match f {
        Formulation::Original => FormulationTerms {
            u_damping: 0.0,
            vel_damping: 0.0,
            sigma_b: boundary_stress(f),
            grad_offset_by_u: false,
            variable_viscosity: true,
        },
        Formulation::Scaled => FormulationTerms {
            u_damping: 1.0,
            vel_damping: 0.0,
            sigma_b: boundary_stress(f),
            grad_offset_by_u: false,
            variable_viscosity: true,
        },
        Formulation::WForm => FormulationTerms {
            u_damping: 0.0,
            vel_damping: 1.0,
            sigma_b: boundary_stress(f),
            grad_offset_by_u: true,
            variable_viscosity: false,
        },
    }
}

fn gradient_into(vel: &[f64], dx: f64, out: &mut [f64]) {
    for (i, w) in vel.windows(2).enumerate() {
        out[i] = (w[1] - w[0]) / dx;
    }
}

fn min_with_index(field: &[f64]) -> (f64, usize) {
    let mut min = f64::INFINITY;
    let mut at = 0;
    for (i, &v) in field.iter().enumerate() {
        if v < min {
            min = v;
            at = i;
        }
    }
    (min, at)
}

type Attempt = std::result::Result<(State, usize), RejectReason>;

/// A single dt attempt: Picard sweeps until the triple of fields settles.
fn advance_once(state: &State, params: &PhysParams, cfg: &SchemeConfig, dt: f64) -> Attempt {
    let n = state.grid.n();
    let dx = state.grid.dx();
    let terms = terms_for(state.formulation);
    let gamma = COMPRESSION_IMPLICITNESS;

    let u0 = &state.u;
    let v0 = &state.vel;
    let th0 = &state.theta;
    let mut vx0 = vec![0.0; n];
    gradient_into(v0, dx, &mut vx0);

    let mut u_it = u0.clone();
    let mut v_it = v0.clone();
    let mut th_it = th0.clone();
    let mut vx_it = vx0.clone();

    let mut u_new = vec![0.0; n];
    let mut u_mid = vec![0.0; n];
    let mut th_mid_lag = vec![0.0; n];
    let mut visc = vec![0.0; n];
    let mut pressure = vec![0.0; n];
    let mut vx_mid = vec![0.0; n];
    let mut last_residual = f64::INFINITY;

    for iter in 1..=cfg.picard_max {
        // (i) pointwise trapezoidal u update with the lagged velocity.
        let lu = 0.5 * terms.u_damping * dt;
        for i in 0..n {
            let vxm = 0.5 * (vx0[i] + vx_it[i]);
            u_new[i] = ((1.0 - lu) * u0[i] + dt * vxm) / (1.0 + lu);
        }
        let (umin, uat) = min_with_index(&u_new);
        if umin <= cfg.positivity_floor {
            return Err(RejectReason::NonPositive {
                field: FieldId::SpecificVolume,
                index: uat,
                value: umin,
            });
        }
        for i in 0..n {
            u_mid[i] = 0.5 * (u0[i] + u_new[i]);
            th_mid_lag[i] = 0.5 * (th0[i] + th_it[i]);
        }
        let (tmin, tat) = min_with_index(&th_mid_lag);
        if tmin <= cfg.positivity_floor {
            return Err(RejectReason::NonPositive {
                field: FieldId::Temperature,
                index: tat,
                value: tmin,
            });
        }

        // (ii) velocity solve, viscous flux implicit at the midpoint.
        for i in 0..n {
            visc[i] = if terms.variable_viscosity {
                params.mu(u_mid[i]) / u_mid[i]
            } else {
                1.0 / u_mid[i]
            };
            pressure[i] = th_mid_lag[i] / u_mid[i];
        }
        let v_new = match solve_velocity(v0, &visc, &pressure, &terms, dt, dx, n) {
            Ok(v) => v,
            Err(Error::SingularSystem(row)) => {
                return Err(RejectReason::SingularSolve { row })
            }
            Err(_) => unreachable!("velocity system has fixed shape"),
        };
        for (i, w) in v_new.windows(2).enumerate() {
            vx_mid[i] = 0.5 * (vx0[i] + (w[1] - w[0]) / dx);
        }

        // (iii) theta solve: conduction implicit with lagged kappa/u,
        // compression implicit in theta, viscous heating explicit.
        let th_new = match solve_theta(
            th0, &u_mid, &th_mid_lag, &vx_mid, &terms, params, cfg, gamma, dt, dx, n,
        ) {
            Ok(t) => t,
            Err(Error::SingularSystem(row)) => {
                return Err(RejectReason::SingularSolve { row })
            }
            Err(_) => unreachable!("theta system has fixed shape"),
        };
        let (thmin, that) = min_with_index(&th_new);
        if thmin <= cfg.positivity_floor {
            return Err(RejectReason::NonPositive {
                field: FieldId::Temperature,
                index: that,
                value: thmin,
            });
        }

        let residual = iterate_residual(&u_new, &u_it, &v_new, &v_it, &th_new, &th_it);
        last_residual = residual;
        u_it.copy_from_slice(&u_new);
        th_it.copy_from_slice(&th_new);
        for (i, w) in v_new.windows(2).enumerate() {
            vx_it[i] = (w[1] - w[0]) / dx;
        }
        v_it = v_new;

        if residual <= cfg.picard_tol {
            let next = State {
                grid: state.grid,
                formulation: state.formulation,
                time: state.time + dt,
                u: u_it,
                vel: v_it,
                theta: th_it,
            };
            return Ok((next, iter));
        }
    }
    Err(RejectReason::PicardStall {
        residual: last_residual,
    })
}

fn iterate_residual(
    u_new: &[f64],
    u_prev: &[f64],
    v_new: &[f64],
    v_prev: &[f64],
    th_new: &[f64],
    th_prev: &[f64],
) -> f64 {
    let norm = |new: &[f64], prev: &[f64]| {
        let mut diff = 0.0f64;
        let mut scale = 1.0f64;
        for (a, b) in new.iter().zip(prev) {
            diff = diff.max((a - b).abs());
            scale = scale.max(a.abs());
        }
        diff / scale
    };
    norm(u_new, u_prev)
        .max(norm(v_new, v_prev))
        .max(norm(th_new, th_prev))
}

/// Assemble and solve the velocity system
/// `(M (1 + lw dt/2) - dt/2 L) v_new = (M (1 - lw dt/2) + dt/2 L) v_old + dt G`
/// where `M` is the piecewise-linear mass matrix, `L` the viscous flux
/// divergence with coefficients `visc`, and `G` the pressure/boundary force.
fn solve_velocity(
    v_old: &[f64],
    visc: &[f64],
    pressure: &[f64],
    terms: &FormulationTerms,
    dt: f64,
    dx: f64,
    n: usize,
) -> Result<Vec<f64>> {
    let m = n + 1;
    let mw_plus = 1.0 + 0.5 * terms.vel_damping * dt;
    let mw_minus = 1.0 - 0.5 * terms.vel_damping * dt;
    let half_dt = 0.5 * dt;

    let mut lower = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut upper = vec![0.0; m];
    let mut rhs = vec![0.0; m];

    // Explicit half: (M mw_minus + dt/2 L) v_old + dt G.
    // L v|_j = [a (v_x)]_j - [a (v_x)]_{j-1} with one-sided ends.
    let vx_flux = |j: usize| visc[j] * (v_old[j + 1] - v_old[j]) / dx;
    for j in 0..m {
        let mass = if j == 0 {
            dx / 3.0 * v_old[0] + dx / 6.0 * v_old[1]
        } else if j == n {
            dx / 6.0 * v_old[n - 1] + dx / 3.0 * v_old[n]
        } else {
            dx / 6.0 * v_old[j - 1] + 2.0 * dx / 3.0 * v_old[j] + dx / 6.0 * v_old[j + 1]
        };
        let lv = if j == 0 {
            vx_flux(0)
        } else if j == n {
            -vx_flux(n - 1)
        } else {
            vx_flux(j) - vx_flux(j - 1)
        };
        let force = if j == 0 {
            -pressure[0] - terms.sigma_b
        } else if j == n {
            pressure[n - 1] + terms.sigma_b
        } else {
            pressure[j - 1] - pressure[j]
        };
        rhs[j] = mass * mw_minus + half_dt * lv + dt * force;
    }

    // Implicit half bands.
    diag[0] = dx / 3.0 * mw_plus + half_dt * visc[0] / dx;
    upper[0] = dx / 6.0 * mw_plus - half_dt * visc[0] / dx;
    for j in 1..n {
        lower[j] = dx / 6.0 * mw_plus - half_dt * visc[j - 1] / dx;
        diag[j] = 2.0 * dx / 3.0 * mw_plus + half_dt * (visc[j - 1] + visc[j]) / dx;
        upper[j] = dx / 6.0 * mw_plus - half_dt * visc[j] / dx;
    }
    lower[n] = dx / 6.0 * mw_plus - half_dt * visc[n - 1] / dx;
    diag[n] = dx / 3.0 * mw_plus + half_dt * visc[n - 1] / dx;

    solve_tridiagonal(&lower, &diag, &upper, &rhs)
}

/// Assemble and solve the temperature system with Crank-Nicolson conduction,
/// implicit compression, and explicit (already-known) viscous heating.
#[allow(clippy::too_many_arguments)]
fn solve_theta(
    th_old: &[f64],
    u_mid: &[f64],
    th_lag: &[f64],
    vx_mid: &[f64],
    terms: &FormulationTerms,
    params: &PhysParams,
    cfg: &SchemeConfig,
    gamma: f64,
    dt: f64,
    dx: f64,
    n: usize,
) -> Result<Vec<f64>> {
    // Conduction stencil weights c_j = kappa_j / (u_bar_j dx^2), zero at the
    // insulated ends.
    let mut cond = vec![0.0; n + 1];
    if cfg.conduction_enabled {
        for j in 1..n {
            let kappa = params.kappa(0.5 * (th_lag[j - 1] + th_lag[j]));
            let u_bar = 0.5 * (u_mid[j - 1] + u_mid[j]);
            cond[j] = kappa / (u_bar * dx * dx);
        }
    }

    let half_dt = 0.5 * dt;
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    for i in 0..n {
        let grad = if terms.grad_offset_by_u {
            vx_mid[i] + u_mid[i]
        } else {
            vx_mid[i]
        };
        let mu = if terms.variable_viscosity {
            params.mu(u_mid[i])
        } else {
            1.0
        };
        let heating = mu * grad * grad / u_mid[i];
        let rate = grad / u_mid[i];

        diag[i] = 1.0 + dt * gamma * rate + half_dt * (cond[i] + cond[i + 1]);
        lower[i] = -half_dt * cond[i];
        upper[i] = -half_dt * cond[i + 1];

        let mut explicit = th_old[i] * (1.0 - dt * (1.0 - gamma) * rate) + dt * heating;
        if i + 1 < n {
            explicit += half_dt * cond[i + 1] * (th_old[i + 1] - th_old[i]);
        }
        if i > 0 {
            explicit -= half_dt * cond[i] * (th_old[i] - th_old[i - 1]);
        }
        rhs[i] = explicit;
    }
    solve_tridiagonal(&lower, &diag, &upper, &rhs)
}
