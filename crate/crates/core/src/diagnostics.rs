//! Computable functionals and independent oracles: derived constants,
//! dissipation and entropy estimates, the integral representation of the
//! specific volume, the psi-energy identity, decay-rate fitting, and bounds
//! tracking.

use crate::error::{Error, Result};
use crate::grid::{
    cell_gradient, cumulative_cell_integral, cumulative_node_integral,
    cumulative_node_integral_at_cells, discrete_integral, node_gradient, node_integral,
    node_square_integral,
};
use crate::state::{
    DiagnosticsRecord, Formulation, History, InitialDataSummary, PhysParams, State,
};
use crate::transform::h1_distance;

/// Bisection tolerance for the mean-temperature bracket roots.
const ROOT_TOL: f64 = 1e-13;

/// Derive the run constants from the initial data.
///
/// The total energy uses the piecewise-linear-exact velocity quadrature, so
/// for node-linear initial velocity the closed-form `asymptotic` constant is
/// exact to round-off. The entropy bound takes
/// `e0 = int(v0^2/2 + theta0 - log theta0 - 1) + 2 sqrt(2 E0)`, covering the
/// endpoint values of the cumulative velocity integral by the Cauchy bound.
pub fn compute_summary(initial: &State, _params: &PhysParams) -> Result<InitialDataSummary> {
    initial.require(Formulation::Scaled)?;
    let grid = &initial.grid;
    let kinetic = 0.5 * node_square_integral(&initial.vel, grid)?;
    let total_energy = kinetic + discrete_integral(&initial.theta, grid)?;
    let v0_mean = node_integral(&initial.vel, grid)?;

    let excess = total_energy - 0.5 * v0_mean * v0_mean;
    if !(excess > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "energy minus mean kinetic part must be positive, got {excess}"
        )));
    }
    let asymptotic = 2.0 * (36.0 + 6.0 * excess).sqrt() - 12.0;

    let entropy_density: Vec<f64> = initial
        .theta
        .iter()
        .map(|&t| t - t.ln() - 1.0)
        .collect();
    let entropy_const =
        kinetic + discrete_integral(&entropy_density, grid)? + 2.0 * (2.0 * total_energy).sqrt();
    let (alpha1, alpha2) = entropy_roots(entropy_const)?;

    let summary = InitialDataSummary {
        total_energy,
        v0_mean,
        asymptotic,
        entropy_const,
        alpha1,
        alpha2,
    };
    summary.validate()?;
    Ok(summary)
}

/// Roots `0 < alpha1 <= 1 <= alpha2` of `x - log x - 1 = e0`.
pub fn entropy_roots(e0: f64) -> Result<(f64, f64)> {
    if e0 < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "entropy bound must be nonnegative, got {e0}"
        )));
    }
    if e0 == 0.0 {
        return Ok((1.0, 1.0));
    }
    let g = |x: f64| x - x.ln() - 1.0 - e0;

    // Left root: g > 0 near 0+, g(1) = -e0 < 0.
    let mut lo = 0.5;
    while g(lo) <= 0.0 {
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(Error::RootBracketing("left mean-temperature root".into()));
        }
    }
    let alpha1 = bisect(g, lo, 1.0);

    // Right root: g(1) < 0, g grows linearly.
    let mut hi = 2.0;
    while g(hi) <= 0.0 {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::RootBracketing("right mean-temperature root".into()));
        }
    }
    let alpha2 = bisect(g, 1.0, hi);
    Ok((alpha1, alpha2))
}

/// Bisection for a sign change on [lo, hi]; assumes g(lo) and g(hi) differ in
/// sign (callers arrange the bracket).
fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let increasing = g(hi) > g(lo);
    while hi - lo > ROOT_TOL * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        let val = g(mid);
        if (val > 0.0) == increasing {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Stress deviation `z_x = w_x + u - theta` at cells (`v_x - theta` on
/// scaled states).
fn stress_deviation(s: &State) -> Result<Vec<f64>> {
    let vx = cell_gradient(&s.vel, &s.grid)?;
    Ok(match s.formulation {
        Formulation::WForm => (0..s.grid.n())
            .map(|i| vx[i] + s.u[i] - s.theta[i])
            .collect(),
        _ => (0..s.grid.n()).map(|i| vx[i] - s.theta[i]).collect(),
    })
}

/// Dissipation functional
/// `V = int (kappa(theta) theta_x^2 / (u theta^2) + z_x^2 / (u theta))`.
///
/// The temperature gradient lives at interior nodes and is averaged to
/// cells; boundary cells reuse their single adjacent interior node (the
/// insulated-end gradient vanishes identically).
pub fn dissipation_v(s: &State, params: &PhysParams) -> Result<f64> {
    if s.formulation == Formulation::Original {
        return Err(Error::WrongFormulation {
            expected: Formulation::Scaled,
            got: s.formulation,
        });
    }
    let n = s.grid.n();
    let thx = node_gradient(&s.theta, &s.grid)?;
    let zx = stress_deviation(s)?;
    let mut integrand = Vec::with_capacity(n);
    for i in 0..n {
        let u = s.u[i];
        let th = s.theta[i];
        if !(u > 0.0) || !(th > 0.0) {
            return Err(Error::NonPositiveField {
                field: if u > 0.0 {
                    crate::error::FieldId::Temperature
                } else {
                    crate::error::FieldId::SpecificVolume
                },
                min: u.min(th),
                index: i,
            });
        }
        let grad = if i == 0 {
            thx[1]
        } else if i == n - 1 {
            thx[n - 1]
        } else {
            0.5 * (thx[i] + thx[i + 1])
        };
        integrand.push(
            params.kappa(th) * grad * grad / (u * th * th) + zx[i] * zx[i] / (u * th),
        );
    }
    discrete_integral(&integrand, &s.grid)
}

/// Sum of the squared spatial gradients `int (u_x^2 + w_x^2 + theta_x^2)` on
/// a scaled state (`w_x` is formed as `v_x - u`).
pub fn gradient_energy(s: &State) -> Result<f64> {
    s.require(Formulation::Scaled)?;
    let ux = node_gradient(&s.u, &s.grid)?;
    let thx = node_gradient(&s.theta, &s.grid)?;
    let vx = cell_gradient(&s.vel, &s.grid)?;
    let wx: Vec<f64> = (0..s.grid.n()).map(|i| vx[i] - s.u[i]).collect();
    let sq = |f: &[f64]| f.iter().map(|x| x * x).collect::<Vec<_>>();
    Ok(node_square_integral(&ux, &s.grid)?
        + node_square_integral(&thx, &s.grid)?
        + discrete_integral(&sq(&wx), &s.grid)?)
}

/// All monitored functionals of one scaled state.
pub fn record(s: &State, summary: &InitialDataSummary, params: &PhysParams) -> Result<DiagnosticsRecord> {
    s.require(Formulation::Scaled)?;
    let grid = &s.grid;
    let kinetic = 0.5 * node_square_integral(&s.vel, grid)?;
    let theta_bar = discrete_integral(&s.theta, grid)?;
    let entropy_density: Vec<f64> = s.theta.iter().map(|&t| t - t.ln() - 1.0).collect();
    Ok(DiagnosticsRecord {
        time: s.time,
        energy: kinetic + theta_bar,
        momentum: node_integral(&s.vel, grid)?,
        entropy: discrete_integral(&entropy_density, grid)?,
        dissipation: dissipation_v(s, params)?,
        theta_bar,
        u_min: s.u_min(),
        u_max: s.u_max(),
        theta_min: s.theta_min(),
        theta_max: s.theta_max(),
        h1_dist: h1_distance(s, summary)?,
        psi_energy: psi_energy(s, summary)?,
    })
}

/// Node profile of `psi = w + int_0^x (u - A) - int int (u - A)`.
///
/// On scaled states this collapses to the velocity deviation
/// `v - v0_mean - A (x - 1/2)`; its discrete mean vanishes whenever the
/// trapezoid momentum equals `v0_mean`.
pub fn psi_profile(s: &State, summary: &InitialDataSummary) -> Result<Vec<f64>> {
    let grid = &s.grid;
    let a = summary.asymptotic;
    match s.formulation {
        Formulation::Scaled => Ok(s
            .vel
            .iter()
            .enumerate()
            .map(|(j, v)| v - summary.v0_mean - a * (grid.node(j) - 0.5))
            .collect()),
        Formulation::WForm => {
            let dev: Vec<f64> = s.u.iter().map(|u| u - a).collect();
            let cum = cumulative_cell_integral(&dev, grid)?;
            let double = node_integral(&cum, grid)?;
            Ok(s
                .vel
                .iter()
                .zip(&cum)
                .map(|(w, c)| w + c - double)
                .collect())
        }
        Formulation::Original => Err(Error::WrongFormulation {
            expected: Formulation::Scaled,
            got: s.formulation,
        }),
    }
}

/// `int (psi^2/2 + A (theta/A - log(theta/A) - 1))`, the Lyapunov energy of
/// the relative entropy identity.
pub fn psi_energy(s: &State, summary: &InitialDataSummary) -> Result<f64> {
    let psi = psi_profile(s, summary)?;
    let a = summary.asymptotic;
    let rel_entropy: Vec<f64> = s
        .theta
        .iter()
        .map(|&t| {
            let r = t / a;
            a * (r - r.ln() - 1.0)
        })
        .collect();
    Ok(0.5 * node_square_integral(&psi, &s.grid)?
        + discrete_integral(&rel_entropy, &s.grid)?)
}

/// Dissipation paired with the psi-energy:
/// `int (z_x^2/(u theta) + kappa theta_x^2/(u theta^2))`, with the conduction
/// part quadratured at nodes against the product of adjacent temperatures so
/// it matches the flux form of the scheme exactly.
fn psi_dissipation(s: &State, params: &PhysParams) -> Result<f64> {
    let n = s.grid.n();
    let dx = s.grid.dx();
    let zx = stress_deviation(s)?;
    let mut stress_part = Vec::with_capacity(n);
    for i in 0..n {
        stress_part.push(zx[i] * zx[i] / (s.u[i] * s.theta[i]));
    }
    let mut total = discrete_integral(&stress_part, &s.grid)?;
    for j in 1..n {
        let th_l = s.theta[j - 1];
        let th_r = s.theta[j];
        let kappa = params.kappa(0.5 * (th_l + th_r));
        let u_bar = 0.5 * (s.u[j - 1] + s.u[j]);
        let grad = (th_r - th_l) / dx;
        total += dx * kappa * grad * grad / (u_bar * th_l * th_r);
    }
    Ok(total)
}

/// Defect of the discrete psi-energy balance between two consecutive w-form
/// states: `|(P2 - P1)/dt + A * D(midpoint)|`.
///
/// The balance is an exact identity of the continuous system, so the value
/// is pure discretization error and shrinks under refinement.
pub fn psi_identity_residual(
    s1: &State,
    s2: &State,
    dt: f64,
    summary: &InitialDataSummary,
    params: &PhysParams,
) -> Result<f64> {
    s1.require(Formulation::WForm)?;
    s2.require(Formulation::WForm)?;
    if s1.grid.n() != s2.grid.n() {
        return Err(Error::GridMismatch(s1.grid.n(), s2.grid.n()));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "dt must be positive, got {dt}"
        )));
    }
    let p1 = psi_energy(s1, summary)?;
    let p2 = psi_energy(s2, summary)?;
    let mid = State {
        grid: s1.grid,
        formulation: Formulation::WForm,
        time: 0.5 * (s1.time + s2.time),
        u: avg(&s1.u, &s2.u),
        vel: avg(&s1.vel, &s2.vel),
        theta: avg(&s1.theta, &s2.theta),
    };
    let dissipation = psi_dissipation(&mid, params)?;
    Ok(((p2 - p1) / dt + summary.asymptotic * dissipation).abs())
}

fn avg(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect()
}

/// Node profile of `B = exp(int_0^x (v - v0))`.
pub fn b_field(s: &State, initial: &State) -> Result<Vec<f64>> {
    if s.grid.n() != initial.grid.n() {
        return Err(Error::GridMismatch(s.grid.n(), initial.grid.n()));
    }
    let dv: Vec<f64> = s.vel.iter().zip(&initial.vel).map(|(a, b)| a - b).collect();
    let cum = cumulative_node_integral(&dv, &s.grid)?;
    Ok(cum.iter().map(|c| c.exp()).collect())
}

/// Reconstruct the final specific volume from the velocity and temperature
/// history alone:
/// `u(x,t) = u0 B e^{-t} (1 + (1/u0) int_0^t theta e^s / B ds)`.
///
/// The spatial cumulative integrals use the cell-centered weights matched to
/// the momentum update, so the deviation from the evolved field is dominated
/// by the trapezoid rule in `s` and shrinks with the sampling cadence.
pub fn u_representation_oracle(history: &History, initial: &State) -> Result<Vec<f64>> {
    if history.is_empty() {
        return Err(Error::InsufficientData("empty history".into()));
    }
    let grid = &initial.grid;
    let n = grid.n();
    let times = history.times();
    let t0 = times[0];
    let t_final = *times.last().unwrap();
    if (initial.time - t0).abs() > 1e-12 {
        return Err(Error::InsufficientData(format!(
            "history starts at {t0}, initial state at {}",
            initial.time
        )));
    }
    if t_final == t0 {
        return Ok(initial.u.clone());
    }
    if history.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 samples to quadrature the time integral, got {}",
            history.len()
        )));
    }

    // Cell-centered B at each sample, relative to the initial velocity.
    let b_cells = |k: usize| -> Result<Vec<f64>> {
        let dv: Vec<f64> = history.vel_at(k)
            .iter()
            .zip(&initial.vel)
            .map(|(a, b)| a - b)
            .collect();
        let cum = cumulative_node_integral_at_cells(&dv, grid)?;
        Ok(cum.iter().map(|c| c.exp()).collect())
    };

    let mut integral = vec![0.0; n];
    let mut prev_g: Vec<f64> = {
        let b = b_cells(0)?;
        (0..n)
            .map(|i| history.theta_at(0)[i] * (times[0] - t_final).exp() / b[i])
            .collect()
    };
    // Integrand scaled by e^{-t_final} up front to avoid overflow for long runs.
    for k in 1..history.len() {
        let b = b_cells(k)?;
        let weight = 0.5 * (times[k] - times[k - 1]);
        let scale = (times[k] - t_final).exp();
        for i in 0..n {
            let g = history.theta_at(k)[i] * scale / b[i];
            integral[i] += weight * (prev_g[i] + g);
            prev_g[i] = g;
        }
    }

    let b_final = b_cells(history.len() - 1)?;
    let decay = (t0 - t_final).exp();
    Ok((0..n)
        .map(|i| b_final[i] * (initial.u[i] * decay + integral[i]))
        .collect())
}

/// Window and result of the exponential fit to a decaying series.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DecayFit {
    pub window: (f64, f64),
    /// Decay rate per unit of the series clock (positive = decaying).
    pub lambda_hat: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Minimum number of in-window samples for a meaningful fit.
pub const DECAY_FIT_MIN_POINTS: usize = 10;

/// Least-squares line through `(t, log value)` over the window
/// `threshold_lo < value < threshold_hi`; `lambda_hat` is minus the slope.
pub fn decay_fit(series: &[(f64, f64)], threshold_hi: f64, threshold_lo: f64) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(_, v)| *v > threshold_lo && *v < threshold_hi)
        .map(|&(t, v)| (t, v.ln()))
        .collect();
    if pts.len() < DECAY_FIT_MIN_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} samples inside ({threshold_lo:.3e}, {threshold_hi:.3e}), need {}",
            pts.len(),
            DECAY_FIT_MIN_POINTS
        )));
    }
    let n = pts.len() as f64;
    let mean_t = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut stt = 0.0;
    let mut sty = 0.0;
    for (t, y) in &pts {
        stt += (t - mean_t) * (t - mean_t);
        sty += (t - mean_t) * (y - mean_y);
    }
    if stt == 0.0 {
        return Err(Error::InsufficientData(
            "degenerate fit window: all samples at one time".into(),
        ));
    }
    let slope = sty / stt;
    let intercept = mean_y - slope * mean_t;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (t, y) in &pts {
        let fit = intercept + slope * t;
        ss_res += (y - fit) * (y - fit);
        ss_tot += (y - mean_y) * (y - mean_y);
    }
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        0.0
    };
    Ok(DecayFit {
        window: (pts[0].0, pts[pts.len() - 1].0),
        lambda_hat: -slope,
        intercept,
        r_squared,
        points: pts.len(),
    })
}

/// Extremes of the monitored bounds over a run.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BoundsReport {
    /// `max(u_max, 1/u_min)` over the run.
    pub m_hat: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub theta_bar_min: f64,
    pub theta_bar_max: f64,
    /// Samples whose mean temperature left `[alpha1 - tol, alpha2 + tol]`
    /// (flagged, not fatal).
    pub bracket_flags: usize,
}

/// Slack on the mean-temperature bracket before a sample is flagged.
pub const BRACKET_TOL: f64 = 1e-6;

/// Fold running extrema over an ordered stream of records, flagging samples
/// whose mean temperature escapes the bracket.
pub fn bounds_tracker(
    records: &[DiagnosticsRecord],
    summary: &InitialDataSummary,
) -> Result<BoundsReport> {
    if records.is_empty() {
        return Err(Error::InsufficientData("empty diagnostics stream".into()));
    }
    let mut report = BoundsReport {
        m_hat: f64::NEG_INFINITY,
        theta_min: f64::INFINITY,
        theta_max: f64::NEG_INFINITY,
        theta_bar_min: f64::INFINITY,
        theta_bar_max: f64::NEG_INFINITY,
        bracket_flags: 0,
    };
    for r in records {
        report.m_hat = report.m_hat.max(r.u_max).max(1.0 / r.u_min);
        report.theta_min = report.theta_min.min(r.theta_min);
        report.theta_max = report.theta_max.max(r.theta_max);
        report.theta_bar_min = report.theta_bar_min.min(r.theta_bar);
        report.theta_bar_max = report.theta_bar_max.max(r.theta_bar);
        if r.theta_bar < summary.alpha1 - BRACKET_TOL || r.theta_bar > summary.alpha2 + BRACKET_TOL
        {
            report.bracket_flags += 1;
        }
    }
    Ok(report)
}

/// Verdict of the entropy-dissipation estimate
/// `int(v^2/2 + theta - log theta - 1)(T) + int_0^T V ds <= e0`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EntropyCheck {
    pub lhs: f64,
    pub bound: f64,
    pub margin: f64,
    pub pass: bool,
}

/// Evaluate the estimate at the final record, integrating `V` in time by the
/// trapezoid rule over the sampled records.
pub fn entropy_estimate_check(
    records: &[DiagnosticsRecord],
    summary: &InitialDataSummary,
) -> Result<EntropyCheck> {
    if records.is_empty() {
        return Err(Error::InsufficientData("empty diagnostics stream".into()));
    }
    let mut v_time_integral = 0.0;
    for pair in records.windows(2) {
        v_time_integral +=
            0.5 * (pair[1].time - pair[0].time) * (pair[0].dissipation + pair[1].dissipation);
    }
    let last = records.last().unwrap();
    let kinetic = last.energy - last.theta_bar;
    let lhs = kinetic + last.entropy + v_time_integral;
    let bound = summary.entropy_const;
    Ok(EntropyCheck {
        lhs,
        bound,
        margin: bound - lhs,
        pass: lhs <= bound * (1.0 + 1e-6),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::state::Formulation;

    fn params(beta: f64) -> PhysParams {
        PhysParams::new(beta, 0.0).unwrap()
    }

    fn trivial_scaled(c: f64, n: usize) -> State {
        let grid = Grid::new(n).unwrap();
        State::new(
            grid,
            Formulation::Scaled,
            0.0,
            vec![c; n],
            grid.nodes().iter().map(|x| c * (x - 0.5)).collect(),
            vec![c; n],
        )
        .unwrap()
    }

    #[test]
    fn summary_constants_for_free_expansion_data() {
        // c = 1: E0 = 25/24, A = 1. c = 2: E0 = 13/6, A = 2.
        let p = params(1.0);
        let s1 = compute_summary(&trivial_scaled(1.0, 128), &p).unwrap();
        assert!((s1.total_energy - 25.0 / 24.0).abs() < 1e-13);
        assert!((s1.v0_mean).abs() < 1e-14);
        assert!((s1.asymptotic - 1.0).abs() < 1e-12, "A = {}", s1.asymptotic);

        let s2 = compute_summary(&trivial_scaled(2.0, 128), &p).unwrap();
        assert!((s2.total_energy - 13.0 / 6.0).abs() < 1e-13);
        assert!((s2.asymptotic - 2.0).abs() < 1e-12, "A = {}", s2.asymptotic);

        // e0 for c = 1: 1/24 + 2 sqrt(2 * 25/24).
        let e0_expect = 1.0 / 24.0 + 2.0 * (2.0 * 25.0 / 24.0f64).sqrt();
        assert!((s1.entropy_const - e0_expect).abs() < 1e-12);
    }

    #[test]
    fn summary_constants_for_resting_gas() {
        let n = 128;
        let grid = Grid::new(n).unwrap();
        let s = State::new(
            grid,
            Formulation::Scaled,
            0.0,
            vec![1.0; n],
            vec![0.0; n + 1],
            vec![1.0; n],
        )
        .unwrap();
        let summary = compute_summary(&s, &params(1.0)).unwrap();
        assert!((summary.total_energy - 1.0).abs() < 1e-14);
        let expect = 2.0 * 42.0f64.sqrt() - 12.0;
        assert!((summary.asymptotic - expect).abs() < 1e-12);
        // Quadratic-root cross-check: A^2/24 + A = 1.
        assert!(summary.identity_residual().abs() < 1e-12);
    }

    #[test]
    fn entropy_roots_examples() {
        let (a1, a2) = entropy_roots(0.0).unwrap();
        assert_eq!((a1, a2), (1.0, 1.0));

        let (a1, a2) = entropy_roots(0.5).unwrap();
        let g = |x: f64| x - x.ln() - 1.0;
        assert!((g(a1) - 0.5).abs() < 1e-11);
        assert!((g(a2) - 0.5).abs() < 1e-11);
        assert!((a1 - 0.301744).abs() < 1e-3, "alpha1 = {a1}");
        assert!((a2 - 2.357656).abs() < 1e-3, "alpha2 = {a2}");
        assert!(a1 < 1.0 && a2 > 1.0);

        assert!(entropy_roots(-0.1).is_err());
    }

    #[test]
    fn dissipation_vanishes_on_steady_profiles() {
        let p = params(1.0);
        assert!(dissipation_v(&trivial_scaled(1.0, 64), &p).unwrap() < 1e-26);
        let grid = Grid::new(64).unwrap();
        let a = 1.4;
        let asym = State::new(
            grid,
            Formulation::Scaled,
            0.0,
            vec![a; 64],
            grid.nodes().iter().map(|x| 0.3 + a * (x - 0.5)).collect(),
            vec![a; 64],
        )
        .unwrap();
        assert!(dissipation_v(&asym, &p).unwrap() < 1e-25);
    }

    #[test]
    fn dissipation_of_cosine_temperature_matches_leading_order() {
        // theta = 1 + 0.1 cos(pi x), v chosen so v_x = theta exactly: the
        // stress part vanishes and V is close to 0.01 pi^2 / 2.
        let n = 128;
        let grid = Grid::new(n).unwrap();
        let pi = std::f64::consts::PI;
        let theta: Vec<f64> = grid
            .cell_centers()
            .iter()
            .map(|x| 1.0 + 0.1 * (pi * x).cos())
            .collect();
        let mut vel = vec![0.0; n + 1];
        for i in 0..n {
            vel[i + 1] = vel[i] + grid.dx() * theta[i];
        }
        let s = State::new(grid, Formulation::Scaled, 0.0, vec![1.0; n], vel, theta).unwrap();
        let v = dissipation_v(&s, &params(0.5)).unwrap();
        let expect = 0.01 * pi * pi / 2.0;
        assert!(
            (v - expect).abs() < 0.05 * expect,
            "V = {v}, leading order {expect}"
        );
    }

    #[test]
    fn b_field_is_one_without_velocity_change() {
        let s = trivial_scaled(1.0, 32);
        let b = b_field(&s, &s).unwrap();
        for x in &b {
            assert!((x - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn b_field_of_constant_shift_is_exponential() {
        let n = 32;
        let s0 = trivial_scaled(1.0, n);
        let eps = 0.05;
        let mut s1 = s0.clone();
        for v in &mut s1.vel {
            *v += eps;
        }
        let b = b_field(&s1, &s0).unwrap();
        for (j, val) in b.iter().enumerate() {
            let expect = (eps * s0.grid.node(j)).exp();
            assert!((val - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn representation_oracle_is_exact_at_initial_time() {
        let s = trivial_scaled(1.0, 16);
        let mut h = History::new();
        h.push(&s);
        let u = u_representation_oracle(&h, &s).unwrap();
        for (a, b) in u.iter().zip(&s.u) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn representation_oracle_needs_enough_samples() {
        let s = trivial_scaled(1.0, 16);
        let mut h = History::new();
        h.push(&s);
        let mut s2 = s.clone();
        s2.time = 0.5;
        h.push(&s2);
        assert!(matches!(
            u_representation_oracle(&h, &s),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn representation_oracle_reproduces_free_expansion() {
        // Along the steady profile B = 1 and theta = c, so the formula gives
        // c e^{-t}(1 + (e^t - 1)) = c up to the trapezoid error in s.
        let c = 1.3;
        let s = trivial_scaled(c, 16);
        let mut h = History::new();
        let mut cur = s.clone();
        h.push(&cur);
        let steps = 100;
        for k in 1..=steps {
            cur.time = k as f64 * 0.01;
            h.push(&cur);
        }
        let u = u_representation_oracle(&h, &s).unwrap();
        for val in &u {
            assert!((val - c).abs() < 1e-5 * c, "got {val}, want {c}");
        }
    }

    fn steady_w_state(a: f64, n: usize) -> State {
        let grid = Grid::new(n).unwrap();
        State::new(
            grid,
            Formulation::WForm,
            0.0,
            vec![a; n],
            vec![0.0; n + 1],
            vec![a; n],
        )
        .unwrap()
    }

    fn summary_for_constant(a: f64) -> InitialDataSummary {
        InitialDataSummary {
            total_energy: a * a / 24.0 + a,
            v0_mean: 0.0,
            asymptotic: a,
            entropy_const: 1.0,
            alpha1: 0.5,
            alpha2: 2.0,
        }
    }

    #[test]
    fn psi_identity_residual_vanishes_on_steady_states() {
        let a = 1.0;
        let s = steady_w_state(a, 32);
        let mut s2 = s.clone();
        s2.time = 0.1;
        let r = psi_identity_residual(&s, &s2, 0.1, &summary_for_constant(a), &params(1.0)).unwrap();
        assert!(r < 1e-13, "steady residual {r}");
    }

    #[test]
    fn psi_energy_is_nonnegative() {
        let grid = Grid::new(32).unwrap();
        let pi = std::f64::consts::PI;
        let w: Vec<f64> = grid.nodes().iter().map(|x| 0.05 * (pi * x).sin()).collect();
        let w_mean = node_integral(&w, &grid).unwrap();
        let w: Vec<f64> = w.iter().map(|x| x - w_mean).collect();
        let s = State::new(
            grid,
            Formulation::WForm,
            0.0,
            vec![1.1; 32],
            w,
            grid.cell_centers()
                .iter()
                .map(|x| 1.0 + 0.2 * (pi * x).cos())
                .collect(),
        )
        .unwrap();
        assert!(psi_energy(&s, &summary_for_constant(1.0)).unwrap() >= 0.0);
    }

    #[test]
    fn decay_fit_recovers_exact_exponential() {
        let series: Vec<(f64, f64)> = (0..200)
            .map(|k| {
                let t = k as f64 * 0.05;
                (t, 3.0 * (-0.7 * t).exp())
            })
            .collect();
        let fit = decay_fit(&series, 1e9, 0.0).unwrap();
        assert!((fit.lambda_hat - 0.7).abs() < 1e-10, "{}", fit.lambda_hat);
        assert!((fit.r_squared - 1.0).abs() < 1e-10);
        assert!((fit.intercept - 3.0f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn decay_fit_tolerates_small_modulation() {
        let series: Vec<(f64, f64)> = (0..400)
            .map(|k| {
                let t = k as f64 * 0.05;
                (t, 3.0 * (-0.7 * t).exp() * (1.0 + 0.01 * t.sin()))
            })
            .collect();
        let fit = decay_fit(&series, 1e9, 0.0).unwrap();
        assert!(
            (fit.lambda_hat - 0.7).abs() < 0.02,
            "lambda = {}",
            fit.lambda_hat
        );
    }

    #[test]
    fn decay_fit_flags_constant_series() {
        let series: Vec<(f64, f64)> = (0..50).map(|k| (k as f64, 2.0)).collect();
        let fit = decay_fit(&series, 1e9, 0.0).unwrap();
        assert!(fit.lambda_hat.abs() < 1e-12);
        assert_eq!(fit.r_squared, 0.0, "no trend means r^2 = 0");
    }

    #[test]
    fn decay_fit_requires_enough_points() {
        let series: Vec<(f64, f64)> = (0..5).map(|k| (k as f64, (-(k as f64)).exp())).collect();
        assert!(matches!(
            decay_fit(&series, 1e9, 0.0),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn bounds_tracker_on_steady_runs() {
        let p = params(1.0);
        let s = trivial_scaled(1.0, 64);
        let summary = compute_summary(&s, &p).unwrap();
        let records: Vec<DiagnosticsRecord> = (0..20)
            .map(|k| {
                let mut st = s.clone();
                st.time = k as f64 * 0.1;
                record(&st, &summary, &p).unwrap()
            })
            .collect();
        let report = bounds_tracker(&records, &summary).unwrap();
        assert!((report.m_hat - 1.0).abs() < 1e-12);
        assert!((report.theta_min - 1.0).abs() < 1e-12);
        assert!((report.theta_max - 1.0).abs() < 1e-12);
        assert_eq!(report.bracket_flags, 0);
        assert!(summary.alpha1 <= 1.0 && summary.alpha2 >= 1.0);

        assert!(matches!(
            bounds_tracker(&[], &summary),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn entropy_estimate_passes_on_steady_runs() {
        let p = params(1.0);
        let s = trivial_scaled(1.0, 64);
        let summary = compute_summary(&s, &p).unwrap();
        let records: Vec<DiagnosticsRecord> = (0..30)
            .map(|k| {
                let mut st = s.clone();
                st.time = k as f64 * 0.5;
                record(&st, &summary, &p).unwrap()
            })
            .collect();
        let check = entropy_estimate_check(&records, &summary).unwrap();
        assert!(check.pass);
        // Hand arithmetic: LHS = 1/24, bound = 1/24 + 2 sqrt(25/12).
        assert!((check.lhs - 1.0 / 24.0).abs() < 1e-10);
        assert!(check.margin > 2.0);
    }
}
