//! Exact transformations between the three formulations, and the H1 distance
//! to the asymptotic state.

use crate::error::{Error, Result};
use crate::grid::{
    cell_gradient, cumulative_cell_integral, discrete_integral, node_gradient, node_integral,
    node_square_integral,
};
use crate::state::{Formulation, InitialDataSummary, State};

/// Map an original-time state to log time: `t_hat = log(1+t)`, `u <- u/(1+t)`.
pub fn to_scaled(s: &State) -> Result<State> {
    s.require(Formulation::Original)?;
    if s.time < 0.0 {
        return Err(Error::NegativeTime(s.time));
    }
    let growth = 1.0 + s.time;
    Ok(State {
        grid: s.grid,
        formulation: Formulation::Scaled,
        time: s.time.ln_1p(),
        u: s.u.iter().map(|u| u / growth).collect(),
        vel: s.vel.clone(),
        theta: s.theta.clone(),
    })
}

/// Inverse of [`to_scaled`]: `t = exp(t_hat) - 1`, `u <- u (1+t)`.
pub fn from_scaled(s: &State) -> Result<State> {
    s.require(Formulation::Scaled)?;
    let t = s.time.exp_m1();
    let growth = 1.0 + t;
    Ok(State {
        grid: s.grid,
        formulation: Formulation::Original,
        time: t,
        u: s.u.iter().map(|u| u * growth).collect(),
        vel: s.vel.clone(),
        theta: s.theta.clone(),
    })
}

/// Replace the scaled velocity by its mean-free image
/// `w = v - v0_mean - int_0^x u + int_0^1 int_0^xi u`.
///
/// The construction keeps `w_x = v_x - u` exact at cells, and the discrete
/// mean of `w` vanishes whenever the trapezoid momentum of `v` equals
/// `v0_mean` (which the stepper conserves).
pub fn build_w(s: &State, v0_mean: f64) -> Result<State> {
    s.require(Formulation::Scaled)?;
    let cum = cumulative_cell_integral(&s.u, &s.grid)?;
    let double_integral = node_integral(&cum, &s.grid)?;
    let w: Vec<f64> = s
        .vel
        .iter()
        .zip(&cum)
        .map(|(v, c)| v - v0_mean - c + double_integral)
        .collect();
    Ok(State {
        grid: s.grid,
        formulation: Formulation::WForm,
        time: s.time,
        u: s.u.clone(),
        vel: w,
        theta: s.theta.clone(),
    })
}

/// Reconstruct the scaled velocity from a w-form state; inverse of [`build_w`].
pub fn w_to_v(s: &State, v0_mean: f64) -> Result<State> {
    s.require(Formulation::WForm)?;
    let cum = cumulative_cell_integral(&s.u, &s.grid)?;
    let double_integral = node_integral(&cum, &s.grid)?;
    let v: Vec<f64> = s
        .vel
        .iter()
        .zip(&cum)
        .map(|(w, c)| w + v0_mean + c - double_integral)
        .collect();
    Ok(State {
        grid: s.grid,
        formulation: Formulation::Scaled,
        time: s.time,
        u: s.u.clone(),
        vel: v,
        theta: s.theta.clone(),
    })
}

/// H1 distance of a scaled state to the asymptotic profile
/// `(A, v0_mean + A (x - 1/2), A)`.
///
/// Sums the squared L2 norms of the three deviations plus the squared L2
/// norms of their one-sided difference quotients, each on its own staggering.
pub fn h1_distance(s: &State, summary: &InitialDataSummary) -> Result<f64> {
    s.require(Formulation::Scaled)?;
    let a = summary.asymptotic;
    let grid = &s.grid;

    let dev_u: Vec<f64> = s.u.iter().map(|u| u - a).collect();
    let dev_th: Vec<f64> = s.theta.iter().map(|t| t - a).collect();
    let dev_v: Vec<f64> = s
        .vel
        .iter()
        .enumerate()
        .map(|(j, v)| v - (summary.v0_mean + a * (grid.node(j) - 0.5)))
        .collect();

    let sq = |x: &f64| x * x;
    let l2_cells = |f: &[f64]| discrete_integral(&f.iter().map(sq).collect::<Vec<_>>(), grid);
    let l2_nodes = |f: &[f64]| node_square_integral(f, grid);

    let mut total = l2_cells(&dev_u)? + l2_cells(&dev_th)? + l2_nodes(&dev_v)?;
    total += l2_nodes(&node_gradient(&dev_u, grid)?)?;
    total += l2_nodes(&node_gradient(&dev_th, grid)?)?;
    total += l2_cells(&cell_gradient(&dev_v, grid)?)?;
    Ok(total.sqrt())
}
