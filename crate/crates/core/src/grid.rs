//! Uniform staggered grid on the unit mass interval and its discrete calculus.
//!
//! Cell-centered fields (`u`, `theta`) carry `n` values at `x = (i+1/2)*dx`;
//! node-centered fields (velocity-like) carry `n+1` values at `x = j*dx`.
//! Quadrature conventions: midpoint rule for cell fields, trapezoid rule for
//! node fields, and cumulative sums for primitives `int_0^x`. These choices
//! make the discrete identity `w_x = v_x - u` exact at cells.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Grid {
    n: usize,
    dx: f64,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::GridTooCoarse(n));
        }
        Ok(Self {
            n,
            dx: 1.0 / n as f64,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Center of cell `i`, `x = (i+1/2) dx`.
    pub fn cell_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx
    }

    /// Position of node `j`, `x = j dx`.
    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.dx
    }

    pub fn cell_centers(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.cell_center(i)).collect()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|j| self.node(j)).collect()
    }

    fn check_cells(&self, field: &[f64], what: &'static str) -> Result<()> {
        if field.len() != self.n {
            return Err(Error::LengthMismatch {
                what,
                expected: self.n,
                got: field.len(),
            });
        }
        Ok(())
    }

    fn check_nodes(&self, field: &[f64], what: &'static str) -> Result<()> {
        if field.len() != self.n + 1 {
            return Err(Error::LengthMismatch {
                what,
                expected: self.n + 1,
                got: field.len(),
            });
        }
        Ok(())
    }
}

/// Midpoint-rule integral of a cell-centered field over (0, 1).
///
/// Exact for cellwise-constant fields and second order for smooth ones.
pub fn discrete_integral(field: &[f64], grid: &Grid) -> Result<f64> {
    grid.check_cells(field, "cell field")?;
    Ok(field.iter().sum::<f64>() * grid.dx())
}

/// Trapezoid-rule integral of a node-centered field over (0, 1).
///
/// Exact for node-linear fields.
pub fn node_integral(field: &[f64], grid: &Grid) -> Result<f64> {
    grid.check_nodes(field, "node field")?;
    let n = grid.n();
    let mut sum = 0.5 * (field[0] + field[n]);
    for v in &field[1..n] {
        sum += v;
    }
    Ok(sum * grid.dx())
}

/// Integral of the square of a node-centered field, reading the field as
/// piecewise linear between nodes.
///
/// Exact (to round-off) whenever the field is linear in x, which is what the
/// conserved kinetic energy and the closed-form asymptotic constant require.
pub fn node_square_integral(field: &[f64], grid: &Grid) -> Result<f64> {
    grid.check_nodes(field, "node field")?;
    let mut sum = 0.0;
    for w in field.windows(2) {
        let (a, b) = (w[0], w[1]);
        sum += a * a + a * b + b * b;
    }
    Ok(sum * grid.dx() / 3.0)
}

/// Cumulative midpoint integral of a cell field, sampled at the nodes.
///
/// Returns `n+1` values with `out[0] = 0`; `out[j]` is the integral over
/// `(0, x_j)`.
pub fn cumulative_cell_integral(field: &[f64], grid: &Grid) -> Result<Vec<f64>> {
    grid.check_cells(field, "cell field")?;
    let mut out = Vec::with_capacity(grid.n() + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for v in field {
        acc += v * grid.dx();
        out.push(acc);
    }
    Ok(out)
}

/// Cumulative trapezoid integral of a node field, sampled at the nodes.
pub fn cumulative_node_integral(field: &[f64], grid: &Grid) -> Result<Vec<f64>> {
    grid.check_nodes(field, "node field")?;
    let mut out = Vec::with_capacity(grid.n() + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for w in field.windows(2) {
        acc += 0.5 * (w[0] + w[1]) * grid.dx();
        out.push(acc);
    }
    Ok(out)
}

/// Cumulative integral of a node field evaluated at cell centers, weighted to
/// match the momentum update's mass matrix: trapezoid up to the left node plus
/// `dx (2 f_j + f_{j+1}) / 6` across the half cell.
///
/// With these weights the discrete counterpart of `int_0^x v_t = sigma - sigma_b`
/// holds exactly for the scheme, so reconstruction oracles built on it see only
/// time-quadrature error.
pub fn cumulative_node_integral_at_cells(field: &[f64], grid: &Grid) -> Result<Vec<f64>> {
    grid.check_nodes(field, "node field")?;
    let node_cum = cumulative_node_integral(field, grid)?;
    let dx = grid.dx();
    let out = (0..grid.n())
        .map(|i| node_cum[i] + dx * (2.0 * field[i] + field[i + 1]) / 6.0)
        .collect();
    Ok(out)
}

/// Difference quotient of a node field, one value per cell.
pub fn cell_gradient(field: &[f64], grid: &Grid) -> Result<Vec<f64>> {
    grid.check_nodes(field, "node field")?;
    let dx = grid.dx();
    Ok(field.windows(2).map(|w| (w[1] - w[0]) / dx).collect())
}

/// Difference quotient of a cell field at the nodes.
///
/// Boundary entries are zero, matching the insulated ends where the normal
/// temperature gradient vanishes.
pub fn node_gradient(field: &[f64], grid: &Grid) -> Result<Vec<f64>> {
    grid.check_cells(field, "cell field")?;
    let n = grid.n();
    let dx = grid.dx();
    let mut out = vec![0.0; n + 1];
    for j in 1..n {
        out[j] = (field[j] - field[j - 1]) / dx;
    }
    Ok(out)
}
