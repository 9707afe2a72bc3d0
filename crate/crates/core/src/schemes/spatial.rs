//! Semi-discrete spatial operators: stress, heat flux, and the strong-form
//! right-hand side of the scaled system.

use crate::error::{Error, FieldId, Result};
use crate::state::{Formulation, PhysParams, State};

/// Boundary stress closing the momentum equation for each formulation: the
/// ends are stress-free in original/scaled variables and carry a constant
/// outer stress of -1 in the w-form.
pub fn boundary_stress(formulation: Formulation) -> f64 {
    match formulation {
        Formulation::Original | Formulation::Scaled => 0.0,
        Formulation::WForm => -1.0,
    }
}

/// Cell-centered total stress.
///
/// Original/Scaled: `sigma = (mu(u) v_x - theta) / u`.
/// WForm: `sigma = (w_x - theta) / u`, whose boundary value is -1 at the
/// trivial steady state.
pub fn stress_field(s: &State, params: &PhysParams) -> Result<Vec<f64>> {
    let n = s.grid.n();
    let dx = s.grid.dx();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let u = s.u[i];
        if !(u > 0.0) {
            return Err(Error::NonPositiveField {
                field: FieldId::SpecificVolume,
                min: u,
                index: i,
            });
        }
        let gx = (s.vel[i + 1] - s.vel[i]) / dx;
        let visc = match s.formulation {
            Formulation::WForm => gx,
            _ => params.mu(u) * gx,
        };
        out.push((visc - s.theta[i]) / u);
    }
    Ok(out)
}

/// Node-centered heat flux `kappa(theta) theta_x / u` with insulated ends.
///
/// Interior nodes use arithmetic means of the adjacent cells for `kappa`'s
/// argument and for `u`; the boundary flux is identically zero.
pub fn heat_flux_field(s: &State, params: &PhysParams) -> Result<Vec<f64>> {
    let n = s.grid.n();
    let dx = s.grid.dx();
    let mut q = vec![0.0; n + 1];
    for j in 1..n {
        let th_l = s.theta[j - 1];
        let th_r = s.theta[j];
        if !(th_l > 0.0) || !(th_r > 0.0) {
            return Err(Error::NonPositiveField {
                field: FieldId::Temperature,
                min: th_l.min(th_r),
                index: if th_l <= th_r { j - 1 } else { j },
            });
        }
        let kappa = params.kappa(0.5 * (th_l + th_r));
        let u_bar = 0.5 * (s.u[j - 1] + s.u[j]);
        q[j] = kappa * (th_r - th_l) / dx / u_bar;
    }
    Ok(q)
}

/// Time derivatives of a scaled state.
#[derive(Debug, Clone)]
pub struct Rhs {
    /// Cell-centered `du/dt`.
    pub du: Vec<f64>,
    /// Node-centered `dvel/dt` (half-cell one-sided closure at the ends).
    pub dvel: Vec<f64>,
    /// Cell-centered `dtheta/dt`.
    pub dtheta: Vec<f64>,
}

/// Strong-form semi-discrete right-hand side of the scaled system:
/// `u_t = v_x - u`, `v_t = sigma_x`, `theta_t = v_x (mu v_x - theta)/u +
/// (kappa theta_x / u)_x`.
///
/// Boundary nodes use half-cell one-sided stress differences against the
/// stress-free closure. The implicit stepper discretizes the same fluxes
/// against the piecewise-linear mass matrix instead; this strong form is the
/// reference for fixed-point and stencil tests.
pub fn rhs_scaled(s: &State, params: &PhysParams) -> Result<Rhs> {
    s.require(Formulation::Scaled)?;
    let n = s.grid.n();
    let dx = s.grid.dx();
    let sigma = stress_field(s, params)?;
    let q = heat_flux_field(s, params)?;
    let sigma_b = boundary_stress(s.formulation);

    let mut du = Vec::with_capacity(n);
    let mut dtheta = Vec::with_capacity(n);
    for i in 0..n {
        let vx = (s.vel[i + 1] - s.vel[i]) / dx;
        du.push(vx - s.u[i]);
        let heating = params.mu(s.u[i]) * vx * vx / s.u[i];
        let compression = -s.theta[i] * vx / s.u[i];
        dtheta.push(heating + compression + (q[i + 1] - q[i]) / dx);
    }

    let mut dvel = vec![0.0; n + 1];
    dvel[0] = (sigma[0] - sigma_b) / (0.5 * dx);
    dvel[n] = (sigma_b - sigma[n - 1]) / (0.5 * dx);
    for j in 1..n {
        dvel[j] = (sigma[j] - sigma[j - 1]) / dx;
    }
    Ok(Rhs { du, dvel, dtheta })
}
