//! Semi-discrete spatial operators, boundary closure, IMEX time stepping,
//! and the tridiagonal linear solver.

pub mod spatial;
pub mod stepper;
pub mod tridiag;

pub use spatial::{boundary_stress, heat_flux_field, rhs_scaled, stress_field, Rhs};
pub use stepper::{step_original, step_scaled, step_wform, SchemeConfig, StepReport, Stepper};
pub use tridiag::solve_tridiagonal;
