//! Domain types: physical parameters, discrete state, derived constants,
//! per-sample diagnostics, and trajectory history.

use crate::error::{Error, FieldId, Result};
use crate::grid::{self, Grid};

/// Which set of evolution equations a state belongs to, together with the
/// clock it carries.
///
/// * `Original` — physical time `t`; the specific volume grows linearly as
///   the gas expands freely.
/// * `Scaled` — log time `t_hat = log(1+t)` with `u` divided by `1+t`; the
///   free expansion becomes a bounded steady state.
/// * `WForm` — scaled variables with the velocity replaced by its mean-free
///   image `w`, which turns the stress-free ends into a constant outer
///   stress of -1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Formulation {
    Original,
    Scaled,
    WForm,
}

/// Constitutive exponents under the normalization `mu_tilde = kappa_tilde =
/// R = c_v = 1`: viscosity `mu(u) = 1 + alpha u^-alpha`, conductivity
/// `kappa(theta) = theta^beta`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PhysParams {
    pub beta: f64,
    pub alpha: f64,
    /// Asserts the unit normalization above; only `true` is supported.
    pub normalized: bool,
}

impl PhysParams {
    pub fn new(beta: f64, alpha: f64) -> Result<Self> {
        let p = Self {
            beta,
            alpha,
            normalized: true,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "beta must be >= 0, got {}",
                self.beta
            )));
        }
        if !(self.alpha >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be >= 0, got {}",
                self.alpha
            )));
        }
        if !self.normalized {
            return Err(Error::InvalidParameter(
                "only the unit-normalized constitutive laws are supported".into(),
            ));
        }
        Ok(())
    }

    /// Viscosity `mu(u) = 1 + alpha u^-alpha` (identically 1 when alpha = 0).
    pub fn mu(&self, u: f64) -> f64 {
        if self.alpha == 0.0 {
            1.0
        } else {
            1.0 + self.alpha * u.powf(-self.alpha)
        }
    }

    /// Conductivity `kappa(theta) = theta^beta` with cheap integer-power paths.
    pub fn kappa(&self, theta: f64) -> f64 {
        if self.beta == 0.0 {
            1.0
        } else if self.beta == 1.0 {
            theta
        } else if self.beta == 2.0 {
            theta * theta
        } else {
            theta.powf(self.beta)
        }
    }
}

impl Default for PhysParams {
    fn default() -> Self {
        Self {
            beta: 1.0,
            alpha: 0.0,
            normalized: true,
        }
    }
}

/// Discrete fields on a staggered grid, tagged with the formulation whose
/// equations (and clock) they obey.
///
/// `u` and `theta` are cell-centered and strictly positive; `vel` is
/// node-centered and holds `v` for `Original`/`Scaled` states or `w` for
/// `WForm` states.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub grid: Grid,
    pub formulation: Formulation,
    pub time: f64,
    pub u: Vec<f64>,
    pub vel: Vec<f64>,
    pub theta: Vec<f64>,
}

/// Tolerance on the mean of `w` for w-form states.
pub const W_MEAN_TOL: f64 = 1e-12;

impl State {
    pub fn new(
        grid: Grid,
        formulation: Formulation,
        time: f64,
        u: Vec<f64>,
        vel: Vec<f64>,
        theta: Vec<f64>,
    ) -> Result<Self> {
        let s = Self {
            grid,
            formulation,
            time,
            u,
            vel,
            theta,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.grid.n();
        if self.u.len() != n {
            return Err(Error::LengthMismatch {
                what: "u",
                expected: n,
                got: self.u.len(),
            });
        }
        if self.theta.len() != n {
            return Err(Error::LengthMismatch {
                what: "theta",
                expected: n,
                got: self.theta.len(),
            });
        }
        if self.vel.len() != n + 1 {
            return Err(Error::LengthMismatch {
                what: "vel",
                expected: n + 1,
                got: self.vel.len(),
            });
        }
        check_positive(&self.u, FieldId::SpecificVolume)?;
        check_positive(&self.theta, FieldId::Temperature)?;
        if self.formulation == Formulation::WForm {
            let mean = grid::node_integral(&self.vel, &self.grid)?;
            if mean.abs() > W_MEAN_TOL {
                return Err(Error::NonZeroWMean(mean));
            }
        }
        Ok(())
    }

    pub fn require(&self, expected: Formulation) -> Result<()> {
        if self.formulation != expected {
            return Err(Error::WrongFormulation {
                expected,
                got: self.formulation,
            });
        }
        Ok(())
    }

    pub fn u_min(&self) -> f64 {
        self.u.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn u_max(&self) -> f64 {
        self.u.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn theta_min(&self) -> f64 {
        self.theta.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn theta_max(&self) -> f64 {
        self.theta.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn check_positive(field: &[f64], id: FieldId) -> Result<()> {
    let mut min = f64::INFINITY;
    let mut at = 0;
    for (i, &v) in field.iter().enumerate() {
        if v < min {
            min = v;
            at = i;
        }
    }
    if !(min > 0.0) {
        return Err(Error::NonPositiveField {
            field: id,
            min,
            index: at,
        });
    }
    Ok(())
}

/// Constants derived once from the initial data.
///
/// `asymptotic` is the closed-form limit `A = 2 sqrt(36 + 3 (2 E0 -
/// v0_mean^2)) - 12`, equivalently the positive root of `A^2/24 + A = E0 -
/// v0_mean^2 / 2`. `alpha1 <= 1 <= alpha2` bracket the mean temperature; they
/// solve `x - log x - 1 = e0` for the entropy bound `e0`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct InitialDataSummary {
    /// Total energy `E0 = int (v0^2/2 + theta0)`.
    pub total_energy: f64,
    /// Mean initial velocity `int v0`.
    pub v0_mean: f64,
    /// Long-time limit of `u/(1+t)` and `theta`.
    pub asymptotic: f64,
    /// Upper bound for the entropy-dissipation estimate.
    pub entropy_const: f64,
    pub alpha1: f64,
    pub alpha2: f64,
}

/// Slack allowed on the algebraic identity tying `asymptotic` to the energy.
pub const SUMMARY_IDENTITY_TOL: f64 = 1e-12;

impl InitialDataSummary {
    /// Residual of `A^2/24 + A - (E0 - v0_mean^2/2)`.
    pub fn identity_residual(&self) -> f64 {
        self.asymptotic * self.asymptotic / 24.0 + self.asymptotic
            - (self.total_energy - 0.5 * self.v0_mean * self.v0_mean)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.asymptotic > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "asymptotic constant must be positive, got {}",
                self.asymptotic
            )));
        }
        let scale = 1.0 + self.total_energy.abs();
        if self.identity_residual().abs() > SUMMARY_IDENTITY_TOL * scale {
            return Err(Error::InvalidParameter(format!(
                "asymptotic constant inconsistent with energy: residual {:.3e}",
                self.identity_residual()
            )));
        }
        if !(self.alpha1 > 0.0 && self.alpha1 <= 1.0 + 1e-12 && self.alpha2 >= 1.0 - 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "mean-temperature bracket out of order: ({}, {})",
                self.alpha1, self.alpha2
            )));
        }
        Ok(())
    }
}

/// Conserved and monitored functionals at one sample time.
///
/// All integrals use the crate's staggered quadratures; `energy` combines the
/// piecewise-linear-exact velocity square with the midpoint temperature sum
/// so that it is the quantity the stepper conserves.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DiagnosticsRecord {
    pub time: f64,
    /// `int (v^2/2 + theta)`.
    pub energy: f64,
    /// `int v`.
    pub momentum: f64,
    /// `int (theta - log theta - 1)`, pointwise nonnegative.
    pub entropy: f64,
    /// Dissipation functional `V`.
    pub dissipation: f64,
    /// Mean temperature.
    pub theta_bar: f64,
    pub u_min: f64,
    pub u_max: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    /// H1 distance to the constant asymptotic state.
    pub h1_dist: f64,
    /// `int (psi^2/2 + A (theta/A - log(theta/A) - 1))`.
    pub psi_energy: f64,
}

/// Per-sample field copies retained for the quadrature oracles.
#[derive(Debug, Clone, Default)]
pub struct History {
    times: Vec<f64>,
    u: Vec<Vec<f64>>,
    vel: Vec<Vec<f64>>,
    theta: Vec<Vec<f64>>,
    cap: usize,
    stride: usize,
    pending: usize,
}

/// Default cap on retained samples before uniform thinning kicks in.
pub const HISTORY_DEFAULT_CAP: usize = 10_000;

impl History {
    pub fn new() -> Self {
        Self::with_capacity(HISTORY_DEFAULT_CAP)
    }

    /// `cap = 0` disables thinning.
    pub fn with_capacity(cap: usize) -> Self {
        Self {
            times: Vec::new(),
            u: Vec::new(),
            vel: Vec::new(),
            theta: Vec::new(),
            cap,
            stride: 1,
            pending: 0,
        }
    }

    /// Record a sample; drops to every `stride`-th sample once the cap is
    /// hit, doubling the stride each time (the initial sample always stays).
    pub fn push(&mut self, state: &State) {
        if self.pending > 0 {
            self.pending -= 1;
            return;
        }
        if let Some(&last) = self.times.last() {
            debug_assert!(state.time > last, "history times must increase");
        }
        self.times.push(state.time);
        self.u.push(state.u.clone());
        self.vel.push(state.vel.clone());
        self.theta.push(state.theta.clone());
        self.pending = self.stride - 1;
        if self.cap > 0 && self.times.len() >= self.cap {
            self.thin();
        }
    }

    fn thin(&mut self) {
        let keep = |k: usize| k.is_multiple_of(2);
        retain_indexed(&mut self.times, keep);
        retain_indexed(&mut self.u, keep);
        retain_indexed(&mut self.vel, keep);
        retain_indexed(&mut self.theta, keep);
        self.stride *= 2;
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn u_at(&self, k: usize) -> &[f64] {
        &self.u[k]
    }

    pub fn vel_at(&self, k: usize) -> &[f64] {
        &self.vel[k]
    }

    pub fn theta_at(&self, k: usize) -> &[f64] {
        &self.theta[k]
    }
}

fn retain_indexed<T>(v: &mut Vec<T>, keep: impl Fn(usize) -> bool) {
    let mut k = 0;
    v.retain(|_| {
        let r = keep(k);
        k += 1;
        r
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_reject_negative_exponents() {
        assert!(PhysParams::new(-0.5, 0.0).is_err());
        assert!(PhysParams::new(1.0, -1.0).is_err());
        assert!(PhysParams::new(0.5, 0.0).is_ok());
    }

    #[test]
    fn mu_is_one_for_constant_viscosity() {
        let p = PhysParams::new(1.0, 0.0).unwrap();
        assert_eq!(p.mu(0.3), 1.0);
        assert_eq!(p.mu(7.0), 1.0);
        let q = PhysParams::new(1.0, 1.0).unwrap();
        assert!((q.mu(2.0) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn kappa_power_paths_agree() {
        for beta in [0.0, 0.5, 1.0, 2.0, 2.7] {
            let p = PhysParams::new(beta, 0.0).unwrap();
            for th in [0.3, 1.0, 4.2] {
                assert!((p.kappa(th) - f64::powf(th, beta)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn state_rejects_nonpositive_fields() {
        let g = Grid::new(4).unwrap();
        let bad = State::new(
            g,
            Formulation::Scaled,
            0.0,
            vec![1.0, -0.1, 1.0, 1.0],
            vec![0.0; 5],
            vec![1.0; 4],
        );
        assert!(matches!(
            bad,
            Err(Error::NonPositiveField {
                field: FieldId::SpecificVolume,
                index: 1,
                ..
            })
        ));
    }

    #[test]
    fn wform_requires_zero_mean() {
        let g = Grid::new(4).unwrap();
        let bad = State::new(
            g,
            Formulation::WForm,
            0.0,
            vec![1.0; 4],
            vec![0.1; 5],
            vec![1.0; 4],
        );
        assert!(matches!(bad, Err(Error::NonZeroWMean(_))));

        let ok = State::new(
            g,
            Formulation::WForm,
            0.0,
            vec![1.0; 4],
            vec![0.0; 5],
            vec![1.0; 4],
        );
        assert!(ok.is_ok());
    }

    #[test]
    fn history_thins_but_keeps_first_sample() {
        let g = Grid::new(4).unwrap();
        let mut h = History::with_capacity(8);
        for k in 0..64 {
            let s = State::new(
                g,
                Formulation::Scaled,
                k as f64,
                vec![1.0; 4],
                vec![0.0; 5],
                vec![1.0; 4],
            )
            .unwrap();
            h.push(&s);
        }
        assert!(h.len() <= 8);
        assert_eq!(h.times()[0], 0.0);
        for w in h.times().windows(2) {
            assert!(w[1] > w[0], "history times must stay increasing");
        }
    }
}
