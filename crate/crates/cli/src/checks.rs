//! Verification checks run by `lns1d verify`: the per-scenario runtime
//! criteria plus the global exactness checks.

use lns1d_core::*;

/// One named check with its measured value and threshold.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Check {
    pub name: String,
    pub scenario: String,
    pub pass: bool,
    pub measured: f64,
    pub threshold: f64,
    /// How `measured` must relate to `threshold` to pass.
    pub comparison: String,
}

impl Check {
    fn le(name: &str, scenario: &str, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            scenario: scenario.into(),
            pass: measured <= threshold,
            measured,
            threshold,
            comparison: "<=".into(),
        }
    }

    fn ge(name: &str, scenario: &str, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            scenario: scenario.into(),
            pass: measured >= threshold,
            measured,
            threshold,
            comparison: ">=".into(),
        }
    }
}

/// Runtime checks on one finished run.
pub fn run_checks(label: &str, out: &RunOutput) -> Vec<Check> {
    let records = &out.records;
    let e0 = records[0].energy;
    let energy_drift = records
        .iter()
        .map(|r| (r.energy - e0).abs() / e0)
        .fold(0.0f64, f64::max);
    let m0 = records[0].momentum;
    let momentum_drift = records
        .iter()
        .map(|r| (r.momentum - m0).abs())
        .fold(0.0f64, f64::max);
    let entropy = entropy_estimate_check(records, &out.summary).expect("records nonempty");

    let m_of = |r: &DiagnosticsRecord| r.u_max.max(1.0 / r.u_min);
    let split = out.records.last().unwrap().time / 3.0;
    let early = records
        .iter()
        .filter(|r| r.time <= split)
        .map(m_of)
        .fold(0.0f64, f64::max);
    let late = records
        .iter()
        .filter(|r| r.time > split)
        .map(m_of)
        .fold(0.0f64, f64::max);

    let a = out.summary.asymptotic;
    let final_state = &out.final_state;
    let du = final_state
        .u
        .iter()
        .map(|u| (u - a).abs())
        .fold(0.0f64, f64::max);
    let dth = final_state
        .theta
        .iter()
        .map(|t| (t - a).abs())
        .fold(0.0f64, f64::max);
    let grad = gradient_energy(final_state).expect("final state is scaled");
    let h1_final = records.last().unwrap().h1_dist;

    let mut checks = vec![
        Check::le("energy_drift_rel", label, energy_drift, 1e-6),
        Check::le("momentum_drift", label, momentum_drift, 1e-6),
        Check::ge("entropy_estimate_margin", label, entropy.margin, 0.0),
        Check::le(
            "theta_bar_bracket_violations",
            label,
            out.stats.bracket_violations as f64,
            0.0,
        ),
        Check::ge("u_min_over_run", label, out.stats.u_min, f64::MIN_POSITIVE),
        Check::ge(
            "theta_min_over_run",
            label,
            out.stats.theta_min,
            f64::MIN_POSITIVE,
        ),
        Check::le(
            "bound_growth_after_transient",
            label,
            late / early - 1.0,
            1e-9,
        ),
        Check::le("h1_final", label, h1_final, 1e-6),
        Check::le("u_minus_A_final", label, du, 1e-6),
        Check::le("theta_minus_A_final", label, dth, 1e-6),
        Check::le("gradient_energy_final", label, grad, 1e-6),
    ];
    match &out.decay {
        Some(fit) => {
            checks.push(Check::ge("decay_rate", label, fit.lambda_hat, f64::MIN_POSITIVE));
            checks.push(Check::ge("decay_fit_r_squared", label, fit.r_squared, 0.99));
        }
        None => {
            checks.push(Check {
                name: "decay_fit_present".into(),
                scenario: label.into(),
                pass: false,
                measured: 0.0,
                threshold: 1.0,
                comparison: ">=".into(),
            });
        }
    }
    checks
}

/// Exactness of the free-expansion solution under both integrators.
pub fn trivial_exactness_check(n: usize) -> Vec<Check> {
    let spec = ScenarioSpec {
        kind: ScenarioKind::Trivial { c: 1.0 },
        n,
        beta: 1.0,
        alpha: 0.0,
        t_hat_end: 5.0,
        sample_every: 0.25,
    };
    let params = spec.params().expect("valid");
    let cfg = SchemeConfig {
        dt_init: 1e-3,
        dt_max: 1e-3,
        ..SchemeConfig::default()
    };
    let exact = make_initial(&spec).expect("valid");

    let mut dev_scaled = 0.0f64;
    let mut stepper = Stepper::new(cfg, params).expect("valid");
    let mut cur = exact.clone();
    while cur.time < 5.0 - 1e-12 {
        cur = match stepper.step_to(&cur, 5.0) {
            Ok((s, _)) => s,
            Err(_) => {
                dev_scaled = f64::INFINITY;
                break;
            }
        };
        for (a, b) in cur.u.iter().zip(&exact.u) {
            dev_scaled = dev_scaled.max((a - b).abs());
        }
        for (a, b) in cur.theta.iter().zip(&exact.theta) {
            dev_scaled = dev_scaled.max((a - b).abs());
        }
        for (a, b) in cur.vel.iter().zip(&exact.vel) {
            dev_scaled = dev_scaled.max((a - b).abs());
        }
    }

    let mut dev_orig = 0.0f64;
    let mut cur = from_scaled(&exact).expect("valid");
    let mut stepper = Stepper::new(cfg, params).expect("valid");
    while cur.time < 1.0 - 1e-12 {
        cur = match stepper.step_to(&cur, 1.0) {
            Ok((s, _)) => s,
            Err(_) => {
                dev_orig = f64::INFINITY;
                break;
            }
        };
    }
    for u in &cur.u {
        dev_orig = dev_orig.max((u - 2.0).abs());
    }
    for t in &cur.theta {
        dev_orig = dev_orig.max((t - 1.0).abs());
    }

    vec![
        Check::le("trivial_exactness_scaled", "trivial", dev_scaled, 1e-10),
        Check::le("trivial_exactness_original", "trivial", dev_orig, 1e-10),
    ]
}

/// Closed-form constants recomputed from exact data.
pub fn constant_arithmetic_check(n: usize) -> Vec<Check> {
    let params = PhysParams::new(1.0, 0.0).expect("valid");
    let a_of_trivial = |c: f64| -> f64 {
        let spec = ScenarioSpec {
            kind: ScenarioKind::Trivial { c },
            n,
            beta: 1.0,
            alpha: 0.0,
            t_hat_end: 1.0,
            sample_every: 0.5,
        };
        compute_summary(&make_initial(&spec).expect("valid"), &params)
            .expect("valid")
            .asymptotic
    };
    let grid = Grid::new(n).expect("n >= 4");
    let resting = State::new(
        grid,
        Formulation::Scaled,
        0.0,
        vec![1.0; n],
        vec![0.0; n + 1],
        vec![1.0; n],
    )
    .expect("valid");
    let a_rest = compute_summary(&resting, &params).expect("valid").asymptotic;
    vec![
        Check::le("A_trivial_c1", "constants", (a_of_trivial(1.0) - 1.0).abs(), 1e-12),
        Check::le("A_trivial_c2", "constants", (a_of_trivial(2.0) - 2.0).abs(), 1e-12),
        Check::le(
            "A_resting_gas",
            "constants",
            (a_rest - (2.0 * 42.0f64.sqrt() - 12.0)).abs(),
            1e-12,
        ),
    ]
}
