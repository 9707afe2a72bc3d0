//! Acceptance suite: one test per criterion, each printing a pass line with
//! the measured margin.
//!
//! Reference scale: n = 128 cells, adaptive dt capped at 2.5e-5, horizon
//! t_hat = 15, cosine/sine perturbation of amplitude 0.1 on modes {1, 2},
//! conductivity exponents beta in {0.5, 1, 2}.

use lns1d_core::*;
use std::sync::OnceLock;

const REF_N: usize = 128;
const REF_DT: f64 = 2.5e-5;
const REF_T_END: f64 = 15.0;
const BETAS: [f64; 3] = [0.5, 1.0, 2.0];

fn perturbed_spec(beta: f64, n: usize, t_hat_end: f64, sample_every: f64) -> ScenarioSpec {
    ScenarioSpec {
        kind: ScenarioKind::Perturbed {
            c: 1.0,
            amp: 0.1,
            modes: vec![1, 2],
        },
        n,
        beta,
        alpha: 0.0,
        t_hat_end,
        sample_every,
    }
}

fn cfg_with(dt_max: f64) -> SchemeConfig {
    SchemeConfig {
        dt_init: dt_max.min(1e-6),
        dt_max,
        ..SchemeConfig::default()
    }
}

/// The three reference runs, computed once and shared across criteria.
fn reference_runs() -> &'static Vec<(f64, RunOutput)> {
    static RUNS: OnceLock<Vec<(f64, RunOutput)>> = OnceLock::new();
    RUNS.get_or_init(|| {
        BETAS
            .iter()
            .map(|&beta| {
                let spec = perturbed_spec(beta, REF_N, REF_T_END, 0.05);
                let out = run(&spec, &spec.params().unwrap(), &cfg_with(REF_DT))
                    .unwrap_or_else(|e| panic!("reference run beta={beta} failed: {e}"));
                (beta, out)
            })
            .collect()
    })
}

fn energy_drift(out: &RunOutput) -> f64 {
    let e0 = out.records[0].energy;
    out.records
        .iter()
        .map(|r| (r.energy - e0).abs() / e0)
        .fold(0.0, f64::max)
}

fn momentum_drift(out: &RunOutput) -> f64 {
    let m0 = out.records[0].momentum;
    out.records
        .iter()
        .map(|r| (r.momentum - m0).abs())
        .fold(0.0, f64::max)
}

fn max_dev(field: &[f64], target: f64) -> f64 {
    field.iter().map(|x| (x - target).abs()).fold(0.0, f64::max)
}

#[test]
fn criterion_01_trivial_solution_exactness() {
    // Scaled clock: the free-expansion data are a fixed point over [0, 5].
    let spec = ScenarioSpec {
        kind: ScenarioKind::Trivial { c: 1.0 },
        n: REF_N,
        beta: 1.0,
        alpha: 0.0,
        t_hat_end: 5.0,
        sample_every: 0.05,
    };
    let params = spec.params().unwrap();
    let exact = make_initial(&spec).unwrap();
    let mut stepper = Stepper::new(cfg_with(1e-3), params).unwrap();
    let mut cur = exact.clone();
    let mut dev_scaled = 0.0f64;
    while cur.time < 5.0 - 1e-12 {
        cur = stepper.step_to(&cur, 5.0).unwrap().0;
        dev_scaled = dev_scaled
            .max(max_dev(&cur.u, 1.0))
            .max(max_dev(&cur.theta, 1.0));
        for (j, v) in cur.vel.iter().enumerate() {
            dev_scaled = dev_scaled.max((v - (cur.grid.node(j) - 0.5)).abs());
        }
    }
    assert!(
        dev_scaled <= 1e-10,
        "scaled trivial trajectory deviates by {dev_scaled:.3e}"
    );

    // Original clock: u = c (1 + t) reproduced at t = 1.
    let orig0 = from_scaled(&exact).unwrap();
    let mut stepper = Stepper::new(cfg_with(1e-3), params).unwrap();
    let mut cur = orig0;
    while cur.time < 1.0 - 1e-12 {
        cur = stepper.step_to(&cur, 1.0).unwrap().0;
    }
    let dev_u = max_dev(&cur.u, 2.0);
    let dev_th = max_dev(&cur.theta, 1.0);
    assert!(dev_u <= 1e-10, "original-time u deviates by {dev_u:.3e}");
    assert!(dev_th <= 1e-10, "original-time theta deviates by {dev_th:.3e}");
    println!(
        "criterion 01 trivial-solution exactness [PASS] scaled dev {dev_scaled:.2e}, original dev {dev_u:.2e}"
    );
}

#[test]
fn criterion_02_asymptotic_constant_arithmetic() {
    let params = PhysParams::new(1.0, 0.0).unwrap();
    let summary_for_trivial = |c: f64| {
        let spec = ScenarioSpec {
            kind: ScenarioKind::Trivial { c },
            n: REF_N,
            beta: 1.0,
            alpha: 0.0,
            t_hat_end: 1.0,
            sample_every: 0.5,
        };
        compute_summary(&make_initial(&spec).unwrap(), &params).unwrap()
    };
    let s1 = summary_for_trivial(1.0);
    let s2 = summary_for_trivial(2.0);
    assert!(
        (s1.asymptotic - 1.0).abs() <= 1e-12,
        "A(c=1) = {}",
        s1.asymptotic
    );
    assert!(
        (s2.asymptotic - 2.0).abs() <= 1e-12,
        "A(c=2) = {}",
        s2.asymptotic
    );

    // Resting gas: v0 = 0, theta0 = 1.
    let grid = Grid::new(REF_N).unwrap();
    let resting = State::new(
        grid,
        Formulation::Scaled,
        0.0,
        vec![1.0; REF_N],
        vec![0.0; REF_N + 1],
        vec![1.0; REF_N],
    )
    .unwrap();
    let s3 = compute_summary(&resting, &params).unwrap();
    let closed_form = 2.0 * 42.0f64.sqrt() - 12.0;
    // Independent route: positive root of x^2/24 + x = E0 - v0_mean^2/2.
    let rhs = s3.total_energy - 0.5 * s3.v0_mean * s3.v0_mean;
    let quadratic_root = (-24.0 + (576.0 + 96.0 * rhs).sqrt()) / 2.0;
    assert!((s3.asymptotic - closed_form).abs() <= 1e-12);
    assert!(
        (s3.asymptotic - quadratic_root).abs() <= 1e-12,
        "closed form {} vs quadratic root {}",
        s3.asymptotic,
        quadratic_root
    );
    println!(
        "criterion 02 asymptotic-constant arithmetic [PASS] A(1)={:.15}, A(2)={:.15}, A(rest)={:.15}",
        s1.asymptotic, s2.asymptotic, s3.asymptotic
    );
}

#[test]
fn criterion_03_energy_identity() {
    let mut worst = 0.0f64;
    let mut worst_ratio = f64::INFINITY;
    for (beta, out) in reference_runs() {
        let drift = energy_drift(out);
        assert!(
            drift <= 1e-6,
            "relative energy drift {drift:.3e} at beta = {beta}"
        );
        worst = worst.max(drift);

        let spec = perturbed_spec(*beta, REF_N, REF_T_END, 0.05);
        let halved = run(&spec, &spec.params().unwrap(), &cfg_with(0.5 * REF_DT)).unwrap();
        let ratio = drift / energy_drift(&halved);
        assert!(
            ratio >= 1.8,
            "halving dt reduced the drift only {ratio:.2}x at beta = {beta}"
        );
        worst_ratio = worst_ratio.min(ratio);
    }
    println!(
        "criterion 03 energy identity [PASS] max drift {worst:.2e} (tol 1e-6), halving ratio >= {worst_ratio:.2}"
    );
}

#[test]
fn criterion_04_momentum_conservation() {
    let mut worst = 0.0f64;
    for (beta, out) in reference_runs() {
        let drift = momentum_drift(out);
        assert!(drift <= 1e-6, "momentum drift {drift:.3e} at beta = {beta}");
        worst = worst.max(drift);
    }
    println!("criterion 04 momentum conservation [PASS] max drift {worst:.2e} (tol 1e-6)");
}

#[test]
fn criterion_05_entropy_dissipation_estimate() {
    let mut min_margin = f64::INFINITY;
    for (beta, out) in reference_runs() {
        let check = entropy_estimate_check(&out.records, &out.summary).unwrap();
        assert!(
            check.pass && check.margin > 0.0,
            "entropy estimate violated at beta = {beta}: lhs {} vs bound {}",
            check.lhs,
            check.bound
        );
        min_margin = min_margin.min(check.margin);
    }
    println!(
        "criterion 05 entropy-dissipation estimate [PASS] min margin {min_margin:.3} above the bound"
    );
}

#[test]
fn criterion_06_mean_temperature_bracket() {
    for (beta, out) in reference_runs() {
        assert_eq!(
            out.stats.bracket_violations, 0,
            "mean temperature left the bracket at beta = {beta}"
        );
        assert_eq!(out.bounds.bracket_flags, 0);
        assert!(out.summary.alpha1 <= out.bounds.theta_bar_min + 1e-6);
        assert!(out.summary.alpha2 >= out.bounds.theta_bar_max - 1e-6);
    }
    let (_, out) = &reference_runs()[0];
    println!(
        "criterion 06 mean-temperature bracket [PASS] theta_bar in [{:.4}, {:.4}] within [{:.4}, {:.4}]",
        out.bounds.theta_bar_min, out.bounds.theta_bar_max, out.summary.alpha1, out.summary.alpha2
    );
}

#[test]
fn criterion_07_positivity_and_bounds() {
    for (beta, out) in reference_runs() {
        assert!(
            out.stats.u_min > 0.0 && out.stats.theta_min > 0.0,
            "positivity lost at beta = {beta}"
        );
        // No growth after the transient: the extreme of max(u_max, 1/u_min)
        // over t_hat in [5, 15] must not exceed the one over [0, 5].
        let m_of = |r: &DiagnosticsRecord| r.u_max.max(1.0 / r.u_min);
        let early = out
            .records
            .iter()
            .filter(|r| r.time <= 5.0)
            .map(m_of)
            .fold(0.0f64, f64::max);
        let late = out
            .records
            .iter()
            .filter(|r| r.time > 5.0)
            .map(m_of)
            .fold(0.0f64, f64::max);
        assert!(
            late <= early * (1.0 + 1e-9),
            "bound grew after the transient at beta = {beta}: {late} > {early}"
        );
    }
    let (_, out) = &reference_runs()[1];
    println!(
        "criterion 07 positivity and bounds [PASS] u_min {:.3}, theta_min {:.3}, M_hat {:.3}",
        out.stats.u_min, out.stats.theta_min, out.bounds.m_hat
    );
}

#[test]
fn criterion_08_representation_formula_oracle() {
    // Evolve with histories at cadence 0.01 and 0.005 and compare the
    // reconstruction with the evolved field.
    let deviation = |cadence: f64| -> f64 {
        let spec = perturbed_spec(1.0, REF_N, 2.0, cadence);
        let params = spec.params().unwrap();
        let initial = make_initial(&spec).unwrap();
        let mut history = History::with_capacity(0);
        history.push(&initial);
        let mut stepper = Stepper::new(cfg_with(REF_DT), params).unwrap();
        let mut cur = initial.clone();
        let samples = (2.0 / cadence).round() as usize;
        for k in 1..=samples {
            let target = k as f64 * cadence;
            while cur.time < target - 1e-12 {
                cur = stepper.step_to(&cur, target).unwrap().0;
            }
            history.push(&cur);
        }
        let reconstruction = u_representation_oracle(&history, &initial).unwrap();
        reconstruction
            .iter()
            .zip(&cur.u)
            .map(|(a, b)| (a - b).abs() / b)
            .fold(0.0, f64::max)
    };
    let coarse = deviation(0.01);
    let fine = deviation(0.005);
    assert!(
        coarse <= 1e-3,
        "oracle deviation {coarse:.3e} at cadence 0.01"
    );
    let ratio = coarse / fine;
    assert!(
        ratio >= 1.8,
        "halving the cadence reduced the deviation only {ratio:.2}x"
    );
    println!(
        "criterion 08 representation-formula oracle [PASS] deviation {coarse:.2e} (tol 1e-3), cadence ratio {ratio:.2}"
    );
}

#[test]
fn criterion_09_convergence_to_asymptotic_state() {
    let mut worst = 0.0f64;
    for (beta, out) in reference_runs() {
        let a = out.summary.asymptotic;
        let h1 = out.records.last().unwrap().h1_dist;
        let du = max_dev(&out.final_state.u, a);
        let dth = max_dev(&out.final_state.theta, a);
        let grad = gradient_energy(&out.final_state).unwrap();
        for (name, value) in [("h1", h1), ("|u-A|", du), ("|theta-A|", dth), ("gradients", grad)]
        {
            assert!(
                value <= 1e-6,
                "{name} = {value:.3e} at t_hat = 15, beta = {beta}"
            );
            worst = worst.max(value);
        }
        // The spatial gradients collapse far below the headline tolerance.
        assert!(
            grad <= 1e-10,
            "gradient energy {grad:.3e} at t_hat = 15, beta = {beta}"
        );
    }
    println!(
        "criterion 09 convergence to the asymptotic state [PASS] max deviation {worst:.2e} (tol 1e-6)"
    );
}

#[test]
fn criterion_10_exponential_decay() {
    let mut min_r2 = 1.0f64;
    let mut lambdas = Vec::new();
    for (beta, out) in reference_runs() {
        let fit = out
            .decay
            .as_ref()
            .unwrap_or_else(|| panic!("no decay window at beta = {beta}"));
        assert!(
            fit.lambda_hat > 0.0,
            "nonpositive decay rate {} at beta = {beta}",
            fit.lambda_hat
        );
        assert!(
            fit.r_squared >= 0.99,
            "r^2 = {} at beta = {beta}",
            fit.r_squared
        );
        min_r2 = min_r2.min(fit.r_squared);
        lambdas.push((beta, fit.lambda_hat));
    }
    println!(
        "criterion 10 exponential decay [PASS] lambda_hat {:?}, min r^2 {min_r2:.4}",
        lambdas
            .iter()
            .map(|(b, l)| format!("beta {b}: {l:.3}"))
            .collect::<Vec<_>>()
    );
}

#[test]
fn criterion_11_psi_identity_residual() {
    let integrated_residual = |n: usize, dt: f64| -> f64 {
        let spec = perturbed_spec(1.0, n, 2.0, 0.05);
        let params = spec.params().unwrap();
        let scaled0 = make_initial(&spec).unwrap();
        let summary = compute_summary(&scaled0, &params).unwrap();
        let mut cur = build_w(&scaled0, summary.v0_mean).unwrap();
        let mut stepper = Stepper::new(cfg_with(dt), params).unwrap();
        let mut total = 0.0;
        while cur.time < 2.0 - 1e-12 {
            let (next, report) = stepper.step_to(&cur, 2.0).unwrap();
            total +=
                report.dt * psi_identity_residual(&cur, &next, report.dt, &summary, &params).unwrap();
            cur = next;
        }
        total
    };
    let coarse = integrated_residual(REF_N, REF_DT);
    assert!(
        coarse <= 1e-3,
        "time-integrated identity residual {coarse:.3e}"
    );
    let fine = integrated_residual(2 * REF_N, 0.5 * REF_DT);
    let ratio = coarse / fine;
    assert!(
        ratio >= 1.8,
        "refining (dx/2, dt/2) reduced the residual only {ratio:.2}x"
    );
    println!(
        "criterion 11 psi-identity residual [PASS] integrated residual {coarse:.2e} (tol 1e-3), refinement ratio {ratio:.2}"
    );
}

#[test]
fn criterion_12_cross_formulation_equivalence() {
    let spec = ScenarioSpec {
        kind: ScenarioKind::Perturbed {
            c: 1.0,
            amp: 0.05,
            modes: vec![1],
        },
        n: REF_N,
        beta: 1.0,
        alpha: 0.0,
        t_hat_end: 1.0,
        sample_every: 0.1,
    };
    let params = spec.params().unwrap();
    let scaled0 = make_initial(&spec).unwrap();
    let summary = compute_summary(&scaled0, &params).unwrap();
    let cfg = cfg_with(1e-3);

    let field_dev = |a: &State, b: &State| -> f64 {
        let mut d = 0.0f64;
        for (x, y) in a.u.iter().zip(&b.u) {
            d = d.max((x - y).abs());
        }
        for (x, y) in a.vel.iter().zip(&b.vel) {
            d = d.max((x - y).abs());
        }
        for (x, y) in a.theta.iter().zip(&b.theta) {
            d = d.max((x - y).abs());
        }
        d
    };

    // Original-time trajectory over t in [0, 1], mapped sample by sample.
    let mut orig = from_scaled(&scaled0).unwrap();
    let mut st_orig = Stepper::new(cfg, params).unwrap();
    let mut scaled = scaled0.clone();
    let mut st_scaled = Stepper::new(cfg, params).unwrap();
    let mut dev_orig = 0.0f64;
    for k in 1..=10 {
        let t = k as f64 * 0.1;
        while orig.time < t - 1e-12 {
            orig = st_orig.step_to(&orig, t).unwrap().0;
        }
        let mapped = to_scaled(&orig).unwrap();
        while scaled.time < mapped.time - 1e-12 {
            scaled = st_scaled.step_to(&scaled, mapped.time).unwrap().0;
        }
        dev_orig = dev_orig.max(field_dev(&mapped, &scaled));
    }
    assert!(
        dev_orig <= 1e-5,
        "original-vs-scaled deviation {dev_orig:.3e}"
    );

    // w-form trajectory over t_hat in [0, 1], mapped back to velocity form.
    let mut wstate = build_w(&scaled0, summary.v0_mean).unwrap();
    let mut st_w = Stepper::new(cfg, params).unwrap();
    let mut scaled = scaled0;
    let mut st_scaled = Stepper::new(cfg, params).unwrap();
    let mut dev_w = 0.0f64;
    for k in 1..=10 {
        let t = k as f64 * 0.1;
        while wstate.time < t - 1e-12 {
            wstate = st_w.step_to(&wstate, t).unwrap().0;
        }
        while scaled.time < t - 1e-12 {
            scaled = st_scaled.step_to(&scaled, t).unwrap().0;
        }
        let mapped = w_to_v(&wstate, summary.v0_mean).unwrap();
        dev_w = dev_w.max(field_dev(&mapped, &scaled));
    }
    assert!(dev_w <= 1e-5, "w-form-vs-scaled deviation {dev_w:.3e}");
    println!(
        "criterion 12 cross-formulation equivalence [PASS] original {dev_orig:.2e}, w-form {dev_w:.2e} (tol 1e-5)"
    );
}

#[test]
fn criterion_13_grid_convergence() {
    let spec = perturbed_spec(1.0, 32, 2.0, 0.25);
    let params = spec.params().unwrap();
    // dt scales with dx^2 so the first-order-in-dt compression bias stays
    // subordinate to the spatial error on every rung.
    let ladder: Vec<(usize, f64)> = [32usize, 64, 128, 256]
        .iter()
        .map(|&n| (n, 2e-5 * (128.0 / n as f64).powi(2)))
        .collect();
    let levels = refinement_study(&spec, &params, &SchemeConfig::default(), &ladder).unwrap();
    let mut orders = Vec::new();
    for level in &levels {
        if let Some(order) = level.observed_order {
            assert!(
                order >= 1.8,
                "observed order {order:.2} below 1.8 at n = {}",
                level.n
            );
            orders.push(format!("n {}: {:.2}", level.n, order));
        }
    }
    assert!(
        orders.len() >= 2,
        "the four-rung ladder must yield at least two observed orders"
    );
    println!("criterion 13 grid convergence [PASS] interior orders {orders:?} (floor 1.8)");
}
