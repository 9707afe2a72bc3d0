//! Shared builders for the criterion benchmarks.

use lns1d_core::*;

/// Perturbed scaled state used as the stepping workload.
pub fn bench_state(n: usize) -> (State, PhysParams, SchemeConfig) {
    let spec = ScenarioSpec {
        kind: ScenarioKind::Perturbed {
            c: 1.0,
            amp: 0.1,
            modes: vec![1, 2],
        },
        n,
        beta: 1.0,
        alpha: 0.0,
        t_hat_end: 1.0,
        sample_every: 0.5,
    };
    let state = make_initial(&spec).expect("valid spec");
    let params = spec.params().expect("valid params");
    let cfg = SchemeConfig {
        dt_init: 1e-5,
        dt_max: 1e-5,
        ..SchemeConfig::default()
    };
    (state, params, cfg)
}

/// Diagonally dominant tridiagonal system of size `m`.
pub fn bench_tridiag(m: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut seed = 0x243f6a8885a308d3u64;
    let mut next = move || {
        seed ^= seed << 13;
        seed ^= seed >> 7;
        seed ^= seed << 17;
        (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let mut lower = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut upper = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    for i in 0..m {
        if i > 0 {
            lower[i] = next();
        }
        if i + 1 < m {
            upper[i] = next();
        }
        diag[i] = 3.0 + next();
        rhs[i] = next();
    }
    (lower, diag, upper, rhs)
}
