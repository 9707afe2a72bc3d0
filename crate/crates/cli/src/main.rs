//! Command-line front end: run simulations, execute the verification suite,
//! and perform refinement studies, emitting plot-ready CSV and JSON.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or configuration
//! error, 3 runtime step failure.

mod checks;
mod config;
mod output;

use anyhow::{anyhow, Result};
use clap::{Parser, Subcommand};
use config::RunConfig;
use lns1d_core::*;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_STEP_FAILURE: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "lns1d",
    about = "Free-boundary viscous gas simulator and verification suite in Lagrangian mass coordinates"
)]
struct Args {
    #[command(subcommand)]
    command: Command,

    /// Path to a key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override one configuration key, e.g. --set scenario.n=64 (repeatable).
    #[arg(long = "set", global = true)]
    set: Vec<String>,

    /// Concurrent runs for scenario sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    /// Append a physical-time column t = exp(t_hat) - 1 to the time series.
    #[arg(long, global = true)]
    original_time: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate one scenario and write timeseries.csv, snapshots.csv,
    /// summary.json.
    Simulate,
    /// Run the verification checks over the configured scenario set and
    /// write verify_report.json.
    Verify,
    /// Run the refinement ladder and write convergence.csv.
    Convergence,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = match load_config(&args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("configuration error: {e:#}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let result = match args.command {
        Command::Simulate => cmd_simulate(&cfg, args.original_time),
        Command::Verify => cmd_verify(&cfg, args.jobs.max(1)),
        Command::Convergence => cmd_convergence(&cfg),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn load_config(args: &Args) -> Result<RunConfig> {
    let mut map = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| anyhow!("cannot read {}: {e}", path.display()))?;
            config::parse_text(&text)?
        }
        None => Default::default(),
    };
    config::apply_overrides(&mut map, &args.set)?;
    config::build(&map)
}

fn cmd_simulate(cfg: &RunConfig, original_time: bool) -> Result<u8> {
    let dir = config::run_dir(cfg, "simulate");
    match run(&cfg.scenario, &cfg.params, &cfg.scheme) {
        Ok(out) => {
            write_run_outputs(&dir, cfg, &out, original_time, None)?;
            println!("simulate: wrote {}", dir.display());
            Ok(EXIT_OK)
        }
        Err(run_err) => {
            // Partial outputs plus a failure record, then exit 3.
            write_run_outputs(
                &dir,
                cfg,
                &run_err.partial,
                original_time,
                Some(run_err.source.to_string()),
            )?;
            eprintln!("step failure: {}", run_err.source);
            Ok(EXIT_STEP_FAILURE)
        }
    }
}

fn write_run_outputs(
    dir: &std::path::Path,
    cfg: &RunConfig,
    out: &RunOutput,
    original_time: bool,
    failure: Option<String>,
) -> Result<()> {
    output::write_timeseries(&dir.join("timeseries.csv"), &out.records, original_time)?;
    output::write_snapshots(&dir.join("snapshots.csv"), out, &cfg.output.snapshots)?;
    let summary = output::summary_json(&cfg.scenario, out, failure)?;
    output::write_json(&dir.join("summary.json"), &summary)?;
    Ok(())
}

fn cmd_verify(cfg: &RunConfig, jobs: usize) -> Result<u8> {
    if cfg.verify.betas.is_empty() {
        return Err(anyhow!("verify.betas is empty: nothing to verify"));
    }
    // The verified claims hold for constant viscosity and a genuinely
    // temperature-dependent conductivity.
    if cfg.params.alpha != 0.0 {
        return Err(anyhow!(
            "verify requires params.alpha = 0 (got {}); alpha > 0 is exploratory only",
            cfg.params.alpha
        ));
    }
    if let Some(beta) = cfg.verify.betas.iter().find(|b| **b <= 0.0) {
        return Err(anyhow!("verify requires beta > 0, got {beta}"));
    }
    let dir = config::run_dir(cfg, "verify");

    let mut all_checks = Vec::new();
    all_checks.extend(checks::trivial_exactness_check(cfg.scenario.n));
    all_checks.extend(checks::constant_arithmetic_check(cfg.scenario.n));

    // One run per beta, fanned out over worker threads.
    let specs: Vec<(String, ScenarioSpec)> = cfg
        .verify
        .betas
        .iter()
        .map(|&beta| {
            (
                format!("beta={beta}"),
                ScenarioSpec {
                    beta,
                    ..cfg.scenario.clone()
                },
            )
        })
        .collect();
    let results = run_parallel(&specs, &cfg.scheme, jobs);
    for ((label, _), result) in specs.iter().zip(results) {
        match result {
            Ok(out) => all_checks.extend(checks::run_checks(label, &out)),
            Err(run_err) => {
                eprintln!("step failure in {label}: {}", run_err.source);
                return Ok(EXIT_STEP_FAILURE);
            }
        }
    }

    let all_pass = all_checks.iter().all(|c| c.pass);
    for c in &all_checks {
        println!(
            "[{}] {} ({}): {:.6e} {} {:.6e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.scenario,
            c.measured,
            c.comparison,
            c.threshold
        );
    }
    let report = serde_json::json!({
        "all_pass": all_pass,
        "checks": serde_json::to_value(&all_checks)?,
    });
    output::write_json(&dir.join("verify_report.json"), &report)?;
    println!("verify: wrote {}", dir.join("verify_report.json").display());
    Ok(if all_pass { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

fn run_parallel(
    specs: &[(String, ScenarioSpec)],
    scheme: &SchemeConfig,
    jobs: usize,
) -> Vec<std::result::Result<RunOutput, Box<RunError>>> {
    let run_one = |spec: &ScenarioSpec| {
        let params = spec.params().expect("validated by the config layer");
        run(spec, &params, scheme)
    };
    if jobs <= 1 || specs.len() <= 1 {
        return specs.iter().map(|(_, spec)| run_one(spec)).collect();
    }
    let next = std::sync::atomic::AtomicUsize::new(0);
    let results: Vec<std::sync::Mutex<Option<_>>> =
        specs.iter().map(|_| std::sync::Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(specs.len()) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if k >= specs.len() {
                    break;
                }
                let out = run_one(&specs[k].1);
                *results[k].lock().unwrap() = Some(out);
            });
        }
    });
    results
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("worker filled every slot"))
        .collect()
}

fn cmd_convergence(cfg: &RunConfig) -> Result<u8> {
    let conv = &cfg.convergence;
    if conv.ns.len() < 3 {
        return Err(anyhow!(
            "refinement ladder needs at least 3 levels, got {}",
            conv.ns.len()
        ));
    }
    if conv.ns.len() != conv.dts.len() {
        return Err(anyhow!(
            "convergence.ns and convergence.dts must have equal length ({} vs {})",
            conv.ns.len(),
            conv.dts.len()
        ));
    }
    let spec = ScenarioSpec {
        n: conv.ns[0],
        t_hat_end: conv.t_hat_end,
        sample_every: conv.t_hat_end,
        ..cfg.scenario.clone()
    };
    let ladder: Vec<(usize, f64)> = conv.ns.iter().cloned().zip(conv.dts.iter().cloned()).collect();
    let levels = match refinement_study(&spec, &cfg.params, &cfg.scheme, &ladder) {
        Ok(levels) => levels,
        Err(run_err) => match run_err.source {
            Error::StepFailed { .. } => {
                eprintln!("step failure: {}", run_err.source);
                return Ok(EXIT_STEP_FAILURE);
            }
            other => return Err(anyhow!(other)),
        },
    };
    let dir = config::run_dir(cfg, "convergence");
    output::write_convergence(&dir.join("convergence.csv"), &levels)?;
    for level in &levels {
        println!(
            "n = {:4}, dt = {:.3e}: err = {:?}, order = {:?}",
            level.n, level.dt_max, level.err_vs_finest, level.observed_order
        );
    }
    println!("convergence: wrote {}", dir.join("convergence.csv").display());
    Ok(EXIT_OK)
}
