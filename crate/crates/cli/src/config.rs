//! Flat key/value run configuration with a closed schema.
//!
//! Files hold `section.key = value` lines with `#` comments. Sections:
//! `scenario.`, `params.`, `scheme.`, `output.`, `verify.`, `convergence.`.
//! Unknown keys are rejected so typos fail loudly.

use anyhow::{anyhow, bail, Context, Result};
use lns1d_core::{PhysParams, ScenarioKind, ScenarioSpec, SchemeConfig};
use std::collections::BTreeMap;
use std::path::PathBuf;

pub const KNOWN_KEYS: &[&str] = &[
    "scenario.kind",
    "scenario.c",
    "scenario.amp",
    "scenario.modes",
    "scenario.seed",
    "scenario.u_lo",
    "scenario.u_hi",
    "scenario.theta_lo",
    "scenario.theta_hi",
    "scenario.v_amp",
    "scenario.n",
    "scenario.t_hat_end",
    "scenario.sample_every",
    "params.beta",
    "params.alpha",
    "scheme.dt_init",
    "scheme.dt_max",
    "scheme.dt_min",
    "scheme.safety",
    "scheme.picard_max",
    "scheme.picard_tol",
    "scheme.positivity_floor",
    "scheme.disable_conduction",
    "output.dir",
    "output.name",
    "output.snapshots",
    "verify.betas",
    "convergence.ns",
    "convergence.dts",
    "convergence.t_hat_end",
];

#[derive(Debug, Clone)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub name: Option<String>,
    /// Scaled times at which field snapshots are written.
    pub snapshots: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub betas: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceConfig {
    pub ns: Vec<usize>,
    pub dts: Vec<f64>,
    pub t_hat_end: f64,
}

/// Everything a command needs, resolved from defaults, file, and overrides.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario: ScenarioSpec,
    pub params: PhysParams,
    pub scheme: SchemeConfig,
    pub output: OutputConfig,
    pub verify: VerifyConfig,
    pub convergence: ConvergenceConfig,
}

/// Parse `key = value` text, rejecting malformed lines.
pub fn parse_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected `key = value`, got `{raw}`", lineno + 1))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Apply `--set key=value` overrides on top of the file map.
pub fn apply_overrides(map: &mut BTreeMap<String, String>, sets: &[String]) -> Result<()> {
    for s in sets {
        let (key, value) = s
            .split_once('=')
            .ok_or_else(|| anyhow!("--set needs key=value, got `{s}`"))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(())
}

fn get_f64(map: &BTreeMap<String, String>, key: &str, default: f64) -> Result<f64> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => v.parse().with_context(|| format!("{key}: not a number: `{v}`")),
    }
}

fn get_usize(map: &BTreeMap<String, String>, key: &str, default: usize) -> Result<usize> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => v.parse().with_context(|| format!("{key}: not an integer: `{v}`")),
    }
}

fn get_u64(map: &BTreeMap<String, String>, key: &str, default: u64) -> Result<u64> {
    match map.get(key) {
        None => Ok(default),
        Some(v) => v.parse().with_context(|| format!("{key}: not an integer: `{v}`")),
    }
}

fn get_bool(map: &BTreeMap<String, String>, key: &str, default: bool) -> Result<bool> {
    match map.get(key).map(String::as_str) {
        None => Ok(default),
        Some("true") | Some("1") => Ok(true),
        Some("false") | Some("0") => Ok(false),
        Some(v) => bail!("{key}: expected true/false, got `{v}`"),
    }
}

fn get_list_f64(map: &BTreeMap<String, String>, key: &str, default: &[f64]) -> Result<Vec<f64>> {
    match map.get(key) {
        None => Ok(default.to_vec()),
        Some(v) if v.trim().is_empty() => Ok(Vec::new()),
        Some(v) => v
            .split(',')
            .map(|p| {
                p.trim()
                    .parse()
                    .with_context(|| format!("{key}: not a number: `{p}`"))
            })
            .collect(),
    }
}

fn get_list_usize(
    map: &BTreeMap<String, String>,
    key: &str,
    default: &[usize],
) -> Result<Vec<usize>> {
    match map.get(key) {
        None => Ok(default.to_vec()),
        Some(v) if v.trim().is_empty() => Ok(Vec::new()),
        Some(v) => v
            .split(',')
            .map(|p| {
                p.trim()
                    .parse()
                    .with_context(|| format!("{key}: not an integer: `{p}`"))
            })
            .collect(),
    }
}

/// Resolve the typed configuration, validating the schema.
pub fn build(map: &BTreeMap<String, String>) -> Result<RunConfig> {
    for key in map.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            bail!("unknown configuration key `{key}`");
        }
    }

    let n = get_usize(map, "scenario.n", 128)?;
    let t_hat_end = get_f64(map, "scenario.t_hat_end", 15.0)?;
    let kind = match map
        .get("scenario.kind")
        .map(String::as_str)
        .unwrap_or("perturbed")
    {
        "trivial" => ScenarioKind::Trivial {
            c: get_f64(map, "scenario.c", 1.0)?,
        },
        "perturbed" => ScenarioKind::Perturbed {
            c: get_f64(map, "scenario.c", 1.0)?,
            amp: get_f64(map, "scenario.amp", 0.1)?,
            modes: get_list_usize(map, "scenario.modes", &[1, 2])?,
        },
        "random_smooth" => ScenarioKind::RandomSmooth {
            seed: get_u64(map, "scenario.seed", 1)?,
            u_range: (
                get_f64(map, "scenario.u_lo", 0.5)?,
                get_f64(map, "scenario.u_hi", 2.0)?,
            ),
            theta_range: (
                get_f64(map, "scenario.theta_lo", 0.5)?,
                get_f64(map, "scenario.theta_hi", 2.0)?,
            ),
            v_amp: get_f64(map, "scenario.v_amp", 0.3)?,
        },
        other => bail!("scenario.kind: unknown kind `{other}`"),
    };
    let scenario = ScenarioSpec {
        kind,
        n,
        beta: get_f64(map, "params.beta", 1.0)?,
        alpha: get_f64(map, "params.alpha", 0.0)?,
        t_hat_end,
        sample_every: get_f64(map, "scenario.sample_every", 0.05)?,
    };
    scenario
        .validate()
        .map_err(|e| anyhow!("invalid scenario: {e}"))?;
    let params = scenario.params().map_err(|e| anyhow!("{e}"))?;

    let defaults = SchemeConfig::default();
    let scheme = SchemeConfig {
        dt_init: get_f64(map, "scheme.dt_init", defaults.dt_init)?,
        dt_max: get_f64(map, "scheme.dt_max", defaults.dt_max)?,
        dt_min: get_f64(map, "scheme.dt_min", defaults.dt_min)?,
        safety: get_f64(map, "scheme.safety", defaults.safety)?,
        picard_max: get_usize(map, "scheme.picard_max", defaults.picard_max)?,
        picard_tol: get_f64(map, "scheme.picard_tol", defaults.picard_tol)?,
        positivity_floor: get_f64(map, "scheme.positivity_floor", defaults.positivity_floor)?,
        conduction_enabled: !get_bool(map, "scheme.disable_conduction", false)?,
    };
    scheme.validate().map_err(|e| anyhow!("{e}"))?;

    let output = OutputConfig {
        dir: PathBuf::from(map.get("output.dir").cloned().unwrap_or_else(|| "out".into())),
        name: map.get("output.name").cloned(),
        snapshots: get_list_f64(map, "output.snapshots", &[0.0, t_hat_end])?,
    };
    let verify = VerifyConfig {
        betas: get_list_f64(map, "verify.betas", &[0.5, 1.0, 2.0])?,
    };
    let convergence = ConvergenceConfig {
        ns: get_list_usize(map, "convergence.ns", &[32, 64, 128, 256])?,
        dts: get_list_f64(
            map,
            "convergence.dts",
            &[3.2e-4, 8.0e-5, 2.0e-5, 5.0e-6],
        )?,
        t_hat_end: get_f64(map, "convergence.t_hat_end", 2.0)?,
    };

    Ok(RunConfig {
        scenario,
        params,
        scheme,
        output,
        verify,
        convergence,
    })
}

/// Directory for this run's outputs: `$LNS1D_OUT_DIR` (or `output.dir`)
/// joined with the run name.
pub fn run_dir(cfg: &RunConfig, command: &str) -> PathBuf {
    let root = std::env::var_os("LNS1D_OUT_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| cfg.output.dir.clone());
    let name = cfg.output.name.clone().unwrap_or_else(|| {
        let kind = match &cfg.scenario.kind {
            ScenarioKind::Trivial { .. } => "trivial",
            ScenarioKind::Perturbed { .. } => "perturbed",
            ScenarioKind::RandomSmooth { .. } => "random",
        };
        format!(
            "{command}-{kind}-b{}-n{}",
            cfg.scenario.beta, cfg.scenario.n
        )
    });
    root.join(name)
}
