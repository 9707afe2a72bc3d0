//! Plot-ready CSV and JSON writers.
//!
//! CSV: fixed column order, `.` decimal separator, LF line endings, values in
//! scientific notation with enough digits to round-trip. JSON: UTF-8, keys
//! sorted, so re-reading and re-serializing a file is byte-identical.

use anyhow::{Context, Result};
use lns1d_core::{DiagnosticsRecord, RefinementLevel, RunOutput, ScenarioSpec};
use serde_json::Value;
use std::io::Write;
use std::path::Path;

pub const TIMESERIES_HEADER: &str =
    "t_hat,E,momentum,entropy,V,theta_bar,u_min,u_max,theta_min,theta_max,h1_dist,psi_energy";
pub const SNAPSHOTS_HEADER: &str = "t_hat,x,u,v,theta";
pub const CONVERGENCE_HEADER: &str = "level,n,dt,err_vs_finest,observed_order";

fn num(x: f64) -> String {
    format!("{x:.17e}")
}

/// Write the per-sample functional series; with `original_time` an extra
/// `t = exp(t_hat) - 1` column is appended after the standard columns.
pub fn write_timeseries(
    path: &Path,
    records: &[DiagnosticsRecord],
    original_time: bool,
) -> Result<()> {
    let mut out = String::new();
    out.push_str(TIMESERIES_HEADER);
    if original_time {
        out.push_str(",t");
    }
    out.push('\n');
    for r in records {
        let cols = [
            r.time,
            r.energy,
            r.momentum,
            r.entropy,
            r.dissipation,
            r.theta_bar,
            r.u_min,
            r.u_max,
            r.theta_min,
            r.theta_max,
            r.h1_dist,
            r.psi_energy,
        ];
        let mut row: Vec<String> = cols.iter().map(|&x| num(x)).collect();
        if original_time {
            row.push(num(r.time.exp_m1()));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

/// Write field snapshots at the history samples nearest the requested times.
/// Rows are per cell center with the velocity averaged from the flanking
/// nodes.
pub fn write_snapshots(path: &Path, out_run: &RunOutput, times: &[f64]) -> Result<()> {
    let mut out = String::new();
    out.push_str(SNAPSHOTS_HEADER);
    out.push('\n');
    let history = &out_run.history;
    for &want in times {
        if history.is_empty() {
            break;
        }
        let (k, _) = history
            .times()
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                (*a - want).abs().partial_cmp(&(*b - want).abs()).unwrap()
            })
            .unwrap();
        let t = history.times()[k];
        let grid = out_run.final_state.grid;
        let u = history.u_at(k);
        let vel = history.vel_at(k);
        let theta = history.theta_at(k);
        for i in 0..grid.n() {
            let row = [
                num(t),
                num(grid.cell_center(i)),
                num(u[i]),
                num(0.5 * (vel[i] + vel[i + 1])),
                num(theta[i]),
            ];
            out.push_str(&row.join(","));
            out.push('\n');
        }
    }
    write_atomic(path, out.as_bytes())
}

/// Write the refinement table. The finest rung is the reference: its error
/// and order columns stay empty; orders at round-off print `indeterminate`.
pub fn write_convergence(path: &Path, levels: &[RefinementLevel]) -> Result<()> {
    let mut out = String::new();
    out.push_str(CONVERGENCE_HEADER);
    out.push('\n');
    for (idx, level) in levels.iter().enumerate() {
        let err = level.err_vs_finest.map(num).unwrap_or_default();
        let order = match (level.err_vs_finest, level.observed_order) {
            (_, Some(o)) => format!("{o:.6}"),
            // Coarsest rung has no predecessor; the finest is the reference.
            (Some(_), None) if idx > 0 => "indeterminate".into(),
            _ => String::new(),
        };
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            idx,
            level.n,
            num(level.dt_max),
            err,
            order
        ));
    }
    write_atomic(path, out.as_bytes())
}

/// Run summary as sorted-key JSON.
pub fn summary_json(
    spec: &ScenarioSpec,
    out_run: &RunOutput,
    failure: Option<String>,
) -> Result<Value> {
    let records = &out_run.records;
    let drift = |f: fn(&DiagnosticsRecord) -> f64| -> f64 {
        if records.is_empty() {
            return f64::NAN;
        }
        let first = f(&records[0]);
        records
            .iter()
            .map(|r| (f(r) - first).abs())
            .fold(0.0, f64::max)
    };
    let entropy_check = lns1d_core::entropy_estimate_check(records, &out_run.summary).ok();
    let mut root = serde_json::Map::new();
    root.insert("scenario".into(), serde_json::to_value(spec)?);
    root.insert("summary".into(), serde_json::to_value(out_run.summary)?);
    root.insert("decay_fit".into(), serde_json::to_value(out_run.decay)?);
    root.insert("bounds".into(), serde_json::to_value(out_run.bounds)?);
    root.insert("stats".into(), serde_json::to_value(out_run.stats)?);
    root.insert("entropy_check".into(), serde_json::to_value(entropy_check)?);
    root.insert(
        "final_time".into(),
        serde_json::to_value(out_run.final_state.time)?,
    );
    if !records.is_empty() {
        let e0 = records[0].energy;
        root.insert(
            "energy_drift_rel".into(),
            serde_json::to_value(drift(|r| r.energy) / e0)?,
        );
        root.insert(
            "momentum_drift".into(),
            serde_json::to_value(drift(|r| r.momentum))?,
        );
        root.insert(
            "h1_final".into(),
            serde_json::to_value(records.last().unwrap().h1_dist)?,
        );
    }
    if let Ok(grad) = lns1d_core::gradient_energy(&out_run.final_state) {
        root.insert("gradient_energy_final".into(), serde_json::to_value(grad)?);
    }
    if let Some(reason) = failure {
        root.insert("failure".into(), Value::String(reason));
    }
    Ok(Value::Object(root))
}

/// Serialize through `serde_json::Value` so keys are sorted and a re-read/
/// re-write cycle is byte-identical.
pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("creating {}", parent.display()))?;
    }
    let mut f =
        std::fs::File::create(path).with_context(|| format!("writing {}", path.display()))?;
    f.write_all(bytes)?;
    Ok(())
}
