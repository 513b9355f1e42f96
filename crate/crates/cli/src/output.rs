//! CSV and summary emission. Numbers are written as `{:.16e}` (17
//! significant digits, round-trip exact); lines end in `\n`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use hexstab_core::analysis::DecayReport;
use hexstab_core::closed_loop::RunSummary;
use hexstab_core::solver::Trajectory;
use hexstab_core::{Error, Grid};

use crate::error::{CliError, CliResult};

pub const NORMS_HEADER: &str =
    "t,plant_l2,obs_err_l2,pred_err1_at_l,pred_err2_at_l,u1,u2,theta1_at_l,theta2_at_l";
pub const SNAPSHOTS_HEADER: &str = "t,x,theta1,theta2";

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn norms_csv(traj: &Trajectory) -> String {
    let mut out = String::with_capacity(traj.samples.len() * 220);
    out.push_str(NORMS_HEADER);
    out.push('\n');
    for s in &traj.samples {
        let cols = [
            s.t,
            s.plant_l2,
            s.obs_err_l2,
            s.pred_err_at_l[0],
            s.pred_err_at_l[1],
            s.u[0],
            s.u[1],
            s.exit[0],
            s.exit[1],
        ];
        push_row(&mut out, &cols);
    }
    out
}

pub fn snapshots_csv(traj: &Trajectory, grid: &Grid) -> String {
    let mut out = String::new();
    out.push_str(SNAPSHOTS_HEADER);
    out.push('\n');
    for snap in &traj.snapshots {
        for (i, x) in grid.nodes().enumerate() {
            let [a, b] = snap.field.at(i);
            push_row(&mut out, &[snap.t, x, a, b]);
        }
    }
    out
}

fn push_row(out: &mut String, cols: &[f64]) {
    for (i, v) in cols.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{v:.16e}");
    }
    out.push('\n');
}

/// `gamma_hat` as a CSV cell: `inf` for finite-time extinction, `NaN` when
/// no fit was possible.
pub fn gamma_cell(fit: &Result<DecayReport, Error>) -> (String, String, String) {
    match fit {
        Ok(r) => (
            r.gamma_hat.map_or_else(|| "inf".to_string(), num),
            num(r.r_squared),
            r.floor_hit.to_string(),
        ),
        Err(_) => ("NaN".into(), "NaN".into(), "true".into()),
    }
}

pub fn describe_fit(fit: &Result<DecayReport, Error>) -> String {
    match fit {
        Ok(r) if r.extinct() => format!(
            "finite-time extinction: every sample in [{}, {}] is below the floor; gamma_hat formally infinite",
            r.window[0], r.window[1]
        ),
        Ok(r) => format!(
            "gamma_hat = {} r_squared = {} window = [{}, {}] samples = {} floor_hit = {}",
            num(r.gamma_hat.unwrap_or(f64::NAN)),
            num(r.r_squared),
            r.window[0],
            r.window[1],
            r.samples_used,
            r.floor_hit
        ),
        Err(e) => format!("no fit ({e})"),
    }
}

/// Human-readable run summary.
pub fn summary_text(summary: &RunSummary, grid: &Grid, dt: f64, solver: &str, wall: f64) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "controller: {}", summary.controller);
    s.push_str(&summary.condition.to_string());
    let _ = writeln!(
        s,
        "tau: requested {} used {} ({} steps)",
        summary.tau.requested, summary.tau.value, summary.tau.steps
    );
    let _ = writeln!(
        s,
        "T: requested {} used {} ({} steps)",
        summary.t_final.requested, summary.t_final.value, summary.t_final.steps
    );
    let _ = writeln!(
        s,
        "grid: n_cells = {} dx = {} dt = {dt} solver = {solver}",
        grid.n_cells(),
        grid.dx()
    );
    let _ = writeln!(s, "plant decay: {}", describe_fit(&summary.plant_decay));
    if let Some(obs) = &summary.observer_decay {
        let _ = writeln!(s, "observer error decay: {}", describe_fit(obs));
    }
    if let Some(e) = summary.max_pred_err_at_l {
        let _ = writeln!(s, "max |pred_err_at_l| over (tau, T]: {}", num(e));
    }
    s.push_str(&warnings_block(&summary.warnings));
    let _ = writeln!(s, "wall_time_s: {wall:.3}");
    s
}

pub fn warnings_block(warnings: &[String]) -> String {
    let mut s = String::new();
    if warnings.is_empty() {
        s.push_str("warnings: none\n");
    } else {
        s.push_str("warnings:\n");
        for w in warnings {
            let _ = writeln!(s, "  - {w}");
        }
    }
    s
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::io(path, e))
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}
