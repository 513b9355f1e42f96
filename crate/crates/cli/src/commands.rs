use std::fmt::Write as _;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use hexstab_core::analysis::{condition_report, measure_frequency_response, transfer_function};
use hexstab_core::closed_loop::{run, RunResult};
use hexstab_core::solver::SolverChoice;

use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::output::{
    ensure_dir, gamma_cell, norms_csv, num, snapshots_csv, summary_text, warnings_block, write_file,
};

/// What a command produced, for the caller to report.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    /// Text for standard output.
    pub report: String,
    /// Warnings, already written to `summary.txt` where one exists.
    pub warnings: Vec<String>,
}

fn solver_name(s: SolverChoice) -> String {
    match s {
        SolverChoice::Exact => "exact".into(),
        SolverChoice::Upwind { cfl } => format!("upwind(cfl={cfl})"),
    }
}

fn pool(config: &Config) -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.threads {
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))
}

/// Single scenario: `norms.csv`, `snapshots.csv`, `summary.txt`.
pub fn run_command(config: &Config) -> CliResult<Outcome> {
    let started = Instant::now();
    let scenario = &config.scenario;
    let RunResult {
        trajectory,
        summary,
    } = run(scenario)?;
    ensure_dir(&config.output_dir)?;
    write_file(&config.output_dir, "norms.csv", &norms_csv(&trajectory))?;
    write_file(
        &config.output_dir,
        "snapshots.csv",
        &snapshots_csv(&trajectory, &scenario.grid),
    )?;
    let text = summary_text(
        &summary,
        &scenario.grid,
        scenario.dt,
        &solver_name(scenario.solver),
        started.elapsed().as_secs_f64(),
    );
    write_file(&config.output_dir, "summary.txt", &text)?;
    Ok(Outcome {
        report: text,
        warnings: summary.warnings,
    })
}

pub const SWEEP_HEADER: &str =
    "index,h1,h2,l,tau,k1,k2,theorem_valid,sano_inside,gamma_hat,r_squared,floor_hit";

/// One row per Cartesian point, in declaration order, into `sweep.csv`.
pub fn sweep_command(config: &Config) -> CliResult<Outcome> {
    let started = Instant::now();
    let points = config.sweep_points()?;
    let results: Vec<CliResult<RunResult>> = pool(config)?.install(|| {
        points
            .par_iter()
            .map(|p| run(&p.scenario).map_err(CliError::from))
            .collect()
    });

    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    let mut warnings = Vec::new();
    for (point, result) in points.iter().zip(results) {
        let summary = result?.summary;
        let p = point.scenario.params;
        let (gamma, r2, floor_hit) = gamma_cell(&summary.plant_decay);
        let sano = summary
            .condition
            .sano
            .map_or_else(String::new, |w| w.inside().to_string());
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            point.index,
            num(p.h1),
            num(p.h2),
            num(p.l),
            num(p.tau),
            num(p.k1),
            num(p.k2),
            summary.condition.gains.theorem_valid,
            sano,
            gamma,
            r2,
            floor_hit
        );
        warnings.extend(
            summary
                .warnings
                .iter()
                .map(|w| format!("point {}: {w}", point.index)),
        );
    }
    ensure_dir(&config.output_dir)?;
    write_file(&config.output_dir, "sweep.csv", &csv)?;

    let mut text = String::new();
    let axes: Vec<String> = config
        .sweep
        .iter()
        .map(|(a, v)| format!("{a} ({} values)", v.len()))
        .collect();
    let _ = writeln!(text, "controller: {}", config.scenario.controller.name());
    let _ = writeln!(text, "sweep axes: {}", axes.join(", "));
    let _ = writeln!(text, "points: {}", points.len());
    text.push_str(&warnings_block(&warnings));
    let _ = writeln!(text, "wall_time_s: {:.3}", started.elapsed().as_secs_f64());
    write_file(&config.output_dir, "summary.txt", &text)?;
    Ok(Outcome {
        report: csv,
        warnings,
    })
}

pub const FREQRESP_HEADER: &str =
    "omega,output,input,formula_re,formula_im,measured_re,measured_im,rel_err";

/// Formula-vs-measured frequency response into `freqresp.csv`.
pub fn freqresp_command(config: &Config) -> CliResult<Outcome> {
    let scenario = &config.scenario;
    let params = scenario.params;
    let fr = &config.freqresp;
    let measured: Vec<CliResult<[[Complex64; 2]; 2]>> = pool(config)?.install(|| {
        fr.omegas
            .par_iter()
            .map(|&w| {
                measure_frequency_response(w, &params, &scenario.grid, fr.cycles, scenario.solver)
                    .map_err(CliError::from)
            })
            .collect()
    });
    let mut csv = String::from(FREQRESP_HEADER);
    csv.push('\n');
    let mut worst: f64 = 0.0;
    for (&omega, m) in fr.omegas.iter().zip(measured) {
        let m = m?;
        let g = transfer_function(Complex64::new(0.0, omega), &params).matrix;
        for i in 0..2 {
            for j in 0..2 {
                let rel = (m[i][j] - g[i][j]).norm() / g[i][j].norm();
                worst = worst.max(rel);
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{},{},{}",
                    num(omega),
                    i + 1,
                    j + 1,
                    num(g[i][j].re),
                    num(g[i][j].im),
                    num(m[i][j].re),
                    num(m[i][j].im),
                    num(rel)
                );
            }
        }
    }
    ensure_dir(&config.output_dir)?;
    write_file(&config.output_dir, "freqresp.csv", &csv)?;
    let mut text = String::new();
    let _ = writeln!(
        text,
        "freqresp: {} frequencies, cycles = {}, n_cells = {}, solver = {}",
        fr.omegas.len(),
        fr.cycles,
        scenario.grid.n_cells(),
        solver_name(scenario.solver)
    );
    let _ = writeln!(text, "max relative error: {}", num(worst));
    text.push_str(&warnings_block(config.warnings()));
    write_file(&config.output_dir, "summary.txt", &text)?;
    Ok(Outcome {
        report: text,
        warnings: config.warnings().to_vec(),
    })
}

/// Condition report only; writes nothing.
pub fn check_command(config: &Config) -> CliResult<Outcome> {
    let scenario = &config.scenario;
    let report = condition_report(&scenario.params, scenario.k_sano());
    let mut text = format!("controller: {}\n{report}", scenario.controller.name());
    text.push_str(&warnings_block(config.warnings()));
    Ok(Outcome {
        report: text,
        warnings: config.warnings().to_vec(),
    })
}
