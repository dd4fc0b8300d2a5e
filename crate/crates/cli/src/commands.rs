// SPDX-License-Identifier: Apache-2.0

//! The `run`, `sweep` and `mesh` subcommands.

use std::path::Path;

use alemfs::evolution::{
    self, evaluate, interior_dispersion, run_with, seed_interior, snapshot_text, trajectory_csv_row, EvolutionConfig,
    EvolutionState, StepRecord, Trajectory, TRAJECTORY_CSV_HEADER,
};
use alemfs::exec;
use alemfs::geometry::{fill_distance, BoundaryCurve};
use alemfs::indicators::{fmt_real, report_csv_row, REPORT_CSV_HEADER};
use alemfs::mesh::{load_mesh, quality, quality_csv_row, save_mesh, MeshQualityReport, TriMesh, QUALITY_CSV_HEADER};
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Mode};
use crate::output::{csv, ensure_dir, write_atomic, write_json};
use crate::svg::{self, Axes, Scale, Series};
use crate::{exit, CliError};

/// Header of the per-step curve statistics CSV.
pub const CURVE_CSV_HEADER: &str = "t,mean_radius,area,dispersion,escaped";

/// Header of the mode comparison CSV.
pub const DISPERSION_CSV_HEADER: &str = "t,dispersion_square,dispersion_zero_padded";

/// Boundary vertices must match the preset curve to this distance.
pub const MESH_BOUNDARY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Completed,
    /// The run stopped before `T`; the reason is also written to `reason.txt`.
    Terminated(String),
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Completed => exit::SUCCESS,
            Outcome::Terminated(_) => exit::EARLY_TERMINATION,
        }
    }
}

fn note(quiet: bool, msg: &str) {
    if !quiet {
        eprintln!("{msg}");
    }
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Square => "square",
        Mode::ZeroPadded => "zero_padded",
    }
}

fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(fmt_real(v))
    }
}

fn curve_row(state: &EvolutionState) -> String {
    let c = state.curve.centroid();
    format!(
        "{},{},{},{},{}",
        fmt_real(state.t),
        fmt_real(state.curve.mean_radius_about(c)),
        fmt_real(state.curve.area()),
        fmt_real(interior_dispersion(&state.interior)),
        state.escaped_count()
    )
}

fn initial_state(config: &ExperimentConfig, curve: BoundaryCurve) -> Result<EvolutionState, CliError> {
    let interior = match config.interior_spacing {
        Some(s) => seed_interior(&curve, s).map_err(|e| CliError::Config(e.to_string()))?,
        None => Vec::new(),
    };
    Ok(EvolutionState::new(curve, interior))
}

/// Indicators at the final state, as JSON.
fn final_report(trajectory: &Trajectory, evo: &EvolutionConfig) -> Value {
    let state = &trajectory.final_state;
    let c = state.curve.centroid();
    let mut doc = json!({
        "t": num(state.t),
        "steps": trajectory.records.len(),
        "n_nodes": state.curve.len(),
        "h": num(fill_distance(&state.curve)),
        "mean_radius": num(state.curve.mean_radius_about(c)),
        "area": num(state.curve.area()),
        "dispersion": num(interior_dispersion(&state.interior)),
        "escaped": state.escaped_count(),
        "termination": trajectory.termination,
    });
    match evaluate(state, evo, trajectory.records.len()) {
        Ok(r) => {
            doc["report"] = json!({
                "mode": r.mode.name(),
                "E_loo_inf": num(r.report.e_loo_inf),
                "E_loo_hat_inf": num(r.report.e_loo_hat_inf),
                "E_loo_rippa_inf": r.report.e_loo_rippa_inf.map(num),
                "E_pR_inf": num(r.report.e_pr_inf),
                "E_mp_inf": num(r.report.e_mp_inf),
                "cond": num(r.report.cond),
                "pr_heuristic": r.report.pr_heuristic,
                "mp_degenerate_reference": r.report.mp_degenerate_reference,
                "flags": r.report.flags,
                "kappa_min": num(r.kappa_min),
                "kappa_max": num(r.kappa_max),
            });
        }
        Err(e) => doc["report_error"] = json!(e.to_string()),
    }
    doc
}

fn indicator_plot(records: &[StepRecord], title: &str) -> Result<String, CliError> {
    let pick = |f: fn(&StepRecord) -> f64| records.iter().map(|r| (r.t, f(r))).collect::<Vec<_>>();
    let series = [
        Series::new("E_LOO", pick(|r| r.report.e_loo_inf)),
        Series::new("E_pR", pick(|r| r.report.e_pr_inf)),
        Series::new("E_MP", pick(|r| r.report.e_mp_inf)),
    ];
    svg::render(&series, &Axes::new(title, "t", "indicator", Scale::Linear, Scale::Log))
        .map_err(|e| CliError::Io(e.to_string()))
}

struct ModeRun {
    trajectory: Trajectory,
    curve_rows: Vec<String>,
    dispersion: Vec<(f64, f64)>,
}

fn run_mode(config: &ExperimentConfig, evo: &EvolutionConfig, quiet: bool) -> Result<ModeRun, CliError> {
    let state = initial_state(config, config.curve(config.n_nodes)?)?;
    let mut curve_rows = vec![curve_row(&state)];
    let mut dispersion = vec![(state.t, interior_dispersion(&state.interior))];
    let trajectory = run_with(state, evo, |o| {
        curve_rows.push(curve_row(&o.state));
        dispersion.push((o.state.t, interior_dispersion(&o.state.interior)));
    })
    .map_err(|e| CliError::Config(e.to_string()))?;
    note(
        quiet,
        &format!(
            "{}: {} steps, t = {}, {}",
            evo.mode,
            trajectory.records.len(),
            trajectory.final_state.t,
            trajectory.termination.as_deref().unwrap_or("completed")
        ),
    );
    Ok(ModeRun {
        trajectory,
        curve_rows,
        dispersion,
    })
}

fn write_snapshots(dir: &Path, trajectory: &Trajectory) -> Result<(), CliError> {
    for s in &trajectory.snapshots {
        write_atomic(&dir.join(format!("step_{:06}.txt", s.step)), &snapshot_text(&s.state))?;
    }
    Ok(())
}

fn write_reason(out: &Path, reasons: &[String]) -> Result<Outcome, CliError> {
    if reasons.is_empty() {
        return Ok(Outcome::Completed);
    }
    let text = reasons.join("\n");
    write_atomic(&out.join("reason.txt"), &format!("{text}\n"))?;
    Ok(Outcome::Terminated(text))
}

/// Evolves the preset to `T`: trajectory and curve CSVs, snapshots, final
/// report, plot. With `compare_modes` both solve modes run and their
/// dispersions are tabulated side by side.
pub fn cmd_run(config: &ExperimentConfig, out: &Path, quiet: bool) -> Result<Outcome, CliError> {
    let curve = config.curve(config.n_nodes)?;
    let modes = if config.compare_modes {
        vec![Mode::Square, Mode::ZeroPadded]
    } else {
        vec![config.mode]
    };
    let evos = modes
        .iter()
        .map(|&m| config.evolution(&curve, m, None))
        .collect::<Result<Vec<_>, _>>()?;
    ensure_dir(out)?;
    write_json(&out.join("resolved_config.json"), &config.resolved(&evos[0]))?;

    let mut reasons = Vec::new();
    let mut dispersions = Vec::new();
    for (&mode, evo) in modes.iter().zip(&evos) {
        let run = run_mode(config, evo, quiet)?;
        let suffix = if config.compare_modes {
            format!("_{}", mode_name(mode))
        } else {
            String::new()
        };
        let records = &run.trajectory.records;
        write_atomic(
            &out.join(format!("trajectory{suffix}.csv")),
            &csv(TRAJECTORY_CSV_HEADER, records.iter().map(trajectory_csv_row)),
        )?;
        write_atomic(
            &out.join(format!("curve{suffix}.csv")),
            &csv(CURVE_CSV_HEADER, run.curve_rows),
        )?;
        write_snapshots(&out.join(format!("snapshots{suffix}")), &run.trajectory)?;
        write_json(
            &out.join(format!("final_report{suffix}.json")),
            &final_report(&run.trajectory, evo),
        )?;
        if !records.is_empty() {
            let title = format!("{} ({})", config.preset, mode_name(mode));
            write_atomic(
                &out.join(format!("indicators{suffix}.svg")),
                &indicator_plot(records, &title)?,
            )?;
        }
        if let Some(r) = &run.trajectory.termination {
            reasons.push(format!("{}: {r}", mode_name(mode)));
        }
        dispersions.push(run.dispersion);
    }

    if config.compare_modes {
        let (sq, zp) = (&dispersions[0], &dispersions[1]);
        let rows = (0..sq.len().max(zp.len())).map(|i| {
            let t = sq.get(i).or(zp.get(i)).map_or(f64::NAN, |p| p.0);
            let a = sq.get(i).map_or(f64::NAN, |p| p.1);
            let b = zp.get(i).map_or(f64::NAN, |p| p.1);
            format!("{},{},{}", fmt_real(t), fmt_real(a), fmt_real(b))
        });
        write_atomic(&out.join("dispersion.csv"), &csv(DISPERSION_CSV_HEADER, rows))?;
        let plot = svg::render(
            &[
                Series::new("square", sq.clone()),
                Series::new("zero_padded", zp.clone()),
            ],
            &Axes::new(
                &format!("{} interior dispersion", config.preset),
                "t",
                "dispersion",
                Scale::Linear,
                Scale::Linear,
            ),
        )
        .map_err(|e| CliError::Io(e.to_string()))?;
        write_atomic(&out.join("dispersion.svg"), &plot)?;
    }
    write_reason(out, &reasons)
}

/// Burn-in steps followed by one evaluation, for one sweep cell.
fn sweep_cell(config: &ExperimentConfig, n_nodes: usize, r_s: f64) -> Result<StepRecord, String> {
    let curve = config.curve(n_nodes).map_err(|e| e.to_string())?;
    let mut evo = config
        .evolution(&curve, config.mode, Some(r_s))
        .map_err(|e| e.to_string())?;
    evo.t_final = evo.dt * (config.burn_in_steps + 1) as f64;
    evo.snapshot_stride = 0;
    let mut state = EvolutionState::new(curve, Vec::new());
    evo.validate_for(&state).map_err(|e| e.to_string())?;
    for k in 0..config.burn_in_steps {
        state = evolution::step(&state, &evo, k).map_err(|e| e.to_string())?.state;
    }
    evaluate(&state, &evo, config.burn_in_steps).map_err(|e| e.to_string())
}

/// Every `(N, r_s)` cell of the sweep lists: one CSV row per cell, failed
/// cells as `nan` rows, and one log-scale plot per node count.
pub fn cmd_sweep(config: &ExperimentConfig, out: &Path, quiet: bool) -> Result<Outcome, CliError> {
    config.check_sweep()?;
    config.preset_kind()?;
    let base = config.curve(config.n_nodes)?;
    let evo = config.evolution(&base, config.mode, None)?;
    ensure_dir(out)?;
    write_json(&out.join("resolved_config.json"), &config.resolved(&evo))?;

    let cells: Vec<(usize, f64)> = config
        .n_sweep
        .iter()
        .flat_map(|&n| config.r_s_sweep.iter().map(move |&r| (n, r)))
        .collect();
    let results = exec::map_slice(&cells, |&(n, r)| sweep_cell(config, n, r));

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (&(n, r_s), res) in cells.iter().zip(&results) {
        match res {
            Ok(rec) => rows.push(report_csv_row(rec.t, r_s, rec.h, rec.n_nodes, &rec.report)),
            Err(e) => {
                let h = config.curve(n).map_or(f64::NAN, |c| fill_distance(&c));
                rows.push(format!(
                    "nan,{},{},{n},{},nan,nan,nan,nan",
                    fmt_real(r_s),
                    fmt_real(h),
                    mode_name(config.mode)
                ));
                failures.push(format!("N = {n}, r_s = {r_s}: {e}"));
            }
        }
    }
    write_atomic(&out.join("sweep.csv"), &csv(REPORT_CSV_HEADER, rows))?;
    if !failures.is_empty() {
        note(
            quiet,
            &format!("{} of {} sweep cells failed", failures.len(), cells.len()),
        );
        write_atomic(&out.join("sweep_failures.txt"), &format!("{}\n", failures.join("\n")))?;
    }

    let mut loo_by_n = Vec::new();
    for &n in &config.n_sweep {
        let cell = |f: fn(&StepRecord) -> f64| -> Vec<(f64, f64)> {
            cells
                .iter()
                .zip(&results)
                .filter(|((cn, _), _)| *cn == n)
                .map(|((_, r), res)| (*r, res.as_ref().map_or(f64::NAN, f)))
                .collect()
        };
        let series = [
            Series::new("E_LOO", cell(|r| r.report.e_loo_inf)),
            Series::new("E_pR", cell(|r| r.report.e_pr_inf)),
            Series::new("E_MP", cell(|r| r.report.e_mp_inf)),
        ];
        loo_by_n.push(Series::new(format!("N = {n}"), series[0].points.clone()));
        let axes = Axes::new(
            &format!("{} indicators, N = {n}", config.preset),
            "r_s",
            "indicator",
            Scale::Linear,
            Scale::Log,
        );
        let plot = svg::render(&series, &axes).map_err(|e| CliError::Io(e.to_string()))?;
        write_atomic(&out.join(format!("sweep_n{n}.svg")), &plot)?;
    }
    let axes = Axes::new(
        &format!("{} E_LOO by node count", config.preset),
        "r_s",
        "E_LOO",
        Scale::Linear,
        Scale::Log,
    );
    let plot = svg::render(&loo_by_n, &axes).map_err(|e| CliError::Io(e.to_string()))?;
    write_atomic(&out.join("sweep_loo.svg"), &plot)?;
    note(quiet, &format!("sweep: {} cells", cells.len()));
    Ok(Outcome::Completed)
}

fn quality_or_degenerate(mesh: &TriMesh) -> MeshQualityReport {
    quality(mesh).unwrap_or(MeshQualityReport {
        theta_min: 0.0,
        mesh_ratio: f64::NAN,
        below_threshold: true,
    })
}

/// Evolves the preset curve together with a mesh whose boundary vertices are
/// its nodes; writes the quality series and the initial and final meshes.
pub fn cmd_mesh(config: &ExperimentConfig, out: &Path, quiet: bool) -> Result<Outcome, CliError> {
    let path = config
        .mesh
        .as_ref()
        .ok_or_else(|| CliError::Config("the mesh command needs a `mesh` file".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let (mesh, warnings) = load_mesh(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    for w in &warnings {
        note(quiet, &format!("{}: {w}", path.display()));
    }
    let curve = config.curve(config.n_nodes)?;
    mesh.check_boundary(&curve, MESH_BOUNDARY_TOL)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;

    let mut config = config.clone();
    config.resample = false;
    let evo = config.evolution(&curve, config.mode, None)?;
    ensure_dir(out)?;
    write_json(&out.join("resolved_config.json"), &config.resolved(&evo))?;
    write_atomic(&out.join("mesh_initial.mesh"), &save_mesh(&mesh))?;

    let mut state = initial_state(&config, curve)?;
    let q0 = quality_or_degenerate(&mesh);
    let mut series = vec![(0usize, 0.0, q0, mesh.inverted_count())];
    state.mesh = Some(mesh);
    let trajectory = run_with(state, &evo, |o| {
        let m = o.state.mesh.as_ref().expect("mesh is carried through the run");
        series.push((
            o.record.step + 1,
            o.state.t,
            quality_or_degenerate(m),
            o.record.inverted,
        ));
    })
    .map_err(|e| CliError::Config(e.to_string()))?;

    let rows = series.iter().map(|(k, t, q, inv)| quality_csv_row(*k, *t, q, *inv));
    write_atomic(&out.join("quality.csv"), &csv(QUALITY_CSV_HEADER, rows))?;
    write_atomic(
        &out.join("trajectory.csv"),
        &csv(TRAJECTORY_CSV_HEADER, trajectory.records.iter().map(trajectory_csv_row)),
    )?;
    if let Some(m) = &trajectory.final_state.mesh {
        write_atomic(&out.join("mesh_final.mesh"), &save_mesh(m))?;
    }

    let theta: Vec<(f64, f64)> = series.iter().map(|s| (s.0 as f64, s.2.theta_min)).collect();
    let ratio: Vec<(f64, f64)> = series.iter().map(|s| (s.0 as f64, s.2.mesh_ratio)).collect();
    let axes = Axes::new(
        &format!("{} minimum angle", config.preset),
        "step",
        "theta_min (deg)",
        Scale::Linear,
        Scale::Linear,
    )
    .with_threshold(alemfs::mesh::ANGLE_THRESHOLD_DEG, "10 deg");
    let plot = svg::render(&[Series::new("ALE-MFS", theta)], &axes).map_err(|e| CliError::Io(e.to_string()))?;
    write_atomic(&out.join("theta_min.svg"), &plot)?;
    let axes = Axes::new(
        &format!("{} mesh ratio", config.preset),
        "step",
        "mesh ratio",
        Scale::Linear,
        Scale::Linear,
    );
    let plot = svg::render(&[Series::new("ALE-MFS", ratio)], &axes).map_err(|e| CliError::Io(e.to_string()))?;
    write_atomic(&out.join("mesh_ratio.svg"), &plot)?;

    let worst = series.iter().map(|s| s.2.theta_min).fold(f64::INFINITY, f64::min);
    let inverted = series.iter().filter(|s| s.3 > 0).count();
    note(
        quiet,
        &format!(
            "mesh: {} steps, min theta {worst:.3} deg, {inverted} steps with inverted elements",
            trajectory.records.len()
        ),
    );
    let reasons: Vec<String> = trajectory.termination.iter().cloned().collect();
    write_reason(out, &reasons)
}
