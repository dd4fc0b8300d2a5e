// SPDX-License-Identifier: Apache-2.0

//! Explicit Euler time stepping of the coupled boundary/interior motion:
//! boundary nodes follow `V_Γ = −κn`, interior points and mesh vertices the
//! MFS harmonic extension of that velocity.

use std::fmt::Write as _;

use thiserror::Error;

use crate::exec;
use crate::geometry::{
    fill_distance, geometry_from_splines, local_splines, resample, self_intersects, BoundaryCurve, GeometryError,
    NodeGeometry, ReconstructionParams,
};
use crate::indicators::{self, fmt_real, IndicatorError, IndicatorReport, Reference};
use crate::mesh::{transport_mesh, MeshError, TriMesh};
use crate::mfs::{self, assemble, build_source_layer, CollocationProblem, Factorization, MfsError, SolveMode};
use crate::numerics::NumericsError;
use crate::point::Vec2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolutionError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no grid point of spacing {0} lies inside the curve")]
    EmptyInterior(f64),
    #[error("boundary self-intersects after the step from t = {t}")]
    SelfIntersection { t: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Mfs(#[from] MfsError),
    #[error(transparent)]
    Indicator(#[from] IndicatorError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// What `E_MP∞` compares the field against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MpReference {
    /// The spline boundary velocity at the test points.
    BoundaryData,
    /// The exact harmonic extension `−κ̄ (x − c)/R̄` of circle data, with `c`
    /// the centroid, `R̄` the mean node radius and `κ̄` the mean curvature.
    Circle,
}

/// Reaction to a singular square collocation matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularPolicy {
    Abort,
    /// Solve that step with the zero-padded system instead.
    ZeroPadded,
    /// Solve anyway by LU, rejecting only exactly zero pivots.
    Unguarded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_final: f64,
    pub mode: SolveMode,
    /// Source circle radius.
    pub r_s: f64,
    /// Source circle centre, fixed for the whole run.
    pub source_center: Vec2,
    pub reconstruction: ReconstructionParams,
    pub d_min: f64,
    pub d_max: f64,
    pub resample: bool,
    /// `dt_eff ≤ c_cfl · h_min / max|κ|`.
    pub c_cfl: f64,
    /// `dt_eff ≤ c_parabolic · h_min²`; zero disables the cap.
    pub c_parabolic: f64,
    /// Boundary test points per node for `E_MP∞`.
    pub samples_per_node: usize,
    pub mp_reference: MpReference,
    pub on_singular: SingularPolicy,
    /// Keep every k-th state as a snapshot; zero keeps only the first and last.
    pub snapshot_stride: usize,
}

pub const DEFAULT_C_CFL: f64 = 0.2;
pub const DEFAULT_C_PARABOLIC: f64 = 0.1;
pub const DEFAULT_SAMPLES_PER_NODE: usize = 4;
pub const DEFAULT_D_MIN_FACTOR: f64 = 0.4;
pub const DEFAULT_D_MAX_FACTOR: f64 = 1.8;

impl EvolutionConfig {
    /// Defaults for an initial curve: sources at 2.5× the maximum radius about
    /// the centroid, resampling thresholds from the initial fill distance.
    pub fn for_curve(curve: &BoundaryCurve, dt: f64, t_final: f64, mode: SolveMode) -> Self {
        let c = curve.centroid();
        let h0 = fill_distance(curve);
        Self {
            dt,
            t_final,
            mode,
            r_s: mfs::DEFAULT_RADIUS_FACTOR * curve.max_radius_about(c),
            source_center: c,
            reconstruction: ReconstructionParams::default(),
            d_min: DEFAULT_D_MIN_FACTOR * h0,
            d_max: DEFAULT_D_MAX_FACTOR * h0,
            resample: true,
            c_cfl: DEFAULT_C_CFL,
            c_parabolic: DEFAULT_C_PARABOLIC,
            samples_per_node: DEFAULT_SAMPLES_PER_NODE,
            mp_reference: MpReference::BoundaryData,
            on_singular: SingularPolicy::Abort,
            snapshot_stride: 0,
        }
    }

    pub fn validate(&self) -> Result<(), EvolutionError> {
        let bad = |m: &str| Err(EvolutionError::InvalidConfig(m.into()));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return bad("T must be non-negative");
        }
        if !(self.r_s > 0.0) {
            return bad("r_s must be positive");
        }
        if !(self.c_cfl > 0.0) || !(self.c_parabolic >= 0.0) {
            return bad("step safety factors must be positive");
        }
        if self.resample && !(0.0 < self.d_min && self.d_min < self.d_max) {
            return bad("resampling needs 0 < d_min < d_max");
        }
        if self.samples_per_node == 0 {
            return bad("samples_per_node must be at least 1");
        }
        self.reconstruction.validate()?;
        Ok(())
    }

    /// Checks the configuration against an initial state.
    pub fn validate_for(&self, state: &EvolutionState) -> Result<(), EvolutionError> {
        self.validate()?;
        let reach = state.curve.max_radius_about(self.source_center);
        if self.r_s <= reach {
            return Err(EvolutionError::InvalidConfig(format!(
                "r_s = {} does not exceed the boundary radius {reach}",
                self.r_s
            )));
        }
        if state.mesh.is_some() && self.resample {
            return Err(EvolutionError::InvalidConfig(
                "mesh transport needs a fixed node set; disable resampling".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionState {
    pub t: f64,
    pub curve: BoundaryCurve,
    pub interior: Vec<Vec2>,
    pub mesh: Option<TriMesh>,
}

impl EvolutionState {
    pub fn new(curve: BoundaryCurve, interior: Vec<Vec2>) -> Self {
        Self {
            t: 0.0,
            curve,
            interior,
            mesh: None,
        }
    }

    /// Interior points that are not strictly inside the curve.
    pub fn escaped_count(&self) -> usize {
        self.interior.iter().filter(|&&p| !self.curve.contains(p)).count()
    }
}

/// Grid of pitch `spacing` anchored at the centroid, restricted to points
/// inside the curve and at least `spacing / 2` away from it.
pub fn seed_interior(curve: &BoundaryCurve, spacing: f64) -> Result<Vec<Vec2>, EvolutionError> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(EvolutionError::InvalidConfig("spacing must be positive".into()));
    }
    let c = curve.centroid();
    let (mut lo, mut hi) = (c, c);
    for p in curve.nodes() {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let (i0, i1) = (
        ((lo.x - c.x) / spacing).floor() as i64,
        ((hi.x - c.x) / spacing).ceil() as i64,
    );
    let (j0, j1) = (
        ((lo.y - c.y) / spacing).floor() as i64,
        ((hi.y - c.y) / spacing).ceil() as i64,
    );
    let mut candidates = Vec::new();
    for j in j0..=j1 {
        for i in i0..=i1 {
            candidates.push(c + Vec2::new(i as f64 * spacing, j as f64 * spacing));
        }
    }
    let keep = exec::map_slice(&candidates, |&p| {
        curve.contains(p) && curve.distance_to(p) >= 0.5 * spacing
    });
    let points: Vec<Vec2> = candidates
        .into_iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|(p, _)| p)
        .collect();
    if points.is_empty() {
        return Err(EvolutionError::EmptyInterior(spacing));
    }
    Ok(points)
}

/// Minimum pairwise distance over mean nearest-neighbour distance.
pub fn interior_dispersion(points: &[Vec2]) -> f64 {
    if points.len() < 2 {
        return f64::NAN;
    }
    let nearest = exec::map_range(points.len(), |i| {
        points
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, q)| points[i].distance(*q))
            .fold(f64::INFINITY, f64::min)
    });
    let min = nearest.iter().copied().fold(f64::INFINITY, f64::min);
    let mean = nearest.iter().sum::<f64>() / nearest.len() as f64;
    if mean == 0.0 {
        0.0
    } else {
        min / mean
    }
}

/// Diagnostics of one accepted step, taken on the state it started from.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub h: f64,
    pub n_nodes: usize,
    pub kappa_min: f64,
    pub kappa_max: f64,
    /// Solver actually used, which differs from the configured one after a
    /// singular fallback.
    pub mode: SolveMode,
    pub report: IndicatorReport,
    pub dispersion: f64,
    pub escaped: usize,
    pub inverted: usize,
}

/// Result of one step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: EvolutionState,
    pub record: StepRecord,
}

fn circle_reference(curve: &BoundaryCurve, geometry: &[NodeGeometry]) -> impl Fn(Vec2) -> Vec2 + Sync {
    let c = curve.centroid();
    let r = curve.mean_radius_about(c);
    let kappa = geometry.iter().map(|g| g.curvature).sum::<f64>() / geometry.len() as f64;
    move |x: Vec2| (x - c) * (-kappa / r)
}

fn solve_with_policy(
    curve: &BoundaryCurve,
    geometry: &[NodeGeometry],
    config: &EvolutionConfig,
) -> Result<(CollocationProblem, mfs::MfsField, Factorization), EvolutionError> {
    let layer = build_source_layer(config.source_center, config.r_s, curve.len())?;
    let problem = assemble(curve, &layer, geometry, config.mode)?;
    match mfs::solve_factored(&problem) {
        Ok((field, f)) => Ok((problem, field, f)),
        Err(MfsError::Numerics(NumericsError::SingularMatrix { .. }))
            if config.mode == SolveMode::Square && config.on_singular == SingularPolicy::ZeroPadded =>
        {
            let problem = assemble(curve, &layer, geometry, SolveMode::ZeroPadded)?;
            let (field, f) = mfs::solve_factored(&problem)?;
            Ok((problem, field, f))
        }
        Err(MfsError::Numerics(NumericsError::SingularMatrix { .. }))
            if config.mode == SolveMode::Square && config.on_singular == SingularPolicy::Unguarded =>
        {
            let (field, f) = mfs::solve_square_unguarded(&problem)?;
            Ok((problem, field, f))
        }
        Err(e) => Err(e.into()),
    }
}

struct Diagnosis {
    geometry: Vec<NodeGeometry>,
    field: mfs::MfsField,
    record: StepRecord,
}

fn diagnose(state: &EvolutionState, config: &EvolutionConfig, index: usize) -> Result<Diagnosis, EvolutionError> {
    let curve = &state.curve;
    let splines = local_splines(curve, &config.reconstruction)?;
    let geometry = geometry_from_splines(curve, &splines)?;
    let (problem, field, factors) = solve_with_policy(curve, &geometry, config)?;

    let samples = indicators::sample_from_splines(curve, &splines, config.samples_per_node * curve.len());
    let circle = circle_reference(curve, &geometry);
    let reference = match config.mp_reference {
        MpReference::BoundaryData => Reference::BoundaryData,
        MpReference::Circle => Reference::Analytic(&circle),
    };
    let svd = match &factors {
        Factorization::Svd(s) => Some(s),
        Factorization::Lu(_) => None,
    };
    let mut report = indicators::report_from_samples(&problem, &field, svd, samples.as_deref().ok(), reference)?;
    if let Err(e) = &samples {
        report.flags.push(format!("max principle: {e}"));
    }

    let kappa_min = geometry.iter().map(|g| g.curvature).fold(f64::INFINITY, f64::min);
    let kappa_max = geometry.iter().map(|g| g.curvature).fold(f64::NEG_INFINITY, f64::max);
    let kappa_abs = kappa_min.abs().max(kappa_max.abs());
    let h_min = curve.min_edge_length();
    let mut dt = config.dt.min(config.t_final - state.t).max(0.0);
    if kappa_abs > 0.0 {
        dt = dt.min(config.c_cfl * h_min / kappa_abs);
    }
    if config.c_parabolic > 0.0 {
        dt = dt.min(config.c_parabolic * h_min * h_min);
    }
    let record = StepRecord {
        step: index,
        t: state.t,
        dt,
        h: fill_distance(curve),
        n_nodes: curve.len(),
        kappa_min,
        kappa_max,
        mode: problem.mode(),
        report,
        dispersion: interior_dispersion(&state.interior),
        escaped: state.escaped_count(),
        inverted: state.mesh.as_ref().map_or(0, TriMesh::inverted_count),
    };
    Ok(Diagnosis {
        geometry,
        field,
        record,
    })
}

/// Geometry, solve and indicators at `state` without moving it. `dt` is the
/// step that [`step`] would take.
pub fn evaluate(state: &EvolutionState, config: &EvolutionConfig, index: usize) -> Result<StepRecord, EvolutionError> {
    Ok(diagnose(state, config, index)?.record)
}

/// Advances the state by one explicit Euler step of at most `config.dt`.
pub fn step(state: &EvolutionState, config: &EvolutionConfig, index: usize) -> Result<StepOutcome, EvolutionError> {
    let Diagnosis {
        geometry,
        field,
        mut record,
    } = diagnose(state, config, index)?;
    let curve = &state.curve;
    let dt = record.dt;

    let moved: Vec<Vec2> = curve
        .nodes()
        .iter()
        .zip(&geometry)
        .map(|(x, g)| *x + g.velocity * dt)
        .collect();
    let new_curve = BoundaryCurve::new(moved, curve.is_counterclockwise())
        .map_err(|_| EvolutionError::SelfIntersection { t: state.t })?;
    if self_intersects(&new_curve) {
        return Err(EvolutionError::SelfIntersection { t: state.t });
    }
    let u = mfs::evaluate_field(&field, &state.interior)?;
    let interior: Vec<Vec2> = state.interior.iter().zip(&u).map(|(x, v)| *x + *v * dt).collect();
    let (mesh, inverted) = match &state.mesh {
        Some(m) => {
            let moved = transport_mesh(m, &field, &geometry, dt)?;
            (Some(moved.mesh), moved.inverted_count)
        }
        None => (None, 0),
    };
    let new_curve = if config.resample {
        resample(&new_curve, config.d_min, config.d_max, &config.reconstruction)?
    } else {
        new_curve
    };
    let mut t = state.t + dt;
    if config.t_final - t <= 1e-12 * config.t_final.max(1.0) {
        t = config.t_final;
    }
    let next = EvolutionState {
        t,
        curve: new_curve,
        interior,
        mesh,
    };
    record.escaped = next.escaped_count();
    record.inverted = inverted;
    Ok(StepOutcome { state: next, record })
}

/// A stored state.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub state: EvolutionState,
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<StepRecord>,
    pub snapshots: Vec<Snapshot>,
    pub final_state: EvolutionState,
    /// Set when the run stopped before `T`.
    pub termination: Option<String>,
}

impl Trajectory {
    pub fn completed(&self) -> bool {
        self.termination.is_none()
    }
}

/// Steps until `t ≥ T` or an error, which ends the run with the last good state.
pub fn run(initial: EvolutionState, config: &EvolutionConfig) -> Result<Trajectory, EvolutionError> {
    run_with(initial, config, |_| {})
}

/// As [`run`], calling `observe` after every accepted step.
pub fn run_with(
    initial: EvolutionState,
    config: &EvolutionConfig,
    mut observe: impl FnMut(&StepOutcome),
) -> Result<Trajectory, EvolutionError> {
    config.validate_for(&initial)?;
    let mut snapshots = vec![Snapshot {
        step: 0,
        state: initial.clone(),
    }];
    let mut records = Vec::new();
    let mut state = initial;
    let mut termination = None;
    let mut index = 0;
    while state.t < config.t_final {
        match step(&state, config, index) {
            Ok(outcome) => {
                observe(&outcome);
                index += 1;
                records.push(outcome.record);
                state = outcome.state;
                if config.snapshot_stride > 0 && index % config.snapshot_stride == 0 && state.t < config.t_final {
                    snapshots.push(Snapshot {
                        step: index,
                        state: state.clone(),
                    });
                }
            }
            Err(e) => {
                termination = Some(format!("step {index} at t = {}: {e}", state.t));
                break;
            }
        }
    }
    if index > 0 {
        snapshots.push(Snapshot {
            step: index,
            state: state.clone(),
        });
    }
    Ok(Trajectory {
        records,
        snapshots,
        final_state: state,
        termination,
    })
}

/// Header of the trajectory CSV.
pub const TRAJECTORY_CSV_HEADER: &str = "t,h,kappa_min,kappa_max,E_loo_inf,E_pR_inf,E_mp_inf,cond,dispersion";

pub fn trajectory_csv_row(r: &StepRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}",
        fmt_real(r.t),
        fmt_real(r.h),
        fmt_real(r.kappa_min),
        fmt_real(r.kappa_max),
        fmt_real(r.report.e_loo_inf),
        fmt_real(r.report.e_pr_inf),
        fmt_real(r.report.e_mp_inf),
        fmt_real(r.report.cond),
        fmt_real(r.dispersion)
    )
}

/// Text snapshot: the curve block followed by the interior block.
pub fn snapshot_text(state: &EvolutionState) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "CURVE {}", state.curve.len());
    for p in state.curve.nodes() {
        let _ = writeln!(out, "{:?} {:?}", p.x, p.y);
    }
    let _ = writeln!(out, "INTERIOR {}", state.interior.len());
    for p in &state.interior {
        let _ = writeln!(out, "{:?} {:?}", p.x, p.y);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{preset, Preset};

    fn circle_state(n: usize, spacing: f64) -> EvolutionState {
        let curve = preset(Preset::Circle, n, 1.0).unwrap();
        let interior = seed_interior(&curve, spacing).unwrap();
        EvolutionState::new(curve, interior)
    }

    #[test]
    fn seeding() {
        let curve = preset(Preset::Circle, 64, 1.0).unwrap();
        let pts = seed_interior(&curve, 0.5).unwrap();
        assert!(pts.iter().all(|p| p.norm() < 0.75));
        assert!(matches!(
            seed_interior(&curve, 5.0),
            Err(EvolutionError::EmptyInterior(_))
        ));
        let s = 0.05;
        let n = seed_interior(&curve, s).unwrap().len() as f64;
        let expect = std::f64::consts::PI * (1.0 - 0.5 * s).powi(2) / (s * s);
        assert!((n / expect - 1.0).abs() < 0.2, "{n} vs {expect}");
    }

    #[test]
    fn dispersion_examples() {
        let grid: Vec<Vec2> = (0..5)
            .flat_map(|j| (0..5).map(move |i| Vec2::new(i as f64, j as f64)))
            .collect();
        assert_eq!(interior_dispersion(&grid), 1.0);
        let mut dup = grid.clone();
        dup.push(grid[7]);
        assert_eq!(interior_dispersion(&dup), 0.0);
        let pseudo: Vec<Vec2> = (0..50)
            .map(|k| {
                let a = (k as f64 * 0.618_033_988_75).fract();
                let b = (k as f64 * 0.754_877_666_2).fract();
                Vec2::new(a, b)
            })
            .collect();
        let d = interior_dispersion(&pseudo);
        assert!(d > 0.0 && d < 1.0);
    }

    #[test]
    fn one_circle_step() {
        let state = circle_state(64, 0.25);
        let mut config = EvolutionConfig::for_curve(&state.curve, 0.01, 1.0, SolveMode::Square);
        config.c_parabolic = 0.0;
        config.c_cfl = 1.0;
        let mut state = state;
        state.interior = vec![Vec2::new(0.5, 0.0)];
        let out = step(&state, &config, 0).unwrap();
        assert_eq!(out.record.dt, 0.01);
        for p in out.state.curve.nodes() {
            assert!((p.norm() - 0.99).abs() < 1e-3);
        }
        assert!((out.state.interior[0] - Vec2::new(0.495, 0.0)).norm() < 1e-4);
        assert!((out.state.t - 0.01).abs() < 1e-15);
    }

    #[test]
    fn caps_limit_the_step() {
        let state = circle_state(64, 0.25);
        let config = EvolutionConfig::for_curve(&state.curve, 0.01, 1.0, SolveMode::Square);
        let out = step(&state, &config, 0).unwrap();
        let h = state.curve.min_edge_length();
        assert!((out.record.dt - DEFAULT_C_PARABOLIC * h * h).abs() < 1e-15);
        let mut c = config.clone();
        c.t_final = 1e-5;
        assert_eq!(step(&state, &c, 0).unwrap().state.t, 1e-5);
    }

    #[test]
    fn zero_final_time_gives_one_snapshot() {
        let state = circle_state(32, 0.3);
        let config = EvolutionConfig::for_curve(&state.curve, 0.01, 0.0, SolveMode::Square);
        let tr = run(state.clone(), &config).unwrap();
        assert!(tr.records.is_empty() && tr.completed());
        assert_eq!(tr.snapshots.len(), 1);
        assert_eq!(tr.final_state, state);
    }

    #[test]
    fn short_circle_run() {
        let state = circle_state(32, 0.3);
        let mut config = EvolutionConfig::for_curve(&state.curve, 0.005, 0.05, SolveMode::Square);
        config.snapshot_stride = 3;
        let tr = run(state, &config).unwrap();
        assert!(tr.completed(), "{:?}", tr.termination);
        assert_eq!(tr.final_state.t, 0.05);
        let r = (1.0f64 - 0.1).sqrt();
        let c = tr.final_state.curve.centroid();
        for p in tr.final_state.curve.nodes() {
            assert!((p.distance(c) - r).abs() < 5e-3);
        }
        let mut last = f64::INFINITY;
        for s in &tr.snapshots {
            let area = s.state.curve.area();
            assert!(area < last);
            last = area;
        }
        assert!(tr.snapshots.len() >= 3);
        assert_eq!(tr.snapshots.last().unwrap().state, tr.final_state);
    }

    #[test]
    fn singular_policy() {
        let state = circle_state(128, 0.3);
        let mut config = EvolutionConfig::for_curve(&state.curve, 1e-4, 1e-4, SolveMode::Square);
        assert!(matches!(step(&state, &config, 0), Err(EvolutionError::Mfs(_))));
        config.on_singular = SingularPolicy::ZeroPadded;
        let out = step(&state, &config, 0).unwrap();
        assert_eq!(out.record.mode, SolveMode::ZeroPadded);
        config.on_singular = SingularPolicy::Unguarded;
        let out = step(&state, &config, 0).unwrap();
        assert_eq!(out.record.mode, SolveMode::Square);
        assert!(out.state.curve.nodes().iter().all(|p| p.is_finite()));
        let tr = run(
            state,
            &EvolutionConfig::for_curve(&circle_state(128, 0.3).curve, 1e-4, 1e-4, SolveMode::Square),
        )
        .unwrap();
        assert!(tr.termination.is_some());
        assert_eq!(tr.final_state.t, 0.0);
    }

    #[test]
    fn invalid_configs() {
        let state = circle_state(32, 0.3);
        let mut c = EvolutionConfig::for_curve(&state.curve, 0.01, 0.1, SolveMode::Square);
        c.r_s = 0.9;
        assert!(matches!(run(state.clone(), &c), Err(EvolutionError::InvalidConfig(_))));
        let mut c = EvolutionConfig::for_curve(&state.curve, 0.0, 0.1, SolveMode::Square);
        assert!(c.validate().is_err());
        c.dt = 0.01;
        c.d_min = c.d_max;
        assert!(c.validate().is_err());
    }

    #[test]
    fn snapshot_format() {
        let state = circle_state(32, 0.5);
        let text = snapshot_text(&state);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("CURVE 32"));
        assert_eq!(
            text.lines().nth(33),
            Some(format!("INTERIOR {}", state.interior.len()).as_str())
        );
        let first: Vec<f64> = text
            .lines()
            .nth(1)
            .unwrap()
            .split(' ')
            .map(|v| v.parse().unwrap())
            .collect();
        assert_eq!(Vec2::new(first[0], first[1]), state.curve.node(0));
    }
}
