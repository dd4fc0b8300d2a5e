// SPDX-License-Identifier: Apache-2.0

//! Method of fundamental solutions for the vector harmonic extension of
//! boundary velocities. Sources sit on a fixed circle outside the domain;
//! the collocation system is either solved exactly (square) or, after
//! appending one zero row, in the minimum-norm least-squares sense.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::exec;
use crate::geometry::{fill_distance, BoundaryCurve, NodeGeometry};
use crate::numerics::{self, DenseMatrix, LuFactors, NumericsError, SvdFactors};
use crate::point::Vec2;

/// Evaluation points closer than this to a source are rejected.
pub const COINCIDENCE_TOL: f64 = 1e-14;

/// Sources must keep at least `SOURCE_MARGIN_FACTOR · h` from the boundary.
pub const SOURCE_MARGIN_FACTOR: f64 = 1.0;

/// Default layer radius as a multiple of the maximum initial boundary radius.
pub const DEFAULT_RADIUS_FACTOR: f64 = 2.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MfsError {
    #[error("source layer needs radius > 0 and at least 4 sources (radius {radius}, count {count})")]
    InvalidLayer { radius: f64, count: usize },
    #[error("points coincide: |x - y| = {distance:e}")]
    CoincidentPoints { distance: f64 },
    #[error("source {index} at distance {distance:e} from the boundary (margin {margin:e}) or inside it")]
    SourceInsideDomain { index: usize, distance: f64, margin: f64 },
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// How the collocation system is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveMode {
    Square,
    ZeroPadded,
}

impl SolveMode {
    pub fn name(self) -> &'static str {
        match self {
            SolveMode::Square => "square",
            SolveMode::ZeroPadded => "zero_padded",
        }
    }
}

impl fmt::Display for SolveMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolveMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "square" | "Square" => Ok(SolveMode::Square),
            "zero_padded" | "ZeroPadded" | "zero-padded" => Ok(SolveMode::ZeroPadded),
            other => Err(format!("unknown solve mode '{other}'")),
        }
    }
}

/// Uniformly spaced sources on a circle.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceLayer {
    center: Vec2,
    radius: f64,
    points: Vec<Vec2>,
}

impl SourceLayer {
    pub fn center(&self) -> Vec2 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Layer from explicit points; centre and radius are their mean and mean distance.
    pub fn from_points(points: Vec<Vec2>) -> Self {
        let n = points.len().max(1) as f64;
        let center = points.iter().fold(Vec2::ZERO, |acc, &p| acc + p) * (1.0 / n);
        let radius = points.iter().map(|p| p.distance(center)).sum::<f64>() / n;
        Self { center, radius, points }
    }

    /// The same layer shifted by `offset`.
    pub fn translated(&self, offset: Vec2) -> SourceLayer {
        SourceLayer {
            center: self.center + offset,
            radius: self.radius,
            points: self.points.iter().map(|p| *p + offset).collect(),
        }
    }
}

/// `y_j = c + R_s (cos θ_j, sin θ_j)`, `θ_j = 2π j / N_s` for `j = 0..N_s`.
pub fn build_source_layer(center: Vec2, radius: f64, count: usize) -> Result<SourceLayer, MfsError> {
    if !(radius > 0.0) || count < 4 {
        return Err(MfsError::InvalidLayer { radius, count });
    }
    let points = (0..count)
        .map(|j| center + Vec2::from_polar(radius, 2.0 * PI * j as f64 / count as f64))
        .collect();
    Ok(SourceLayer { center, radius, points })
}

/// `Φ(x, y) = −log|x − y| / 2π`.
pub fn fundamental_solution(x: Vec2, y: Vec2) -> Result<f64, MfsError> {
    let distance = x.distance(y);
    if distance < COINCIDENCE_TOL {
        return Err(MfsError::CoincidentPoints { distance });
    }
    Ok(kernel(distance))
}

#[inline]
fn kernel(distance: f64) -> f64 {
    -distance.ln() / (2.0 * PI)
}

/// Assembled collocation system for both velocity components.
#[derive(Debug, Clone)]
pub struct CollocationProblem {
    matrix: DenseMatrix,
    rhs: [Vec<f64>; 2],
    collocation: Vec<Vec2>,
    sources: SourceLayer,
    mode: SolveMode,
}

impl CollocationProblem {
    /// Builds a problem from an explicit matrix. In `ZeroPadded` mode one zero
    /// row (and zero data) is appended.
    pub fn from_parts(
        matrix: DenseMatrix,
        rhs: [Vec<f64>; 2],
        collocation: Vec<Vec2>,
        sources: SourceLayer,
        mode: SolveMode,
    ) -> Result<Self, MfsError> {
        let n_c = matrix.rows();
        if rhs[0].len() != n_c || rhs[1].len() != n_c {
            return Err(MfsError::SizeMismatch(format!(
                "rhs lengths {}/{} for {n_c} rows",
                rhs[0].len(),
                rhs[1].len()
            )));
        }
        if matrix.cols() != sources.len() {
            return Err(MfsError::SizeMismatch(format!(
                "{} columns for {} sources",
                matrix.cols(),
                sources.len()
            )));
        }
        if collocation.len() != n_c {
            return Err(MfsError::SizeMismatch(format!(
                "{} collocation points for {n_c} rows",
                collocation.len()
            )));
        }
        let (matrix, rhs) = match mode {
            SolveMode::Square => (matrix, rhs),
            SolveMode::ZeroPadded => {
                let [mut g1, mut g2] = rhs;
                g1.push(0.0);
                g2.push(0.0);
                (matrix.with_zero_row(), [g1, g2])
            }
        };
        Ok(Self {
            matrix,
            rhs,
            collocation,
            sources,
            mode,
        })
    }

    /// The system matrix including any padded row.
    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    /// Right-hand side of component `k ∈ {0, 1}`, including any padded entry.
    pub fn rhs(&self, k: usize) -> &[f64] {
        &self.rhs[k]
    }

    pub fn collocation_points(&self) -> &[Vec2] {
        &self.collocation
    }

    pub fn sources(&self) -> &SourceLayer {
        &self.sources
    }

    pub fn mode(&self) -> SolveMode {
        self.mode
    }

    /// Number of true collocation rows `N_c`.
    pub fn n_collocation(&self) -> usize {
        self.collocation.len()
    }

    /// Effective row count (`N_c` or `N_c + 1`).
    pub fn n_rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn n_sources(&self) -> usize {
        self.matrix.cols()
    }
}

/// Assembles `A_ij = Φ(x_i, y_j)` and `g^(k)_i = V_Γ^(k)(x_i)`.
pub fn assemble(
    curve: &BoundaryCurve,
    sources: &SourceLayer,
    rhs: &[NodeGeometry],
    mode: SolveMode,
) -> Result<CollocationProblem, MfsError> {
    let n_c = curve.len();
    if rhs.len() != n_c {
        return Err(MfsError::SizeMismatch(format!(
            "{} velocities for {n_c} nodes",
            rhs.len()
        )));
    }
    if sources.len() != n_c {
        return Err(MfsError::SizeMismatch(format!(
            "{} sources for {n_c} collocation points",
            sources.len()
        )));
    }
    check_sources_outside(curve, sources)?;
    let nodes = curve.nodes();
    let ys = sources.points();
    let matrix = DenseMatrix::from_fn(n_c, ys.len(), |i, j| kernel(nodes[i].distance(ys[j])));
    let g1 = rhs.iter().map(|g| g.velocity.x).collect();
    let g2 = rhs.iter().map(|g| g.velocity.y).collect();
    CollocationProblem::from_parts(matrix, [g1, g2], nodes.to_vec(), sources.clone(), mode)
}

fn check_sources_outside(curve: &BoundaryCurve, sources: &SourceLayer) -> Result<(), MfsError> {
    let margin = SOURCE_MARGIN_FACTOR * fill_distance(curve);
    let offending = exec::map_slice(sources.points(), |&y| {
        let distance = curve.distance_to(y);
        (curve.contains(y) || distance < margin, distance)
    });
    match offending.into_iter().enumerate().find(|(_, (bad, _))| *bad) {
        Some((index, (_, distance))) => Err(MfsError::SourceInsideDomain {
            index,
            distance,
            margin,
        }),
        None => Ok(()),
    }
}

/// Source layer plus one coefficient vector per velocity component.
#[derive(Debug, Clone, PartialEq)]
pub struct MfsField {
    sources: SourceLayer,
    coefficients: [Vec<f64>; 2],
    mode: SolveMode,
}

impl MfsField {
    pub fn new(sources: SourceLayer, coefficients: [Vec<f64>; 2], mode: SolveMode) -> Result<Self, MfsError> {
        let n = sources.len();
        if coefficients.iter().any(|c| c.len() != n) {
            return Err(MfsError::SizeMismatch(format!(
                "coefficient vectors must have length {n}"
            )));
        }
        if coefficients.iter().flatten().any(|a| !a.is_finite()) {
            return Err(MfsError::Numerics(NumericsError::NonFinite));
        }
        Ok(Self {
            sources,
            coefficients,
            mode,
        })
    }

    /// Field with all coefficients zero.
    pub fn zero(sources: SourceLayer, mode: SolveMode) -> Self {
        let n = sources.len();
        Self {
            sources,
            coefficients: [vec![0.0; n], vec![0.0; n]],
            mode,
        }
    }

    pub fn sources(&self) -> &SourceLayer {
        &self.sources
    }

    pub fn coefficients(&self, k: usize) -> &[f64] {
        &self.coefficients[k]
    }

    pub fn mode(&self) -> SolveMode {
        self.mode
    }

    /// `‖α^(1)‖₁ + ‖α^(2)‖₁`.
    pub fn coefficient_l1(&self) -> f64 {
        self.coefficients.iter().flatten().map(|a| a.abs()).sum()
    }

    /// Field value at one point.
    pub fn value_at(&self, x: Vec2) -> Result<Vec2, MfsError> {
        let mut u = Vec2::ZERO;
        for (j, &y) in self.sources.points().iter().enumerate() {
            let phi = fundamental_solution(x, y)?;
            u.x += self.coefficients[0][j] * phi;
            u.y += self.coefficients[1][j] * phi;
        }
        Ok(u)
    }
}

/// Solves the collocation problem: LU for `Square`, SVD least squares for `ZeroPadded`.
pub fn solve(problem: &CollocationProblem) -> Result<MfsField, MfsError> {
    Ok(solve_factored(problem)?.0)
}

/// The factorization used by [`solve_factored`], kept for indicator reuse.
#[derive(Debug, Clone)]
pub enum Factorization {
    Lu(LuFactors),
    Svd(SvdFactors),
}

/// As [`solve`], also returning the factorization.
pub fn solve_factored(problem: &CollocationProblem) -> Result<(MfsField, Factorization), MfsError> {
    let (coefficients, factors) = match problem.mode {
        SolveMode::Square => {
            let lu = LuFactors::new(&problem.matrix, numerics::PIVOT_RTOL)?;
            let c = [lu.solve(&problem.rhs[0])?, lu.solve(&problem.rhs[1])?];
            (c, Factorization::Lu(lu))
        }
        SolveMode::ZeroPadded => {
            let svd = numerics::svd(&problem.matrix)?;
            let c = [
                svd.solve_least_squares(&problem.rhs[0])?,
                svd.solve_least_squares(&problem.rhs[1])?,
            ];
            (c, Factorization::Svd(svd))
        }
    };
    let field = MfsField::new(problem.sources.clone(), coefficients, problem.mode)?;
    Ok((field, factors))
}

/// Square LU solve without the relative pivot threshold; only exactly zero
/// pivots are rejected. Near-singular systems yield large coefficients.
pub fn solve_square_unguarded(problem: &CollocationProblem) -> Result<(MfsField, Factorization), MfsError> {
    if problem.mode != SolveMode::Square {
        return Err(MfsError::SizeMismatch(format!(
            "unguarded solve needs a square system, got mode {}",
            problem.mode
        )));
    }
    let lu = LuFactors::new(&problem.matrix, 0.0)?;
    let c = [lu.solve(&problem.rhs[0])?, lu.solve(&problem.rhs[1])?];
    let field = MfsField::new(problem.sources.clone(), c, problem.mode)?;
    Ok((field, Factorization::Lu(lu)))
}

/// `u^(k)(x) = Σ_j α_j^(k) Φ(x, y_j)` at every point.
pub fn evaluate_field(field: &MfsField, points: &[Vec2]) -> Result<Vec<Vec2>, MfsError> {
    exec::map_slice(points, |&x| field.value_at(x)).into_iter().collect()
}

/// Builds the layer (centre defaults to the curve centroid, `N_s = N_c`),
/// assembles and solves.
pub fn harmonic_extension(
    curve: &BoundaryCurve,
    geometry: &[NodeGeometry],
    radius: f64,
    mode: SolveMode,
    center: Option<Vec2>,
) -> Result<MfsField, MfsError> {
    let center = center.unwrap_or_else(|| curve.centroid());
    let layer = build_source_layer(center, radius, curve.len())?;
    let problem = assemble(curve, &layer, geometry, mode)?;
    solve(&problem)
}
