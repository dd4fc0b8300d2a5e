// SPDX-License-Identifier: Apache-2.0

//! Boundary point clouds and their local B-spline reconstruction.

mod bspline;
mod curve;
mod preset;

pub use bspline::{
    chord_length_parameters, fit_bspline, fit_bspline_with_degree, normal_and_curvature, signed_curvature,
    BSplineCurve, SplineFit, DEFAULT_DEGREE, MAX_REFINEMENT_ROUNDS,
};
pub use curve::{
    boundary_velocity, fill_distance, geometry_from_splines, local_splines, resample, segments_intersect,
    self_intersects, stencil_for_node, BoundaryCurve, LocalSpline, NodeGeometry, ReconstructionParams, MIN_NODES,
};
pub use preset::{preset, Preset};

use thiserror::Error;

use crate::numerics::NumericsError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("curve needs at least {min} nodes, got {got}")]
    TooFewNodes { min: usize, got: usize },
    #[error("nodes {index} and its successor coincide")]
    CoincidentNodes { index: usize },
    #[error("signed area {area:e} contradicts the orientation flag")]
    OrientationMismatch { area: f64 },
    #[error("non-finite node coordinate at {index}")]
    NonFiniteNode { index: usize },
    #[error("stencil of {m} nodes requested from a curve with {n} nodes")]
    StencilTooLarge { m: usize, n: usize },
    #[error("stencil size {0} must be odd and at least 5")]
    InvalidStencil(usize),
    #[error("need at least {needed} points to fit, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("fit deviation {deviation:e} exceeds 10x tolerance {eps_tol:e}")]
    ToleranceNotReached { deviation: f64, eps_tol: f64 },
    #[error("parameter {u} outside [{lo}, {hi}]")]
    ParameterOutOfRange { u: f64, lo: f64, hi: f64 },
    #[error("degenerate tangent at parameter {u}")]
    DegenerateTangent { u: f64 },
    #[error("invalid spline: {0}")]
    InvalidSpline(String),
    #[error("resampling would leave {remaining} nodes")]
    CurveCollapse { remaining: usize },
    #[error("invalid resampling thresholds d_min={d_min}, d_max={d_max}")]
    InvalidThresholds { d_min: f64, d_max: f64 },
    #[error("unknown preset '{0}'")]
    UnknownPreset(String),
    #[error("preset needs at least 32 nodes, got {0}")]
    PresetTooCoarse(usize),
    #[error("at node {index}: {source}")]
    AtNode {
        index: usize,
        #[source]
        source: Box<GeometryError>,
    },
    #[error("curve file: {0}")]
    Parse(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

impl GeometryError {
    pub(crate) fn at_node(self, index: usize) -> Self {
        GeometryError::AtNode {
            index,
            source: Box::new(self),
        }
    }
}
