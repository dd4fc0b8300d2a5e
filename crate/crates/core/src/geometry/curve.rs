// SPDX-License-Identifier: Apache-2.0

use crate::exec;
use crate::point::Vec2;

use super::bspline::{fit_bspline, normal_and_curvature, SplineFit};
use super::GeometryError;

pub const MIN_NODES: usize = 8;
const MIN_NODE_SEPARATION: f64 = 1e-12;
const COLLINEAR_TOL: f64 = 1e-12;

/// Closed, ordered boundary polyline. Node 0 follows node `n − 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCurve {
    nodes: Vec<Vec2>,
    counterclockwise: bool,
}

/// Outward normal, curvature and curvature-flow velocity at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeGeometry {
    pub normal: Vec2,
    pub curvature: f64,
    pub velocity: Vec2,
}

impl NodeGeometry {
    /// Builds the record with `velocity = −curvature · normal`.
    pub fn from_normal_curvature(normal: Vec2, curvature: f64) -> Self {
        Self {
            normal,
            curvature,
            velocity: normal * (-curvature),
        }
    }

    pub fn zero_velocity(normal: Vec2) -> Self {
        Self {
            normal,
            curvature: 0.0,
            velocity: Vec2::ZERO,
        }
    }
}

/// Stencil size and fit tolerance for the local spline reconstruction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionParams {
    pub stencil: usize,
    pub eps_tol: f64,
}

impl Default for ReconstructionParams {
    fn default() -> Self {
        Self {
            stencil: 7,
            eps_tol: 1e-10,
        }
    }
}

impl ReconstructionParams {
    pub fn validate(&self) -> Result<(), GeometryError> {
        if self.stencil < 5 || self.stencil.is_multiple_of(2) {
            return Err(GeometryError::InvalidStencil(self.stencil));
        }
        if !(self.eps_tol > 0.0) {
            return Err(GeometryError::InvalidTolerance(self.eps_tol));
        }
        Ok(())
    }
}

/// The spline fitted to the stencil around one node.
#[derive(Debug, Clone)]
pub struct LocalSpline {
    pub fit: SplineFit,
    /// Position of the owning node inside the stencil.
    pub center: usize,
}

impl LocalSpline {
    pub fn center_param(&self) -> f64 {
        self.fit.params[self.center]
    }

    /// Parameter a fraction `f ∈ [0, 1]` of the way from the owning node to its successor.
    pub fn param_toward_next(&self, f: f64) -> f64 {
        let a = self.fit.params[self.center];
        let b = self.fit.params[self.center + 1];
        a + f * (b - a)
    }

    pub fn point(&self, u: f64) -> Result<Vec2, GeometryError> {
        self.fit.spline.point(u)
    }

    pub fn geometry_at(&self, u: f64, counterclockwise: bool) -> Result<NodeGeometry, GeometryError> {
        let (n, k) = normal_and_curvature(&self.fit.spline, u, counterclockwise)?;
        Ok(NodeGeometry::from_normal_curvature(n, k))
    }
}

impl BoundaryCurve {
    pub fn new(nodes: Vec<Vec2>, counterclockwise: bool) -> Result<Self, GeometryError> {
        if nodes.len() < MIN_NODES {
            return Err(GeometryError::TooFewNodes {
                min: MIN_NODES,
                got: nodes.len(),
            });
        }
        if let Some(index) = nodes.iter().position(|p| !p.is_finite()) {
            return Err(GeometryError::NonFiniteNode { index });
        }
        let n = nodes.len();
        if let Some(index) = (0..n).find(|&i| nodes[i].distance(nodes[(i + 1) % n]) <= MIN_NODE_SEPARATION) {
            return Err(GeometryError::CoincidentNodes { index });
        }
        let curve = Self {
            nodes,
            counterclockwise,
        };
        let area = curve.signed_area();
        if (area > 0.0) != counterclockwise {
            return Err(GeometryError::OrientationMismatch { area });
        }
        Ok(curve)
    }

    /// Builds a curve, inferring the orientation flag from the signed area.
    pub fn from_nodes(nodes: Vec<Vec2>) -> Result<Self, GeometryError> {
        let ccw = signed_area(&nodes) > 0.0;
        Self::new(nodes, ccw)
    }

    pub fn nodes(&self) -> &[Vec2] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_counterclockwise(&self) -> bool {
        self.counterclockwise
    }

    pub fn node(&self, i: usize) -> Vec2 {
        self.nodes[i % self.nodes.len()]
    }

    /// Same point set traversed the other way, with the flag flipped.
    pub fn reversed(&self) -> Self {
        let mut nodes = self.nodes.clone();
        nodes.reverse();
        Self {
            nodes,
            counterclockwise: !self.counterclockwise,
        }
    }

    /// Moves every node by its displacement; the orientation flag is kept.
    pub fn displaced(&self, displacement: &[Vec2]) -> Result<Self, GeometryError> {
        let nodes = self.nodes.iter().zip(displacement).map(|(p, d)| *p + *d).collect();
        Self::new(nodes, self.counterclockwise)
    }

    pub fn signed_area(&self) -> f64 {
        signed_area(&self.nodes)
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    /// Area centroid of the polygon.
    pub fn centroid(&self) -> Vec2 {
        let n = self.nodes.len();
        let mut acc = Vec2::ZERO;
        let mut a2 = 0.0;
        for i in 0..n {
            let p = self.nodes[i];
            let q = self.nodes[(i + 1) % n];
            let c = p.cross(q);
            a2 += c;
            acc += (p + q) * c;
        }
        acc * (1.0 / (3.0 * a2))
    }

    pub fn edge_lengths(&self) -> Vec<f64> {
        let n = self.nodes.len();
        (0..n)
            .map(|i| self.nodes[i].distance(self.nodes[(i + 1) % n]))
            .collect()
    }

    pub fn min_edge_length(&self) -> f64 {
        self.edge_lengths().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn max_radius_about(&self, center: Vec2) -> f64 {
        self.nodes.iter().map(|p| p.distance(center)).fold(0.0, f64::max)
    }

    pub fn mean_radius_about(&self, center: Vec2) -> f64 {
        self.nodes.iter().map(|p| p.distance(center)).sum::<f64>() / self.nodes.len() as f64
    }

    /// Crossing-number point-in-polygon test.
    pub fn contains(&self, p: Vec2) -> bool {
        let n = self.nodes.len();
        let mut inside = false;
        for i in 0..n {
            let a = self.nodes[i];
            let b = self.nodes[(i + 1) % n];
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Euclidean distance from `p` to the polyline.
    pub fn distance_to(&self, p: Vec2) -> f64 {
        let n = self.nodes.len();
        (0..n)
            .map(|i| point_segment_distance(p, self.nodes[i], self.nodes[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Fits the local spline around node `i`.
    pub fn local_spline(&self, i: usize, params: &ReconstructionParams) -> Result<LocalSpline, GeometryError> {
        let idx = stencil_for_node(self, i, params.stencil)?;
        let pts: Vec<Vec2> = idx.iter().map(|&j| self.nodes[j]).collect();
        let fit = fit_bspline(&pts, params.eps_tol)?;
        Ok(LocalSpline {
            fit,
            center: params.stencil / 2,
        })
    }

    pub fn node_geometry(&self, i: usize, params: &ReconstructionParams) -> Result<NodeGeometry, GeometryError> {
        let local = self.local_spline(i, params)?;
        local.geometry_at(local.center_param(), self.counterclockwise)
    }
}

pub(crate) fn signed_area(nodes: &[Vec2]) -> f64 {
    let n = nodes.len();
    0.5 * (0..n).map(|i| nodes[i].cross(nodes[(i + 1) % n])).sum::<f64>()
}

fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sq();
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

/// Indices of the `m` nodes centred on `i`, in curve order, wrapping cyclically.
pub fn stencil_for_node(curve: &BoundaryCurve, i: usize, m: usize) -> Result<Vec<usize>, GeometryError> {
    let n = curve.len();
    if m == 0 || m.is_multiple_of(2) {
        return Err(GeometryError::InvalidStencil(m));
    }
    if m > n {
        return Err(GeometryError::StencilTooLarge { m, n });
    }
    let half = m / 2;
    Ok((0..m).map(|k| (i + n + k - half) % n).collect())
}

/// The local spline of every node.
pub fn local_splines(curve: &BoundaryCurve, params: &ReconstructionParams) -> Result<Vec<LocalSpline>, GeometryError> {
    params.validate()?;
    if params.stencil > curve.len() {
        return Err(GeometryError::StencilTooLarge {
            m: params.stencil,
            n: curve.len(),
        });
    }
    exec::map_range(curve.len(), |i| curve.local_spline(i, params).map_err(|e| e.at_node(i)))
        .into_iter()
        .collect()
}

/// Node geometry evaluated at the centre of each precomputed local spline.
pub fn geometry_from_splines(
    curve: &BoundaryCurve,
    splines: &[LocalSpline],
) -> Result<Vec<NodeGeometry>, GeometryError> {
    let ccw = curve.counterclockwise;
    exec::map_range(splines.len(), |i| {
        let s = &splines[i];
        s.geometry_at(s.center_param(), ccw).map_err(|e| e.at_node(i))
    })
    .into_iter()
    .collect()
}

/// Per-node `(n, κ, V_Γ = −κ n)` from each node's local spline.
pub fn boundary_velocity(
    curve: &BoundaryCurve,
    params: &ReconstructionParams,
) -> Result<Vec<NodeGeometry>, GeometryError> {
    geometry_from_splines(curve, &local_splines(curve, params)?)
}

/// Maximum chord between consecutive nodes.
pub fn fill_distance(curve: &BoundaryCurve) -> f64 {
    curve.edge_lengths().into_iter().fold(0.0, f64::max)
}

fn orientation(a: Vec2, b: Vec2, c: Vec2) -> i8 {
    let v = (b - a).cross(c - a);
    let scale = (b - a).norm() * (c - a).norm();
    if v.abs() <= COLLINEAR_TOL * scale.max(f64::MIN_POSITIVE) {
        0
    } else if v > 0.0 {
        1
    } else {
        -1
    }
}

fn on_segment(a: Vec2, b: Vec2, p: Vec2) -> bool {
    p.x >= a.x.min(b.x) - COLLINEAR_TOL
        && p.x <= a.x.max(b.x) + COLLINEAR_TOL
        && p.y >= a.y.min(b.y) - COLLINEAR_TOL
        && p.y <= a.y.max(b.y) + COLLINEAR_TOL
}

/// Closed-segment intersection test.
pub fn segments_intersect(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2) -> bool {
    let o1 = orientation(p1, p2, q1);
    let o2 = orientation(p1, p2, q2);
    let o3 = orientation(q1, q2, p1);
    let o4 = orientation(q1, q2, p2);
    if o1 * o2 < 0 && o3 * o4 < 0 {
        return true;
    }
    (o1 == 0 && on_segment(p1, p2, q1))
        || (o2 == 0 && on_segment(p1, p2, q2))
        || (o3 == 0 && on_segment(q1, q2, p1))
        || (o4 == 0 && on_segment(q1, q2, p2))
}

/// True iff two non-adjacent edges intersect.
pub fn self_intersects(curve: &BoundaryCurve) -> bool {
    let nodes = curve.nodes();
    let n = nodes.len();
    let hit = exec::map_range(n, |i| {
        let (a, b) = (nodes[i], nodes[(i + 1) % n]);
        (i + 2..n)
            .filter(|&j| (j + 1) % n != i)
            .any(|j| segments_intersect(a, b, nodes[j], nodes[(j + 1) % n]))
    });
    hit.into_iter().any(|h| h)
}

/// One resampling pass: drop nodes closer than `d_min` to the last kept node,
/// then insert a spline midpoint into every gap wider than `d_max`.
pub fn resample(
    curve: &BoundaryCurve,
    d_min: f64,
    d_max: f64,
    params: &ReconstructionParams,
) -> Result<BoundaryCurve, GeometryError> {
    if !(d_min > 0.0 && d_min < d_max) {
        return Err(GeometryError::InvalidThresholds { d_min, d_max });
    }
    let nodes = curve.nodes();
    let mut kept: Vec<Vec2> = Vec::with_capacity(nodes.len());
    for &p in nodes {
        match kept.last() {
            Some(&last) if last.distance(p) < d_min => {}
            _ => kept.push(p),
        }
    }
    // closing edge: the earlier-indexed node 0 survives
    while kept.len() > 1 && kept[kept.len() - 1].distance(kept[0]) < d_min {
        kept.pop();
    }
    if kept.len() < MIN_NODES {
        return Err(GeometryError::CurveCollapse { remaining: kept.len() });
    }
    let thinned = BoundaryCurve::new(kept, curve.is_counterclockwise())?;
    let n = thinned.len();
    let wide: Vec<usize> = (0..n)
        .filter(|&i| thinned.node(i).distance(thinned.node(i + 1)) > d_max)
        .collect();
    if wide.is_empty() {
        return Ok(thinned);
    }
    let inserts = exec::map_slice(&wide, |&i| -> Result<Vec2, GeometryError> {
        if params.stencil <= n {
            let local = thinned.local_spline(i, params)?;
            local.point(local.param_toward_next(0.5))
        } else {
            Ok(thinned.node(i).lerp(thinned.node(i + 1), 0.5))
        }
    });
    let mut out = Vec::with_capacity(n + wide.len());
    let mut next = wide.iter().zip(inserts).peekable();
    for i in 0..n {
        out.push(thinned.node(i));
        if let Some((_, p)) = next.next_if(|(&w, _)| w == i) {
            out.push(p.map_err(|e| e.at_node(i))?);
        }
    }
    BoundaryCurve::new(out, curve.is_counterclockwise())
}
