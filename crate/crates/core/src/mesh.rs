// SPDX-License-Identifier: Apache-2.0

//! Triangle meshes carried along by the boundary motion and their quality
//! metrics: minimum interior angle and the spread of element diameters.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::exec;
use crate::geometry::{BoundaryCurve, NodeGeometry};
use crate::mfs::{evaluate_field, MfsError, MfsField};
use crate::point::Vec2;

/// Triangles with area at or below this are degenerate.
pub const DEGENERATE_AREA: f64 = 1e-14;

/// Elements below this minimum angle (degrees) are flagged.
pub const ANGLE_THRESHOLD_DEG: f64 = 180.0 / 18.0;

/// Initial meshes below this minimum angle (degrees) draw a warning.
pub const INITIAL_ANGLE_WARNING_DEG: f64 = 20.0;

/// Squared edge lengths equal to this relative spread count as equilateral,
/// scaled up by vertex magnitude over edge length to absorb coordinate rounding.
const EQUILATERAL_RTOL: f64 = 8.0 * f64::EPSILON;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("edge ({0}, {1}) is shared by more than two triangles")]
    Nonconforming(usize, usize),
    #[error("triangle {index} references vertex {vertex} of {count}")]
    IndexOutOfRange { index: usize, vertex: usize, count: usize },
    #[error("triangle {0} is degenerate")]
    DegenerateTriangle(usize),
    #[error("boundary vertex {index} is {distance:e} from curve node {index}")]
    BoundaryMismatch { index: usize, distance: f64 },
    #[error("mesh has {mesh} boundary vertices, curve has {curve} nodes")]
    BoundaryCount { mesh: usize, curve: usize },
    #[error(transparent)]
    Mfs(#[from] MfsError),
}

/// A triangulation whose boundary vertices follow the curve nodes in order.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    vertices: Vec<Vec2>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<usize>,
}

fn signed_area(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    0.5 * (b - a).cross(c - a)
}

impl TriMesh {
    /// Validates indices and conformity; negatively oriented triangles are flipped.
    pub fn new(vertices: Vec<Vec2>, triangles: Vec<[usize; 3]>, boundary: Vec<usize>) -> Result<Self, MeshError> {
        let count = vertices.len();
        let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
        let mut oriented = Vec::with_capacity(triangles.len());
        for (index, t) in triangles.into_iter().enumerate() {
            if let Some(&vertex) = t.iter().find(|&&v| v >= count) {
                return Err(MeshError::IndexOutOfRange { index, vertex, count });
            }
            let t = if signed_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]) < 0.0 {
                [t[0], t[2], t[1]]
            } else {
                t
            };
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let uses = edges.entry(key).or_insert(0);
                *uses += 1;
                if *uses > 2 {
                    return Err(MeshError::Nonconforming(key.0, key.1));
                }
            }
            oriented.push(t);
        }
        if let Some(&vertex) = boundary.iter().find(|&&v| v >= count) {
            return Err(MeshError::IndexOutOfRange {
                index: usize::MAX,
                vertex,
                count,
            });
        }
        Ok(Self {
            vertices,
            triangles: oriented,
            boundary,
        })
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Vertex indices in curve order.
    pub fn boundary_vertex_ids(&self) -> &[usize] {
        &self.boundary
    }

    pub fn triangle_points(&self, t: usize) -> [Vec2; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        signed_area(a, b, c)
    }

    /// Mesh with every vertex mapped through `f`; connectivity unchanged.
    pub fn map_vertices(&self, f: impl Fn(Vec2) -> Vec2) -> TriMesh {
        TriMesh {
            vertices: self.vertices.iter().map(|&v| f(v)).collect(),
            triangles: self.triangles.clone(),
            boundary: self.boundary.clone(),
        }
    }

    /// Number of triangles with non-positive signed area.
    pub fn inverted_count(&self) -> usize {
        (0..self.triangles.len())
            .filter(|&t| self.triangle_area(t) <= 0.0)
            .count()
    }

    /// Checks that boundary vertices coincide with the curve nodes.
    pub fn check_boundary(&self, curve: &BoundaryCurve, tol: f64) -> Result<(), MeshError> {
        if self.boundary.len() != curve.len() {
            return Err(MeshError::BoundaryCount {
                mesh: self.boundary.len(),
                curve: curve.len(),
            });
        }
        for (index, &v) in self.boundary.iter().enumerate() {
            let distance = self.vertices[v].distance(curve.node(index));
            if distance > tol {
                return Err(MeshError::BoundaryMismatch { index, distance });
            }
        }
        Ok(())
    }
}

fn parse_header(line: Option<(usize, &str)>, keyword: &str) -> Result<(usize, usize), MeshError> {
    let (no, text) = line.ok_or(MeshError::Parse {
        line: 0,
        message: format!("missing {keyword} header"),
    })?;
    let mut it = text.split_whitespace();
    match (it.next(), it.next().map(str::parse::<usize>), it.next()) {
        (Some(k), Some(Ok(n)), None) if k == keyword => Ok((no, n)),
        _ => Err(MeshError::Parse {
            line: no,
            message: format!("expected '{keyword} <count>'"),
        }),
    }
}

fn parse_fields<T: std::str::FromStr>(
    line: Option<(usize, &str)>,
    count: usize,
    what: &str,
) -> Result<Vec<T>, MeshError> {
    let (no, text) = line.ok_or(MeshError::Parse {
        line: 0,
        message: format!("unexpected end of file, expected {what}"),
    })?;
    let fields: Result<Vec<T>, _> = text.split_whitespace().map(str::parse::<T>).collect();
    match fields {
        Ok(v) if v.len() == count => Ok(v),
        _ => Err(MeshError::Parse {
            line: no,
            message: format!("expected {what}"),
        }),
    }
}

/// Parses the text format. Returns the mesh and any quality warnings.
pub fn load_mesh(text: &str) -> Result<(TriMesh, Vec<String>), MeshError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (_, nv) = parse_header(lines.next(), "VERTICES")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let line = lines.next();
        let no = line.map_or(0, |l| l.0);
        let v = parse_fields::<f64>(line, 2, "'x y'")?;
        if !v.iter().all(|c| c.is_finite()) {
            return Err(MeshError::Parse {
                line: no,
                message: "non-finite coordinate".into(),
            });
        }
        vertices.push(Vec2::new(v[0], v[1]));
    }
    let (_, nt) = parse_header(lines.next(), "TRIANGLES")?;
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let line = lines.next();
        let no = line.map_or(0, |l| l.0);
        let t = parse_fields::<usize>(line, 3, "'i j k'")?;
        if let Some(&bad) = t.iter().find(|&&v| v >= nv) {
            return Err(MeshError::Parse {
                line: no,
                message: format!("vertex index {bad} out of range"),
            });
        }
        triangles.push([t[0], t[1], t[2]]);
    }
    let (_, nb) = parse_header(lines.next(), "BOUNDARY")?;
    let mut boundary = Vec::with_capacity(nb);
    for _ in 0..nb {
        let line = lines.next();
        let no = line.map_or(0, |l| l.0);
        let b = parse_fields::<usize>(line, 1, "a vertex index")?[0];
        if b >= nv {
            return Err(MeshError::Parse {
                line: no,
                message: format!("vertex index {b} out of range"),
            });
        }
        boundary.push(b);
    }
    if let Some((no, _)) = lines.next() {
        return Err(MeshError::Parse {
            line: no,
            message: "trailing content".into(),
        });
    }
    let mesh = TriMesh::new(vertices, triangles, boundary)?;
    let mut warnings = Vec::new();
    match min_angle(&mesh) {
        Ok(theta) if theta < INITIAL_ANGLE_WARNING_DEG => warnings.push(format!(
            "minimum angle {theta:.3} deg is below {INITIAL_ANGLE_WARNING_DEG} deg"
        )),
        Ok(_) => {}
        Err(e) => warnings.push(e.to_string()),
    }
    Ok((mesh, warnings))
}

/// Canonical text form; floats use shortest round-trip formatting.
pub fn save_mesh(mesh: &TriMesh) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "VERTICES {}", mesh.vertices.len());
    for v in &mesh.vertices {
        let _ = writeln!(out, "{:?} {:?}", v.x, v.y);
    }
    let _ = writeln!(out, "TRIANGLES {}", mesh.triangles.len());
    for t in &mesh.triangles {
        let _ = writeln!(out, "{} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(out, "BOUNDARY {}", mesh.boundary.len());
    for b in &mesh.boundary {
        let _ = writeln!(out, "{b}");
    }
    out
}

fn angle_deg(opposite_sq: f64, a_sq: f64, b_sq: f64) -> f64 {
    let c = ((a_sq + b_sq - opposite_sq) / (2.0 * (a_sq * b_sq).sqrt())).clamp(-1.0, 1.0);
    c.acos().to_degrees()
}

/// Smallest interior angle of triangle `t` in degrees.
pub fn triangle_min_angle(mesh: &TriMesh, t: usize) -> Result<f64, MeshError> {
    let [a, b, c] = mesh.triangle_points(t);
    if signed_area(a, b, c).abs() <= DEGENERATE_AREA {
        return Err(MeshError::DegenerateTriangle(t));
    }
    let (ab, bc, ca) = ((b - a).norm_sq(), (c - b).norm_sq(), (a - c).norm_sq());
    let (lo, hi) = (ab.min(bc).min(ca), ab.max(bc).max(ca));
    let magnitude = [a, b, c].iter().map(|p| p.x.abs().max(p.y.abs())).fold(0.0, f64::max);
    if hi - lo <= EQUILATERAL_RTOL * hi * (magnitude / hi.sqrt()).max(1.0) {
        return Ok(60.0);
    }
    let theta = angle_deg(bc, ab, ca)
        .min(angle_deg(ca, ab, bc))
        .min(angle_deg(ab, bc, ca));
    Ok(theta.min(60.0))
}

/// Longest edge of triangle `t`.
pub fn triangle_diameter(mesh: &TriMesh, t: usize) -> Result<f64, MeshError> {
    let [a, b, c] = mesh.triangle_points(t);
    if signed_area(a, b, c).abs() <= DEGENERATE_AREA {
        return Err(MeshError::DegenerateTriangle(t));
    }
    Ok(a.distance(b).max(b.distance(c)).max(c.distance(a)))
}

fn per_triangle(mesh: &TriMesh, f: fn(&TriMesh, usize) -> Result<f64, MeshError>) -> Result<Vec<f64>, MeshError> {
    exec::map_range(mesh.triangles.len(), |t| f(mesh, t))
        .into_iter()
        .collect()
}

/// `min_K min_ℓ θ_ℓ(K)` in degrees.
pub fn min_angle(mesh: &TriMesh) -> Result<f64, MeshError> {
    Ok(per_triangle(mesh, triangle_min_angle)?
        .into_iter()
        .fold(f64::INFINITY, f64::min))
}

/// Largest over smallest triangle diameter.
pub fn mesh_ratio(mesh: &TriMesh) -> Result<f64, MeshError> {
    let d = per_triangle(mesh, triangle_diameter)?;
    let hi = d.iter().copied().fold(0.0, f64::max);
    let lo = d.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(hi / lo)
}

/// Quality of one mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshQualityReport {
    pub theta_min: f64,
    pub mesh_ratio: f64,
    pub below_threshold: bool,
}

pub fn quality(mesh: &TriMesh) -> Result<MeshQualityReport, MeshError> {
    let theta_min = min_angle(mesh)?;
    Ok(MeshQualityReport {
        theta_min,
        mesh_ratio: mesh_ratio(mesh)?,
        below_threshold: theta_min < ANGLE_THRESHOLD_DEG,
    })
}

/// Quality of each mesh in a trajectory.
pub fn quality_series(meshes: &[TriMesh]) -> Result<Vec<MeshQualityReport>, MeshError> {
    meshes.iter().map(quality).collect()
}

/// A transported mesh and the number of inverted elements.
#[derive(Debug, Clone, PartialEq)]
pub struct Transported {
    pub mesh: TriMesh,
    pub inverted_count: usize,
}

/// Boundary vertices move with the curve velocities, interior vertices with the field.
pub fn transport_mesh(
    mesh: &TriMesh,
    field: &MfsField,
    curve_velocities: &[NodeGeometry],
    dt: f64,
) -> Result<Transported, MeshError> {
    if curve_velocities.len() != mesh.boundary.len() {
        return Err(MeshError::BoundaryCount {
            mesh: mesh.boundary.len(),
            curve: curve_velocities.len(),
        });
    }
    let mut on_boundary = vec![None; mesh.vertices.len()];
    for (k, &v) in mesh.boundary.iter().enumerate() {
        on_boundary[v] = Some(k);
    }
    let interior: Vec<usize> = (0..mesh.vertices.len()).filter(|&v| on_boundary[v].is_none()).collect();
    let points: Vec<Vec2> = interior.iter().map(|&v| mesh.vertices[v]).collect();
    let u = evaluate_field(field, &points)?;
    let mut vertices = mesh.vertices.clone();
    for (&v, ui) in interior.iter().zip(&u) {
        vertices[v] += *ui * dt;
    }
    for (k, &v) in mesh.boundary.iter().enumerate() {
        vertices[v] += curve_velocities[k].velocity * dt;
    }
    let moved = TriMesh {
        vertices,
        triangles: mesh.triangles.clone(),
        boundary: mesh.boundary.clone(),
    };
    let inverted_count = moved.inverted_count();
    Ok(Transported {
        mesh: moved,
        inverted_count,
    })
}

/// Header of the mesh quality CSV.
pub const QUALITY_CSV_HEADER: &str = "step,t,theta_min_deg,mesh_ratio,below_threshold,inverted_count";

/// One mesh quality CSV row.
pub fn quality_csv_row(step: usize, t: f64, q: &MeshQualityReport, inverted_count: usize) -> String {
    format!(
        "{step},{},{},{},{},{inverted_count}",
        crate::indicators::fmt_real(t),
        crate::indicators::fmt_real(q.theta_min),
        crate::indicators::fmt_real(q.mesh_ratio),
        u8::from(q.below_threshold)
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mfs::{build_source_layer, SolveMode};

    fn tri(points: [(f64, f64); 3]) -> TriMesh {
        TriMesh::new(points.iter().map(|&p| Vec2::from(p)).collect(), vec![[0, 1, 2]], vec![]).unwrap()
    }

    /// Structured `nx × ny` grid of the rectangle `[0, w] × [0, h]`, two triangles per cell.
    fn grid(nx: usize, ny: usize, w: f64, h: f64) -> TriMesh {
        let mut v = Vec::new();
        for j in 0..=ny {
            for i in 0..=nx {
                v.push(Vec2::new(w * i as f64 / nx as f64, h * j as f64 / ny as f64));
            }
        }
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut t = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                t.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                t.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        TriMesh::new(v, t, vec![]).unwrap()
    }

    #[test]
    fn angle_examples() {
        let eq = tri([(0.0, 0.0), (1.0, 0.0), (0.5, 3f64.sqrt() / 2.0)]);
        assert_eq!(min_angle(&eq).unwrap(), 60.0);
        let rotated = eq.map_vertices(|p| Vec2::new(0.6 * p.x - 0.8 * p.y + 3.0, 0.8 * p.x + 0.6 * p.y - 1.0) * 7.5);
        assert_eq!(min_angle(&rotated).unwrap(), 60.0);
        let near = tri([(0.0, 0.0), (1.0, 0.0), (0.5, 0.8661)]);
        assert!(min_angle(&near).unwrap() < 60.0);
        let iso = tri([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]);
        assert!((min_angle(&iso).unwrap() - 45.0).abs() < 1e-12);
        let t345 = tri([(0.0, 0.0), (4.0, 0.0), (0.0, 3.0)]);
        assert!((min_angle(&t345).unwrap() - (4.0f64 / 5.0).acos().to_degrees()).abs() < 1e-12);
        assert!((min_angle(&t345).unwrap() - 36.8699).abs() < 1e-4);
        let flat = tri([(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
        assert_eq!(min_angle(&flat), Err(MeshError::DegenerateTriangle(0)));
    }

    #[test]
    fn ratio_examples() {
        assert_eq!(mesh_ratio(&grid(4, 3, 4.0, 3.0)).unwrap(), 1.0);
        let two = TriMesh::new(
            vec![
                Vec2::new(0.0, 0.0),
                Vec2::new(2.0, 0.0),
                Vec2::new(0.0, 0.1),
                Vec2::new(5.0, 0.0),
                Vec2::new(5.5, 0.0),
                Vec2::new(5.0, 0.1),
            ],
            vec![[0, 1, 2], [3, 4, 5]],
            vec![],
        )
        .unwrap();
        assert!((mesh_ratio(&two).unwrap() - 2.0f64.hypot(0.1) / 0.5f64.hypot(0.1)).abs() < 1e-12);
        let a = TriMesh::new(
            vec![
                Vec2::new(0.0, 0.0),
                Vec2::new(2.0, 0.0),
                Vec2::new(0.0, 1.0),
                Vec2::new(5.0, 0.0),
                Vec2::new(5.5, 0.0),
                Vec2::new(5.0, 0.25),
            ],
            vec![[0, 1, 2], [3, 4, 5]],
            vec![],
        )
        .unwrap();
        assert!((mesh_ratio(&a).unwrap() - 5f64.sqrt() / 0.3125f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn refined_half_has_ratio_two() {
        // Left half of the unit square with cells of 1/4, right half with 1/8.
        let coarse = grid(2, 4, 0.5, 1.0);
        let fine = grid(4, 8, 0.5, 1.0).map_vertices(|p| p + Vec2::new(0.5, 0.0));
        let mut v = coarse.vertices().to_vec();
        let off = v.len();
        v.extend_from_slice(fine.vertices());
        let mut t = coarse.triangles().to_vec();
        t.extend(fine.triangles().iter().map(|x| x.map(|i| i + off)));
        let mesh = TriMesh::new(v, t, vec![]).unwrap();
        assert!((mesh_ratio(&mesh).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn load_save_round_trip() {
        let text = "VERTICES 3\n0 0\n1 0\n0.5 0.8660254037844386\nTRIANGLES 1\n0 1 2\nBOUNDARY 3\n0\n1\n2\n";
        let (mesh, warnings) = load_mesh(text).unwrap();
        assert_eq!((mesh.vertices().len(), mesh.triangles().len()), (3, 1));
        assert!(warnings.is_empty());
        let saved = save_mesh(&mesh);
        let (again, _) = load_mesh(&saved).unwrap();
        assert_eq!(again, mesh);
        assert_eq!(save_mesh(&again), saved);
    }

    #[test]
    fn load_reorients_and_rejects_bad_input() {
        let text = "VERTICES 3\n0 0\n1 0\n0 1\nTRIANGLES 1\n0 2 1\nBOUNDARY 0\n";
        let (mesh, _) = load_mesh(text).unwrap();
        assert!(mesh.triangle_area(0) > 0.0);
        let bad = "VERTICES 3\n0 0\n1 zero\n0 1\nTRIANGLES 0\nBOUNDARY 0\n";
        assert!(matches!(load_mesh(bad), Err(MeshError::Parse { line: 3, .. })));
        let oob = "VERTICES 3\n0 0\n1 0\n0 1\nTRIANGLES 1\n0 1 7\nBOUNDARY 0\n";
        assert!(matches!(load_mesh(oob), Err(MeshError::Parse { line: 6, .. })));
        let fan = "VERTICES 5\n0 0\n1 0\n0 1\n0 -1\n-1 0.5\nTRIANGLES 3\n0 1 2\n0 1 3\n0 1 4\nBOUNDARY 0\n";
        assert!(matches!(load_mesh(fan), Err(MeshError::Nonconforming(0, 1))));
        let sliver = "VERTICES 3\n0 0\n1 0\n0.5 0.05\nTRIANGLES 1\n0 1 2\nBOUNDARY 0\n";
        assert_eq!(load_mesh(sliver).unwrap().1.len(), 1);
    }

    fn field_with(u: impl Fn(usize) -> [f64; 2]) -> MfsField {
        let layer = build_source_layer(Vec2::ZERO, 10.0, 8).unwrap();
        let c0 = (0..8).map(|j| u(j)[0]).collect();
        let c1 = (0..8).map(|j| u(j)[1]).collect();
        MfsField::new(layer, [c0, c1], SolveMode::Square).unwrap()
    }

    #[test]
    fn zero_transport_and_threshold_flag() {
        let mesh = grid(3, 3, 1.0, 1.0);
        let mesh = TriMesh::new(mesh.vertices().to_vec(), mesh.triangles().to_vec(), vec![0, 3, 15, 12]).unwrap();
        let zero = field_with(|_| [0.0, 0.0]);
        let still = vec![NodeGeometry::zero_velocity(Vec2::new(1.0, 0.0)); 4];
        let moved = transport_mesh(&mesh, &zero, &still, 0.1).unwrap();
        assert_eq!(moved.mesh, mesh);
        assert_eq!(moved.inverted_count, 0);
        let q = quality_series(&[mesh.clone(), mesh.clone()]).unwrap();
        assert_eq!(q[0], q[1]);
        assert!(!q[0].below_threshold);
        let sliver = tri([(0.0, 0.0), (1.0, 0.0), (0.5, 0.05)]);
        assert!(quality(&sliver).unwrap().below_threshold);
    }

    #[test]
    fn inversion_is_counted() {
        let mesh = TriMesh::new(
            vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)],
            vec![[0, 1, 2]],
            vec![0, 1],
        )
        .unwrap();
        let zero = field_with(|_| [0.0, 0.0]);
        let push = vec![
            NodeGeometry::zero_velocity(Vec2::new(1.0, 0.0)),
            NodeGeometry {
                normal: Vec2::new(1.0, 0.0),
                curvature: 0.0,
                velocity: Vec2::new(-2.0, 2.0),
            },
        ];
        let moved = transport_mesh(&mesh, &zero, &push, 1.0).unwrap();
        assert_eq!(moved.inverted_count, 1);
        assert_eq!(moved.mesh.triangles(), mesh.triangles());
    }
}
