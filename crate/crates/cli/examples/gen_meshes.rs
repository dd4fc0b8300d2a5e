// SPDX-License-Identifier: Apache-2.0

//! Writes the bundled fixture meshes into `crates/cli/data/`.
//!
//! Boundary vertices are the preset curve nodes themselves; the interior is a
//! constrained Delaunay refinement that never splits boundary edges.

use std::path::Path;

use alemfs::geometry::{preset, Preset};
use alemfs::mesh::{mesh_ratio, min_angle, save_mesh, TriMesh};
use alemfs::Vec2;
use spade::{AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation};

fn generate(name: Preset, n_nodes: usize) -> TriMesh {
    let curve = preset(name, n_nodes, 1.0).expect("preset");
    let nodes = curve.nodes();
    let n = nodes.len();
    let vertices: Vec<Point2<f64>> = nodes.iter().map(|p| Point2::new(p.x, p.y)).collect();
    let edges: Vec<[usize; 2]> = (0..n).map(|i| [i, (i + 1) % n]).collect();
    let mut cdt = ConstrainedDelaunayTriangulation::<Point2<f64>>::bulk_load_cdt(vertices, edges)
        .expect("constrained triangulation");
    let h = curve.edge_lengths().iter().sum::<f64>() / n as f64;
    let result = cdt.refine(
        RefinementParameters::new()
            .with_angle_limit(AngleLimit::from_deg(28.0))
            .with_max_allowed_area(0.5 * h * h)
            .keep_constraint_edges()
            .exclude_outer_faces(true)
            .with_max_additional_vertices(200_000),
    );
    assert!(result.refinement_complete, "{name}: refinement incomplete");
    let excluded: std::collections::HashSet<_> = result.excluded_faces.iter().copied().collect();

    let mut remap = vec![usize::MAX; cdt.num_vertices()];
    let mut points = Vec::new();
    for (i, slot) in remap.iter_mut().enumerate().take(n) {
        *slot = i;
        points.push(nodes[i]);
    }
    let mut triangles = Vec::new();
    for face in cdt.inner_faces() {
        if excluded.contains(&face.fix()) {
            continue;
        }
        let mut tri = [0usize; 3];
        for (k, v) in face.vertices().iter().enumerate() {
            let idx = v.fix().index();
            if remap[idx] == usize::MAX {
                remap[idx] = points.len();
                let p = v.position();
                points.push(Vec2::new(p.x, p.y));
            }
            tri[k] = remap[idx];
        }
        triangles.push(tri);
    }
    TriMesh::new(points, triangles, (0..n).collect()).expect("valid mesh")
}

fn main() {
    let out = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    std::fs::create_dir_all(&out).expect("data directory");
    for (name, n_nodes) in [
        (Preset::Circle, 64),
        (Preset::SharpAsterisk, 64),
        (Preset::SharpAsterisk, 256),
        (Preset::Amoeba, 64),
    ] {
        let mesh = generate(name, n_nodes);
        let path = out.join(format!("{name}_{n_nodes}.mesh"));
        std::fs::write(&path, save_mesh(&mesh)).expect("write mesh");
        println!(
            "{}: {} vertices, {} triangles, theta_min {:.2}, ratio {:.2}",
            path.display(),
            mesh.vertices().len(),
            mesh.triangles().len(),
            min_angle(&mesh).expect("angle"),
            mesh_ratio(&mesh).expect("ratio"),
        );
    }
}
