//! Patch tests: linear temperature and displacement fields imposed on the
//! whole boundary must be reproduced exactly inside.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::assembly::{Constraints, MaterialMap, MethodParams};
use crate::error::Result;
use crate::geometry::Point;
use crate::material::{elasticity_matrix, AnalysisMode, Material};
use crate::mesh::{generate_polygonal_mesh, generate_quad_mesh, merge_nonmatching_interface, Domain, PolygonalMesh};
use crate::pipeline::{solve_elastic_with, solve_thermal_with, SolveOptions};
use crate::postprocess::recover_stress;

/// Linear temperature used by the thermal patch test.
pub fn patch_temperature(p: Point) -> f64 {
    1.0 + 2.0 * p[0] - 3.0 * p[1]
}

/// Linear displacement used by the elastic patch test.
pub fn patch_displacement(p: Point) -> [f64; 2] {
    [1e-3 * (1.0 + 2.0 * p[0] + p[1]), 1e-3 * (-1.0 + 0.5 * p[0] - 3.0 * p[1])]
}

/// Engineering strain of [`patch_displacement`].
pub const PATCH_STRAIN: [f64; 3] = [2e-3, -3e-3, 1.5e-3];

pub fn patch_material() -> Material {
    Material::new(1000.0, 0.25, 1e-5, 2.0)
}

/// The same material on every region of `mesh`.
pub fn uniform_materials(mesh: &PolygonalMesh, material: Material) -> MaterialMap {
    mesh.regions().into_iter().map(|r| (r, material)).collect()
}

/// All nodes on any tagged boundary edge.
pub fn all_boundary_nodes(mesh: &PolygonalMesh) -> BTreeSet<usize> {
    mesh.boundary.values().flatten().flat_map(|e| [e[0], e[1]]).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatchReport {
    /// Largest interior nodal error relative to the largest nodal value.
    pub nodal_error: f64,
    /// Largest element flux or stress error relative to its exact norm.
    pub gradient_error: f64,
    pub interior_nodes: usize,
}

fn relative(errors: impl Iterator<Item = f64>, scale: f64) -> f64 {
    errors.fold(0.0, f64::max) / scale
}

pub fn thermal_patch(mesh: &PolygonalMesh, params: &MethodParams) -> Result<PatchReport> {
    let boundary = all_boundary_nodes(mesh);
    let mut constraints = Constraints::new();
    for &i in &boundary {
        constraints.insert(i, patch_temperature(mesh.nodes[i]))?;
    }
    let materials = uniform_materials(mesh, patch_material());
    let options = SolveOptions::with_params(params.clone());
    let t = solve_thermal_with(mesh, &materials, &constraints, &vec![0.0; mesh.num_nodes()], &options)?;
    let scale = mesh.nodes.iter().map(|&p| patch_temperature(p).abs()).fold(0.0, f64::max);
    let interior: Vec<usize> = (0..mesh.num_nodes()).filter(|i| !boundary.contains(i)).collect();
    let nodal_error = relative(interior.iter().map(|&i| (t.values[i] - patch_temperature(mesh.nodes[i])).abs()), scale);
    let gradient_error = relative(
        t.elements.iter().map(|el| {
            let g = el.gradient_at_centroid();
            (g[0] - 2.0).hypot(g[1] + 3.0)
        }),
        13f64.sqrt(),
    );
    Ok(PatchReport { nodal_error, gradient_error, interior_nodes: interior.len() })
}

pub fn elastic_patch(mesh: &PolygonalMesh, params: &MethodParams, mode: AnalysisMode) -> Result<PatchReport> {
    let boundary = all_boundary_nodes(mesh);
    let mut constraints = Constraints::new();
    for &i in &boundary {
        let u = patch_displacement(mesh.nodes[i]);
        constraints.insert(2 * i, u[0])?;
        constraints.insert(2 * i + 1, u[1])?;
    }
    let material = patch_material();
    let materials = uniform_materials(mesh, material);
    let options = SolveOptions { mode, ..SolveOptions::with_params(params.clone()) };
    let u = solve_elastic_with(mesh, &materials, &constraints, &vec![0.0; 2 * mesh.num_nodes()], None, &options)?;
    let scale = mesh.nodes.iter().map(|&p| patch_displacement(p)[0].hypot(patch_displacement(p)[1])).fold(0.0, f64::max);
    let interior: Vec<usize> = (0..mesh.num_nodes()).filter(|i| !boundary.contains(i)).collect();
    let nodal_error = relative(
        interior.iter().map(|&i| {
            let exact = patch_displacement(mesh.nodes[i]);
            let d = u.displacement(i);
            (d[0] - exact[0]).hypot(d[1] - exact[1])
        }),
        scale,
    );
    let exact = elasticity_matrix(&material, mode)? * nalgebra::Vector3::from(PATCH_STRAIN);
    let stress = recover_stress(&u, None, mesh, &materials)?;
    let gradient_error = relative(
        stress.per_element.iter().map(|s| (nalgebra::Vector3::from(*s) - exact).norm()),
        exact.norm(),
    );
    Ok(PatchReport { nodal_error, gradient_error, interior_nodes: interior.len() })
}

/// Three-region L-shape: structured quads on [0,1]² and [0,1]×[1,2] with
/// mismatched spacing along y = 1, and Voronoi cells on [1,2]×[0,1].
/// Tags: left, bottom, right, top and inner (the two re-entrant edges).
pub fn l_shape_mesh(seed: u64) -> Result<PolygonalMesh> {
    let mut a = generate_quad_mesh([0.0, 1.0], [0.0, 1.0], 4, 4, "a")?;
    let mut b = generate_polygonal_mesh(&Domain::rectangle([1.0, 2.0], [0.0, 1.0]), 30, 5, seed, "b")?;
    let mut c = generate_quad_mesh([0.0, 1.0], [1.0, 2.0], 3, 3, "c")?;
    a.prefix_boundary_tags("a-");
    b.prefix_boundary_tags("b-");
    c.prefix_boundary_tags("c-");
    let tol = 1e-9 * 2f64.hypot(2.0);
    let ac = merge_nonmatching_interface(&a, &c, "a-top", "c-bottom", tol)?;
    let mut mesh = merge_nonmatching_interface(&ac, &b, "a-right", "b-left", tol)?;
    for (from, to) in [
        ("a-left", "left"),
        ("c-left", "left"),
        ("a-bottom", "bottom"),
        ("b-bottom", "bottom"),
        ("b-right", "right"),
        ("c-top", "top"),
        ("c-right", "inner"),
        ("b-top", "inner"),
    ] {
        mesh.rename_boundary_tag(from, to);
    }
    Ok(mesh)
}

/// The three patch-test meshes: structured quads, 200 Voronoi cells and the
/// merged L-shape.
pub fn patch_meshes(seed: u64) -> Result<Vec<(&'static str, PolygonalMesh)>> {
    Ok(vec![
        ("quad", generate_quad_mesh([0.0, 1.0], [0.0, 1.0], 6, 5, "a")?),
        ("voronoi", generate_polygonal_mesh(&Domain::rectangle([0.0, 1.0], [0.0, 1.0]), 200, 5, seed, "a")?),
        ("l-shape", l_shape_mesh(seed)?),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l_shape_is_watertight_and_non_matching() {
        let mesh = l_shape_mesh(3).unwrap();
        let report = mesh.audit_topology().unwrap();
        assert!(report.interior_edges > 0);
        assert_eq!(mesh.num_elements(), 16 + 9 + mesh.elements.iter().filter(|e| e.region == "b").count());
        assert!((mesh.total_area() - 3.0).abs() < 1e-12);
        // the coarse row of c picks up the fine nodes of a along y = 1
        assert!(mesh.elements.iter().any(|e| e.region == "c" && e.vertices.len() > 4));
        let tags: Vec<&str> = mesh.boundary.keys().map(String::as_str).collect();
        assert_eq!(tags, ["bottom", "inner", "left", "right", "top"]);
    }

    #[test]
    fn quad_patch_is_exact() {
        let mesh = generate_quad_mesh([0.0, 1.0], [0.0, 1.0], 3, 3, "a").unwrap();
        let r = thermal_patch(&mesh, &MethodParams::vem(0.5)).unwrap();
        assert!(r.nodal_error < 1e-12 && r.gradient_error < 1e-12 && r.interior_nodes == 4);
        let r = elastic_patch(&mesh, &MethodParams::sfvem(None), AnalysisMode::PlaneStress).unwrap();
        assert!(r.nodal_error < 1e-12 && r.gradient_error < 1e-11);
    }
}
