//! Mesh-orientation study: a Cu disk in a SiO2 plate, with the disk mesh
//! rotated rigidly and re-coupled to the unchanged plate mesh.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::assembly::{MaterialMap, MechanicalBc, MethodParams};
use crate::error::{Result, VemError};
use crate::geometry::Point;
use crate::material::Material;
use crate::mesh::{generate_polygonal_mesh, merge_nonmatching_interface, rotate_region_mesh, Domain, DomainLoop, Element, PolygonalMesh};
use crate::pipeline::{solve_elastic, SolveOptions};
use crate::postprocess::{extract_line, recover_stress, LineField};

pub const MATRIX: &str = "sio2";
pub const INCLUSION: &str = "cu";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RotationParams {
    /// Plate side length (mm).
    pub side: f64,
    pub radius: f64,
    /// Segments of the polygonal disk boundary; a multiple of 24 keeps both
    /// the plate corners and 30° rotations on boundary vertices.
    pub segments: usize,
    /// Radial layers of the plate O-grid.
    pub layers: usize,
    pub inclusion_seeds: usize,
    pub seed: u64,
    /// Uniform normal traction on the top edge (MPa).
    pub traction: f64,
    pub samples: usize,
}

impl Default for RotationParams {
    fn default() -> Self {
        RotationParams { side: 1.0, radius: 0.1, segments: 48, layers: 16, inclusion_seeds: 80, seed: 7, traction: 2.0, samples: 97 }
    }
}

impl RotationParams {
    pub fn materials(&self) -> MaterialMap {
        // conductivity is unused by the elastic solve
        BTreeMap::from([
            (MATRIX.to_string(), Material::new(75000.0, 0.17, 0.0, 1.0)),
            (INCLUSION.to_string(), Material::new(150000.0, 0.3, 0.0, 1.0)),
        ])
    }

    fn disk_point(&self, j: usize) -> Point {
        let t = 2.0 * std::f64::consts::PI * (j % self.segments) as f64 / self.segments as f64;
        [self.radius * t.cos(), self.radius * t.sin()]
    }
}

/// Quadrilateral O-grid between the polygonal disk boundary and the square
/// plate edge, both centred at the origin. Each ray of constant angle is
/// split into `layers` cells. Tags: bottom, right, top, left, interface.
pub fn o_grid_mesh(p: &RotationParams) -> Result<PolygonalMesh> {
    if !p.segments.is_multiple_of(24) || p.layers == 0 || !(p.radius > 0.0 && 2.0 * p.radius < p.side) {
        return Err(VemError::InvalidDomain(format!(
            "o-grid needs segments divisible by 24, layers ≥ 1 and 0 < radius < side/2, got {}, {}, {}",
            p.segments, p.layers, p.radius
        )));
    }
    let (n, m) = (p.segments, p.layers);
    let half = p.side / 2.0;
    let mut nodes = Vec::with_capacity(n * (m + 1));
    for i in 0..=m {
        let s = i as f64 / m as f64;
        for j in 0..n {
            let c = p.disk_point(j);
            let t = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            let scale = half / t.cos().abs().max(t.sin().abs());
            let q = [scale * t.cos(), scale * t.sin()];
            nodes.push([(1.0 - s) * c[0] + s * q[0], (1.0 - s) * c[1] + s * q[1]]);
        }
    }
    // the square corners must be exact
    for j in (n / 8..n).step_by(n / 4) {
        let q = nodes[m * n + j];
        nodes[m * n + j] = [half.copysign(q[0]), half.copysign(q[1])];
    }
    let id = |i: usize, j: usize| i * n + j % n;
    let mut elements = Vec::with_capacity(n * m);
    for i in 0..m {
        for j in 0..n {
            elements.push(Element { vertices: vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)], region: MATRIX.into() });
        }
    }
    let mut boundary: BTreeMap<String, Vec<[usize; 2]>> = BTreeMap::new();
    // the hole is traversed clockwise as seen from the plate
    boundary.insert("interface".into(), (0..n).map(|j| [id(0, j + 1), id(0, j)]).collect());
    for j in 0..n {
        let (a, b) = (id(m, j), id(m, j + 1));
        let mid = [(nodes[a][0] + nodes[b][0]) / 2.0, (nodes[a][1] + nodes[b][1]) / 2.0];
        let tag = if mid[1] <= -half + 1e-12 {
            "bottom"
        } else if mid[0] >= half - 1e-12 {
            "right"
        } else if mid[1] >= half - 1e-12 {
            "top"
        } else {
            "left"
        };
        boundary.entry(tag.into()).or_default().push([a, b]);
    }
    Ok(PolygonalMesh { nodes, elements, boundary })
}

/// Plate O-grid coupled to a Voronoi disk at angle 0.
pub fn inclusion_mesh(p: &RotationParams) -> Result<PolygonalMesh> {
    let plate = o_grid_mesh(p)?;
    let ring: Vec<Point> = (0..p.segments).map(|j| p.disk_point(j)).collect();
    let disk = generate_polygonal_mesh(&Domain::new(DomainLoop::uniform(ring, "interface"), vec![]), p.inclusion_seeds, 10, p.seed, INCLUSION)?;
    merge_nonmatching_interface(&plate, &disk, "interface", "interface", plate.default_merge_tol())
}

/// Upper half of the interface, counter-clockwise from θ = 0 to θ = π.
pub fn arc_polyline(p: &RotationParams) -> Vec<Point> {
    (0..=p.segments / 2).map(|j| p.disk_point(j)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationProfile {
    pub angle_degrees: f64,
    pub elements: usize,
    pub nodes: usize,
    /// (arc length, von Mises) pairs along the upper interface.
    pub von_mises: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationReport {
    pub profiles: Vec<RotationProfile>,
    /// (angle a, angle b, max |vm_a − vm_b| / max |vm_a|) for every pair.
    pub pairwise: Vec<(f64, f64, f64)>,
    pub max_deviation: f64,
    pub element_count_constant: bool,
}

/// Largest pointwise difference relative to the peak of `a`.
pub fn profile_deviation(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let peak = a.iter().map(|v| v.1.abs()).fold(0.0, f64::max);
    a.iter().zip(b).map(|(x, y)| (x.1 - y.1).abs()).fold(0.0, f64::max) / peak
}

pub fn rotation_profile(p: &RotationParams, mesh: &PolygonalMesh, params: &MethodParams, angle_degrees: f64) -> Result<RotationProfile> {
    let materials = p.materials();
    let bcs = [
        MechanicalBc::Dirichlet { target: "bottom".into(), x: Some(0.0), y: Some(0.0) },
        MechanicalBc::Neumann { target: "top".into(), value: [0.0, p.traction] },
    ];
    let u = solve_elastic(mesh, &materials, &bcs, None, &SolveOptions::with_params(params.clone()))?;
    let stress = recover_stress(&u, None, mesh, &materials)?;
    let element_vm = stress.von_mises_elements();
    let nodal_vm = stress.von_mises_nodes(&materials);
    let field = LineField { element_value: Box::new(|e, _| element_vm[e]), nodal_averaged: Some(&nodal_vm) };
    Ok(RotationProfile {
        angle_degrees,
        elements: mesh.num_elements(),
        nodes: mesh.num_nodes(),
        von_mises: extract_line(mesh, &field, &arc_polyline(p), p.samples)?,
    })
}

pub fn run_rotation_study(p: &RotationParams, params: &MethodParams, angles_degrees: &[f64]) -> Result<RotationReport> {
    let base = inclusion_mesh(p)?;
    let profiles: Vec<RotationProfile> = angles_degrees
        .iter()
        .map(|&deg| {
            let mesh = rotate_region_mesh(&base, INCLUSION, deg.to_radians(), [0.0, 0.0])?;
            rotation_profile(p, &mesh, params, deg)
        })
        .collect::<Result<_>>()?;
    let mut pairwise = Vec::new();
    for (i, a) in profiles.iter().enumerate() {
        for b in &profiles[i + 1..] {
            let d = profile_deviation(&a.von_mises, &b.von_mises).max(profile_deviation(&b.von_mises, &a.von_mises));
            pairwise.push((a.angle_degrees, b.angle_degrees, d));
        }
    }
    let max_deviation = pairwise.iter().map(|x| x.2).fold(0.0, f64::max);
    let element_count_constant = profiles.windows(2).all(|w| w[0].elements == w[1].elements);
    Ok(RotationReport { profiles, pairwise, max_deviation, element_count_constant })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn o_grid_covers_plate_minus_disk() {
        let p = RotationParams { layers: 4, ..Default::default() };
        let mesh = o_grid_mesh(&p).unwrap();
        mesh.validate().unwrap();
        mesh.audit_topology().unwrap();
        let n = p.segments as f64;
        let polygon = n / 2.0 * p.radius * p.radius * (2.0 * std::f64::consts::PI / n).sin();
        assert!((mesh.total_area() - (1.0 - polygon)).abs() < 1e-12);
        for tag in ["bottom", "right", "top", "left"] {
            assert_eq!(mesh.boundary[tag].len(), p.segments / 4);
        }
    }

    #[test]
    fn rotated_disk_stays_coupled() {
        let p = RotationParams { layers: 4, inclusion_seeds: 20, ..Default::default() };
        let base = inclusion_mesh(&p).unwrap();
        let turned = rotate_region_mesh(&base, INCLUSION, 30f64.to_radians(), [0.0, 0.0]).unwrap();
        turned.audit_topology().unwrap();
        assert_eq!(turned.num_elements(), base.num_elements());
        assert!((turned.total_area() - base.total_area()).abs() < 1e-12);
    }
}
