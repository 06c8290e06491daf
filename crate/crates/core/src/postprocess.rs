//! Stress recovery, interface-aware nodal averaging, von Mises stress, error
//! metrics and line sampling.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::assembly::{material_for, MaterialMap};
use crate::error::{Result, VemError};
use crate::geometry::{self, Point};
use crate::material::{elasticity_matrix, AnalysisMode};
use crate::mesh::PolygonalMesh;
use crate::pipeline::{FieldSolution, SolutionKind};

/// Voigt stress (σxx, σyy, σxy).
pub type Stress = [f64; 3];

#[derive(Clone, Debug, PartialEq)]
pub struct StressField {
    pub mode: AnalysisMode,
    /// Stress at each element centroid.
    pub per_element: Vec<Stress>,
    /// Mean over the incident elements of one region, keyed by (node, region).
    pub per_node_by_material: BTreeMap<(usize, String), Stress>,
    /// Mean over the region-wise means at each node.
    pub per_node_averaged: Vec<Stress>,
    /// Poisson ratio per element, needed for the plane-strain out-of-plane stress.
    pub poisson: Vec<f64>,
}

impl StressField {
    pub fn von_mises_elements(&self) -> Vec<f64> {
        self.per_element.iter().zip(&self.poisson).map(|(s, &nu)| von_mises(*s, self.mode, nu)).collect()
    }

    /// Von Mises at nodes from the averaged stress, using the mean Poisson
    /// ratio of the incident regions.
    pub fn von_mises_nodes(&self, materials: &MaterialMap) -> Vec<f64> {
        let mut nu = vec![(0.0, 0usize); self.per_node_averaged.len()];
        for (node, region) in self.per_node_by_material.keys() {
            if let Some(m) = materials.get(region) {
                nu[*node].0 += m.poisson;
                nu[*node].1 += 1;
            }
        }
        self.per_node_averaged
            .iter()
            .zip(nu)
            .map(|(s, (sum, count))| von_mises(*s, self.mode, if count > 0 { sum / count as f64 } else { 0.0 }))
            .collect()
    }
}

/// σ = D (ε − ε_t) at a point of element `e`.
pub fn stress_at(
    mesh: &PolygonalMesh,
    materials: &MaterialMap,
    displacement: &FieldSolution,
    temperature: Option<&FieldSolution>,
    e: usize,
    p: Point,
) -> Result<Stress> {
    let mode = displacement.metadata.mode.unwrap_or_default();
    let material = material_for(materials, &mesh.elements[e].region)?;
    let d = elasticity_matrix(material, mode)?;
    let eps = displacement.elements[e].strain_at(p);
    let dt = match temperature {
        Some(t) => {
            let t_ref = displacement.metadata.t_ref.unwrap_or(0.0);
            t.elements[e].value_at(p).ok_or_else(|| VemError::MeshMismatch("temperature solution lacks element values".into()))? - t_ref
        }
        None => 0.0,
    };
    let et = material.thermal_strain(dt);
    let r = [eps[0] - et[0], eps[1] - et[1], eps[2] - et[2]];
    let s = d * nalgebra::Vector3::from(r);
    Ok([s[0], s[1], s[2]])
}

pub fn recover_stress(
    displacement: &FieldSolution,
    temperature: Option<&FieldSolution>,
    mesh: &PolygonalMesh,
    materials: &MaterialMap,
) -> Result<StressField> {
    if displacement.kind != SolutionKind::Displacement {
        return Err(VemError::MeshMismatch("stress recovery needs a displacement solution".into()));
    }
    displacement.check_mesh(mesh)?;
    if let Some(t) = temperature {
        t.check_mesh(mesh)?;
    }
    let mode = displacement.metadata.mode.unwrap_or_default();
    let mut per_element = Vec::with_capacity(mesh.num_elements());
    let mut poisson = Vec::with_capacity(mesh.num_elements());
    for e in 0..mesh.num_elements() {
        per_element.push(stress_at(mesh, materials, displacement, temperature, e, displacement.elements[e].centroid)?);
        poisson.push(material_for(materials, &mesh.elements[e].region)?.poisson);
    }
    let (per_node_by_material, per_node_averaged) = average_to_nodes(mesh, &per_element);
    Ok(StressField { mode, per_element, per_node_by_material, per_node_averaged, poisson })
}

/// Region-wise nodal means of element values, then the mean over regions.
pub fn average_to_nodes<const K: usize>(
    mesh: &PolygonalMesh,
    per_element: &[[f64; K]],
) -> (BTreeMap<(usize, String), [f64; K]>, Vec<[f64; K]>) {
    let mut sums: BTreeMap<(usize, String), ([f64; K], usize)> = BTreeMap::new();
    for (el, v) in mesh.elements.iter().zip(per_element) {
        for &node in &el.vertices {
            let entry = sums.entry((node, el.region.clone())).or_insert(([0.0; K], 0));
            for k in 0..K {
                entry.0[k] += v[k];
            }
            entry.1 += 1;
        }
    }
    let by_material: BTreeMap<(usize, String), [f64; K]> =
        sums.into_iter().map(|(key, (s, c))| (key, s.map(|x| x / c as f64))).collect();
    let mut acc = vec![([0.0; K], 0usize); mesh.num_nodes()];
    for ((node, _), v) in &by_material {
        for k in 0..K {
            acc[*node].0[k] += v[k];
        }
        acc[*node].1 += 1;
    }
    let averaged = acc.into_iter().map(|(s, c)| if c == 0 { [0.0; K] } else { s.map(|x| x / c as f64) }).collect();
    (by_material, averaged)
}

/// Von Mises stress; plane strain adds σzz = ν (σxx + σyy).
pub fn von_mises(s: Stress, mode: AnalysisMode, poisson: f64) -> f64 {
    let [sx, sy, txy] = s;
    let sz = match mode {
        AnalysisMode::PlaneStress => 0.0,
        AnalysisMode::PlaneStrain => poisson * (sx + sy),
    };
    (0.5 * ((sx - sy).powi(2) + (sy - sz).powi(2) + (sz - sx).powi(2)) + 3.0 * txy * txy).max(0.0).sqrt()
}

/// Polar components (σ_r, σ_θ, σ_rθ) of a Cartesian stress at `p` about `center`.
pub fn to_polar(s: Stress, p: Point, center: Point) -> Stress {
    let t = (p[1] - center[1]).atan2(p[0] - center[0]);
    let (c, sn) = (t.cos(), t.sin());
    let [sx, sy, txy] = s;
    [
        sx * c * c + sy * sn * sn + 2.0 * txy * sn * c,
        sx * sn * sn + sy * c * c - 2.0 * txy * sn * c,
        (sy - sx) * sn * c + txy * (c * c - sn * sn),
    ]
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AverageError {
    /// Mean relative error in percent.
    pub percent: f64,
    pub used: usize,
    /// Samples skipped because the exact value was zero.
    pub excluded: usize,
}

/// Mean of |num − exact| / |exact| × 100, skipping exact zeros.
pub fn error_eav(numerical: &[f64], exact: &[f64]) -> Result<AverageError> {
    if numerical.len() != exact.len() {
        return Err(VemError::Metric(format!("{} numerical vs {} exact samples", numerical.len(), exact.len())));
    }
    let mut sum = 0.0;
    let mut used = 0;
    for (n, e) in numerical.iter().zip(exact) {
        if *e == 0.0 {
            continue;
        }
        sum += ((n - e) / e).abs();
        used += 1;
    }
    let excluded = exact.len() - used;
    if excluded > 0 {
        log::info!("E_AV: excluded {excluded} samples with zero exact value");
    }
    if used == 0 {
        return Err(VemError::Metric("no samples with nonzero exact value".into()));
    }
    Ok(AverageError { percent: 100.0 * sum / used as f64, used, excluded })
}

/// √(mean |X − X_e|²) / max |X_e|.
pub fn error_rms(numerical: &[f64], exact: &[f64]) -> Result<f64> {
    if numerical.len() != exact.len() || exact.is_empty() {
        return Err(VemError::Metric(format!("{} numerical vs {} exact samples", numerical.len(), exact.len())));
    }
    let max = exact.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return Err(VemError::Metric("all exact values are zero".into()));
    }
    let ms = numerical.iter().zip(exact).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / exact.len() as f64;
    Ok(ms.sqrt() / max)
}

/// Finds the elements containing a point.
pub struct PointLocator<'a> {
    mesh: &'a PolygonalMesh,
    boxes: Vec<[f64; 4]>,
    tol: f64,
}

impl<'a> PointLocator<'a> {
    pub fn new(mesh: &'a PolygonalMesh) -> Self {
        let boxes = mesh
            .elements
            .iter()
            .map(|el| {
                let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
                for &v in &el.vertices {
                    let p = mesh.nodes[v];
                    b = [b[0].min(p[0]), b[1].min(p[1]), b[2].max(p[0]), b[3].max(p[1])];
                }
                b
            })
            .collect();
        PointLocator { mesh, boxes, tol: 1e-9 * mesh.diameter() }
    }

    /// All elements containing `p` (boundary inclusive), in index order.
    pub fn locate_all(&self, p: Point) -> Vec<usize> {
        let t = self.tol;
        (0..self.boxes.len())
            .filter(|&e| {
                let b = self.boxes[e];
                p[0] >= b[0] - t && p[0] <= b[2] + t && p[1] >= b[1] - t && p[1] <= b[3] + t
            })
            .filter(|&e| geometry::point_in_or_on_polygon(p, &self.mesh.element_vertices(e), t))
            .collect()
    }

    pub fn locate(&self, p: Point) -> Result<usize> {
        self.locate_all(p).first().copied().ok_or(VemError::PointOutsideMesh { x: p[0], y: p[1] })
    }
}

/// A field sampled along lines: per-element evaluation plus, optionally,
/// material-averaged nodal values used on interfaces between regions.
pub struct LineField<'a> {
    pub element_value: Box<dyn Fn(usize, Point) -> f64 + 'a>,
    pub nodal_averaged: Option<&'a [f64]>,
}

/// Samples `field` at `n_samples` points evenly spaced in arc length along
/// `polyline`, returning (arc length, value) pairs.
pub fn extract_line(mesh: &PolygonalMesh, field: &LineField, polyline: &[Point], n_samples: usize) -> Result<Vec<(f64, f64)>> {
    if polyline.len() < 2 || n_samples < 2 {
        return Err(VemError::Metric("a line needs at least two points and two samples".into()));
    }
    let seg: Vec<f64> = polyline.windows(2).map(|w| geometry::dist(w[0], w[1])).collect();
    let total: f64 = seg.iter().sum();
    let locator = PointLocator::new(mesh);
    let mut out = Vec::with_capacity(n_samples);
    for k in 0..n_samples {
        let s = total * k as f64 / (n_samples - 1) as f64;
        let p = point_at(polyline, &seg, s);
        let hits = locator.locate_all(p);
        let first = *hits.first().ok_or(VemError::PointOutsideMesh { x: p[0], y: p[1] })?;
        let interface = hits.iter().any(|&e| mesh.elements[e].region != mesh.elements[first].region);
        let value = match (interface, field.nodal_averaged) {
            (true, Some(nodal)) => interface_value(mesh, first, p, nodal),
            _ => (field.element_value)(first, p),
        };
        out.push((s, value));
    }
    Ok(out)
}

fn point_at(polyline: &[Point], seg: &[f64], s: f64) -> Point {
    let mut rest = s;
    for (i, &len) in seg.iter().enumerate() {
        if rest <= len || i == seg.len() - 1 {
            let t = if len > 0.0 { (rest / len).clamp(0.0, 1.0) } else { 0.0 };
            let (a, b) = (polyline[i], polyline[i + 1]);
            return [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
        }
        rest -= len;
    }
    *polyline.last().unwrap()
}

/// Linear interpolation of nodal values along the element edge nearest `p`.
fn interface_value(mesh: &PolygonalMesh, e: usize, p: Point, nodal: &[f64]) -> f64 {
    let v = &mesh.elements[e].vertices;
    let mut best = (f64::INFINITY, 0.0, 0, 0);
    for i in 0..v.len() {
        let (a, b) = (v[i], v[(i + 1) % v.len()]);
        let (d, t) = geometry::point_segment_distance(p, mesh.nodes[a], mesh.nodes[b]);
        if d < best.0 {
            best = (d, t, a, b);
        }
    }
    let (_, t, a, b) = best;
    (1.0 - t) * nodal[a] + t * nodal[b]
}

/// CSV with header `s,value` and 17 significant digits.
pub fn line_csv(samples: &[(f64, f64)]) -> String {
    let mut out = String::from("s,value\n");
    for (s, v) in samples {
        let _ = writeln!(out, "{s:.16e},{v:.16e}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_quad_mesh;

    #[test]
    fn von_mises_reference_values() {
        assert!((von_mises([0.0, 0.0, 1.0], AnalysisMode::PlaneStress, 0.3) - 3f64.sqrt()).abs() < 1e-15);
        assert!((von_mises([5.0, 0.0, 0.0], AnalysisMode::PlaneStress, 0.3) - 5.0).abs() < 1e-15);
        // σ = (5, 0, 1.5): √(½((5)² + (1.5)² + (3.5)²)) = √19.75
        assert!((von_mises([5.0, 0.0, 0.0], AnalysisMode::PlaneStrain, 0.3) - 19.75f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn error_metrics() {
        let exact = [1.0, -2.0, 4.0, 0.0];
        assert_eq!(error_eav(&exact, &exact).unwrap().percent, 0.0);
        let num: Vec<f64> = exact.iter().map(|x| 1.01 * x).collect();
        let e = error_eav(&num, &exact).unwrap();
        assert!((e.percent - 1.0).abs() < 1e-12 && e.excluded == 1);
        let unit = [0.5, -1.0, 0.25];
        let shifted: Vec<f64> = unit.iter().map(|x| x + 0.1).collect();
        assert!((error_rms(&shifted, &unit).unwrap() - 0.1).abs() < 1e-15);
        assert!(error_rms(&[1.0], &[0.0]).is_err());
        assert!(error_eav(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn polar_rotation_of_uniaxial_stress() {
        let s = to_polar([2.0, 0.0, 0.0], [0.0, 1.0], [0.0, 0.0]);
        assert!(s[0].abs() < 1e-15 && (s[1] - 2.0).abs() < 1e-15 && s[2].abs() < 1e-15);
    }

    #[test]
    fn line_through_linear_field() {
        let mesh = generate_quad_mesh([0.0, 1.0], [0.0, 1.0], 4, 4, "a").unwrap();
        let field = LineField { element_value: Box::new(|_, p: Point| 2.0 * p[0] + p[1]), nodal_averaged: None };
        let s = extract_line(&mesh, &field, &[[0.0, 0.0], [1.0, 1.0]], 11).unwrap();
        for (arc, v) in &s {
            assert!((v - 3.0 * arc / 2f64.sqrt()).abs() < 1e-12);
        }
        assert!(matches!(extract_line(&mesh, &field, &[[0.0, 0.0], [2.0, 0.0]], 3), Err(VemError::PointOutsideMesh { .. })));
        let csv = line_csv(&s[..1]);
        assert_eq!(csv, "s,value\n0.0000000000000000e0,0.0000000000000000e0\n");
    }

    #[test]
    fn interface_nodes_average_material_means() {
        let mut mesh = generate_quad_mesh([0.0, 2.0], [0.0, 1.0], 2, 1, "a").unwrap();
        mesh.elements[1].region = "b".into();
        let (by, avg) = average_to_nodes(&mesh, &[[1.0], [3.0]]);
        let shared = mesh.elements[0].vertices.iter().find(|v| mesh.elements[1].vertices.contains(v)).unwrap();
        assert_eq!(by[&(*shared, "a".to_string())], [1.0]);
        assert_eq!(avg[*shared], [2.0]);
    }
}
