//! Polygonal mesh data model, generators and non-matching interface merging.

mod clip;
mod generate;
mod json;
mod merge;
mod voronoi;

pub use generate::{generate_polar_quad_mesh, generate_quad_mesh};
pub use json::{read_mesh, write_mesh, MeshDocument};
pub use merge::{merge_nonmatching_interface, rotate_region_mesh};
pub use voronoi::{generate_polygonal_mesh, Domain, DomainLoop};

use std::collections::{BTreeMap, BTreeSet, HashMap};

use sha2::{Digest, Sha256};

use crate::error::{Result, VemError};
use crate::geometry::{self, Point};

/// Relative merge tolerance; multiplied by the domain diameter.
pub const MERGE_TOL_FACTOR: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Element {
    /// Node ids in counter-clockwise order.
    pub vertices: Vec<usize>,
    pub region: String,
}

#[derive(Clone, Debug, Copy, PartialEq)]
pub struct ElementGeometry {
    pub area: f64,
    pub centroid: Point,
    /// Largest vertex-to-vertex distance, h_E.
    pub diameter: f64,
}

impl ElementGeometry {
    pub fn from_vertices(vertices: &[Point]) -> Result<Self> {
        let degenerate = |reason: &str| VemError::DegenerateElement { element: usize::MAX, reason: reason.to_string() };
        if vertices.len() < 3 {
            return Err(degenerate("fewer than 3 vertices"));
        }
        let area = geometry::signed_area(vertices);
        if !(area > 0.0) {
            return Err(degenerate("non-positive signed area"));
        }
        let centroid = geometry::centroid(vertices).ok_or_else(|| degenerate("zero area"))?;
        let diameter = geometry::diameter(vertices);
        Ok(ElementGeometry { area, centroid, diameter })
    }

    /// Scaled coordinates (ξ, η) of a physical point.
    #[inline]
    pub fn scaled(&self, p: Point) -> Point {
        [(p[0] - self.centroid[0]) / self.diameter, (p[1] - self.centroid[1]) / self.diameter]
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PolygonalMesh {
    pub nodes: Vec<Point>,
    pub elements: Vec<Element>,
    /// Tagged boundary edges, each stored as an ordered node pair.
    pub boundary: BTreeMap<String, Vec<[usize; 2]>>,
}

/// Edge-incidence summary produced by [`PolygonalMesh::audit_topology`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TopologyReport {
    pub interior_edges: usize,
    pub boundary_edges: usize,
    pub untagged_boundary_edges: usize,
}

#[inline]
fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl PolygonalMesh {
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn element_vertices(&self, e: usize) -> Vec<Point> {
        self.elements[e].vertices.iter().map(|&i| self.nodes[i]).collect()
    }

    pub fn element_geometry(&self, e: usize) -> Result<ElementGeometry> {
        ElementGeometry::from_vertices(&self.element_vertices(e)).map_err(|err| match err {
            VemError::DegenerateElement { reason, .. } => VemError::DegenerateElement { element: e, reason },
            other => other,
        })
    }

    pub fn total_area(&self) -> f64 {
        (0..self.elements.len()).map(|e| geometry::signed_area(&self.element_vertices(e))).sum()
    }

    /// Diagonal of the node bounding box.
    pub fn diameter(&self) -> f64 {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &self.nodes {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        if self.nodes.is_empty() {
            return 0.0;
        }
        (hi[0] - lo[0]).hypot(hi[1] - lo[1])
    }

    pub fn default_merge_tol(&self) -> f64 {
        MERGE_TOL_FACTOR * self.diameter()
    }

    pub fn regions(&self) -> BTreeSet<String> {
        self.elements.iter().map(|e| e.region.clone()).collect()
    }

    /// Sorted, de-duplicated node ids on the edges carrying `tag`.
    pub fn boundary_nodes(&self, tag: &str) -> Result<Vec<usize>> {
        let edges = self
            .boundary
            .get(tag)
            .ok_or_else(|| VemError::BoundaryCondition(format!("unknown boundary tag '{tag}'")))?;
        let set: BTreeSet<usize> = edges.iter().flat_map(|e| [e[0], e[1]]).collect();
        Ok(set.into_iter().collect())
    }

    pub fn rename_boundary_tag(&mut self, from: &str, to: &str) {
        if let Some(edges) = self.boundary.remove(from) {
            self.boundary.entry(to.to_string()).or_default().extend(edges);
        }
    }

    /// Prefixes every boundary tag, e.g. to keep tags distinct before merging.
    pub fn prefix_boundary_tags(&mut self, prefix: &str) {
        let old = std::mem::take(&mut self.boundary);
        self.boundary = old.into_iter().map(|(k, v)| (format!("{prefix}{k}"), v)).collect();
    }

    pub fn set_region(&mut self, region: &str) {
        for e in &mut self.elements {
            e.region = region.to_string();
        }
    }

    /// Checks ids, vertex counts, repeated vertices, orientation and simplicity.
    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        for (i, p) in self.nodes.iter().enumerate() {
            if !p[0].is_finite() || !p[1].is_finite() {
                return Err(VemError::InvalidMesh(format!("node {i} has non-finite coordinates")));
            }
        }
        let tol = self.default_merge_tol();
        for (e, el) in self.elements.iter().enumerate() {
            if el.vertices.len() < 3 {
                return Err(VemError::InvalidMesh(format!("element {e} has fewer than 3 vertices")));
            }
            if let Some(&bad) = el.vertices.iter().find(|&&v| v >= n) {
                return Err(VemError::InvalidMesh(format!("element {e} references missing node {bad}")));
            }
            let uniq: BTreeSet<usize> = el.vertices.iter().copied().collect();
            if uniq.len() != el.vertices.len() {
                return Err(VemError::InvalidMesh(format!("element {e} repeats a vertex")));
            }
            let poly = self.element_vertices(e);
            if geometry::signed_area(&poly) <= 0.0 {
                return Err(VemError::InvalidMesh(format!("element {e} is not counter-clockwise")));
            }
            if !geometry::is_simple(&poly, tol) {
                return Err(VemError::InvalidMesh(format!("element {e} is self-intersecting")));
            }
        }
        for (tag, edges) in &self.boundary {
            for ed in edges {
                if ed[0] >= n || ed[1] >= n || ed[0] == ed[1] {
                    return Err(VemError::InvalidMesh(format!("boundary '{tag}' has invalid edge {ed:?}")));
                }
            }
        }
        Ok(())
    }

    /// Number of elements sharing each undirected edge.
    pub fn edge_incidence(&self) -> HashMap<(usize, usize), usize> {
        let mut map = HashMap::new();
        for el in &self.elements {
            let n = el.vertices.len();
            for i in 0..n {
                *map.entry(edge_key(el.vertices[i], el.vertices[(i + 1) % n])).or_insert(0) += 1;
            }
        }
        map
    }

    /// Half-edge audit: every edge has one or two incident elements, every
    /// single-incidence edge is tagged, and every tagged edge lies on exactly
    /// one element.
    pub fn audit_topology(&self) -> Result<TopologyReport> {
        let inc = self.edge_incidence();
        let tagged: BTreeSet<(usize, usize)> =
            self.boundary.values().flatten().map(|e| edge_key(e[0], e[1])).collect();
        let mut report = TopologyReport { interior_edges: 0, boundary_edges: 0, untagged_boundary_edges: 0 };
        for (&edge, &count) in &inc {
            match count {
                1 => {
                    report.boundary_edges += 1;
                    if !tagged.contains(&edge) {
                        report.untagged_boundary_edges += 1;
                    }
                }
                2 => report.interior_edges += 1,
                _ => {
                    return Err(VemError::InvalidMesh(format!("edge {edge:?} is shared by {count} elements")));
                }
            }
        }
        for edge in &tagged {
            if inc.get(edge) != Some(&1) {
                return Err(VemError::InvalidMesh(format!("tagged edge {edge:?} is not a boundary edge")));
            }
        }
        if report.untagged_boundary_edges > 0 {
            return Err(VemError::InvalidMesh(format!(
                "{} boundary edges are not tagged (mesh is not watertight)",
                report.untagged_boundary_edges
            )));
        }
        Ok(report)
    }

    /// Smallest distance between two distinct nodes (brute force on a grid hash).
    pub fn min_node_distance(&self) -> f64 {
        let h = self.diameter() / (self.nodes.len() as f64).sqrt().max(1.0);
        let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        let key = |p: Point| ((p[0] / h).floor() as i64, (p[1] / h).floor() as i64);
        for (i, &p) in self.nodes.iter().enumerate() {
            grid.entry(key(p)).or_default().push(i);
        }
        let mut best = f64::INFINITY;
        for (i, &p) in self.nodes.iter().enumerate() {
            let (kx, ky) = key(p);
            for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(list) = grid.get(&(kx + dx, ky + dy)) {
                        for &j in list {
                            if j > i {
                                best = best.min(geometry::dist(p, self.nodes[j]));
                            }
                        }
                    }
                }
            }
        }
        best
    }

    /// SHA-256 over coordinates, connectivity, regions and boundary tags.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        for p in &self.nodes {
            h.update(p[0].to_le_bytes());
            h.update(p[1].to_le_bytes());
        }
        for el in &self.elements {
            h.update((el.vertices.len() as u64).to_le_bytes());
            for &v in &el.vertices {
                h.update((v as u64).to_le_bytes());
            }
            h.update(el.region.as_bytes());
            h.update([0u8]);
        }
        for (tag, edges) in &self.boundary {
            h.update(tag.as_bytes());
            h.update([0u8]);
            for e in edges {
                h.update((e[0] as u64).to_le_bytes());
                h.update((e[1] as u64).to_le_bytes());
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Drops nodes not referenced by any element and renumbers the rest
    /// preserving their relative order.
    pub(crate) fn compact_nodes(&mut self) {
        let mut used = vec![false; self.nodes.len()];
        for el in &self.elements {
            for &v in &el.vertices {
                used[v] = true;
            }
        }
        let mut new_id = vec![usize::MAX; self.nodes.len()];
        let mut nodes = Vec::new();
        for (i, &u) in used.iter().enumerate() {
            if u {
                new_id[i] = nodes.len();
                nodes.push(self.nodes[i]);
            }
        }
        for el in &mut self.elements {
            for v in &mut el.vertices {
                *v = new_id[*v];
            }
        }
        for edges in self.boundary.values_mut() {
            edges.retain(|e| used[e[0]] && used[e[1]]);
            for e in edges.iter_mut() {
                *e = [new_id[e[0]], new_id[e[1]]];
            }
        }
        self.boundary.retain(|_, v| !v.is_empty());
        self.nodes = nodes;
    }
}

/// Element geometry by mesh and element id.
pub fn element_geometry(mesh: &PolygonalMesh, element: usize) -> Result<ElementGeometry> {
    if element >= mesh.elements.len() {
        return Err(VemError::InvalidMesh(format!("element {element} does not exist")));
    }
    mesh.element_geometry(element)
}

/// Merges nodes closer than `tol`. The smallest id of each cluster survives;
/// returns the old→representative map.
pub(crate) fn merge_close_nodes(nodes: &[Point], tol: f64) -> Vec<usize> {
    let cell = if tol > 0.0 { tol * 4.0 } else { 1.0 };
    let key = |p: Point| ((p[0] / cell).floor() as i64, (p[1] / cell).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut rep: Vec<usize> = (0..nodes.len()).collect();
    for (i, &p) in nodes.iter().enumerate() {
        let (kx, ky) = key(p);
        let mut found = None;
        'search: for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(list) = grid.get(&(kx + dx, ky + dy)) {
                    for &j in list {
                        if geometry::dist(p, nodes[j]) <= tol {
                            found = Some(j);
                            break 'search;
                        }
                    }
                }
            }
        }
        match found {
            Some(j) => rep[i] = rep[j],
            None => grid.entry((kx, ky)).or_default().push(i),
        }
    }
    rep
}

/// Removes cyclically consecutive duplicate vertex ids.
pub(crate) fn dedup_cyclic(v: &mut Vec<usize>) {
    v.dedup();
    while v.len() > 1 && v.first() == v.last() {
        v.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_of_unit_square() {
        let g = ElementGeometry::from_vertices(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        assert_eq!(g.area, 1.0);
        assert_eq!(g.centroid, [0.5, 0.5]);
        assert!((g.diameter - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn geometry_of_reference_triangle() {
        let g = ElementGeometry::from_vertices(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert!((g.area - 0.5).abs() < 1e-15);
        assert!((g.centroid[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((g.centroid[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!((g.diameter - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn geometry_of_regular_hexagon() {
        let hex: Vec<Point> = (0..6)
            .map(|k| {
                let t = k as f64 * std::f64::consts::PI / 3.0;
                [t.cos(), t.sin()]
            })
            .collect();
        let g = ElementGeometry::from_vertices(&hex).unwrap();
        assert!((g.area - 1.5 * 3f64.sqrt()).abs() < 1e-14);
        assert!((g.diameter - 2.0).abs() < 1e-14);
        assert!(g.centroid[0].abs() < 1e-15 && g.centroid[1].abs() < 1e-15);
    }

    #[test]
    fn zero_area_is_degenerate() {
        let mesh = PolygonalMesh {
            nodes: vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]],
            elements: vec![Element { vertices: vec![0, 1, 2], region: "a".into() }],
            boundary: BTreeMap::new(),
        };
        assert!(matches!(element_geometry(&mesh, 0), Err(VemError::DegenerateElement { element: 0, .. })));
    }

    #[test]
    fn diameter_bounds_every_edge() {
        let poly = [[0.0, 0.0], [3.0, 0.1], [2.5, 2.0], [0.2, 1.5], [-0.5, 0.7]];
        let g = ElementGeometry::from_vertices(&poly).unwrap();
        for i in 0..poly.len() {
            assert!(g.diameter >= geometry::dist(poly[i], poly[(i + 1) % poly.len()]));
        }
    }

    #[test]
    fn merge_close_nodes_keeps_smallest_id() {
        let nodes = [[0.0, 0.0], [1.0, 0.0], [1e-13, 0.0], [1.0, 1e-13]];
        assert_eq!(merge_close_nodes(&nodes, 1e-10), vec![0, 1, 0, 1]);
    }
}
