//! Non-matching interface coupling: interface nodes of each side become
//! polygon vertices of the abutting elements on the other side, then
//! coincident nodes are merged.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{dedup_cyclic, merge_close_nodes, Element, PolygonalMesh};
use crate::error::{Result, VemError};
use crate::geometry::{self, Point};

const INTERFACE_OWN: &str = "\u{0}interface-own";
const INTERFACE_OTHER: &str = "\u{0}interface-other";

fn chain<'a>(mesh: &'a PolygonalMesh, tag: &str) -> Result<&'a [[usize; 2]]> {
    mesh.boundary
        .get(tag)
        .map(Vec::as_slice)
        .ok_or_else(|| VemError::InvalidMerge(format!("interface tag '{tag}' not found")))
}

fn chain_nodes(edges: &[[usize; 2]]) -> Vec<usize> {
    edges.iter().flat_map(|e| [e[0], e[1]]).collect::<BTreeSet<_>>().into_iter().collect()
}

/// Every node of `nodes` must lie within `tol` of the polyline `edges`.
fn check_on_chain(nodes: &[Point], edges: &[[usize; 2]], other: &[Point], tol: f64) -> Result<()> {
    for &p in nodes {
        let d = edges
            .iter()
            .map(|e| geometry::point_segment_distance(p, other[e[0]], other[e[1]]).0)
            .fold(f64::INFINITY, f64::min);
        if d > tol {
            return Err(VemError::GeometricMismatch { x: p[0], y: p[1], distance: d, tol });
        }
    }
    Ok(())
}

/// Inserts `points` lying in the interior of edges of `tag` into the owning
/// elements of `mesh`. New nodes are appended; the tagged edges are split.
fn insert_hanging_nodes(mesh: &mut PolygonalMesh, tag: &str, points: &[Point], tol: f64) -> Result<()> {
    let mut owner: HashMap<(usize, usize), usize> = HashMap::new();
    for (e, el) in mesh.elements.iter().enumerate() {
        let n = el.vertices.len();
        for i in 0..n {
            owner.insert((el.vertices[i], el.vertices[(i + 1) % n]), e);
        }
    }
    let edges = mesh.boundary.get(tag).cloned().unwrap_or_default();
    let mut new_edges = Vec::with_capacity(edges.len());
    for [a, b] in edges {
        let (pa, pb) = (mesh.nodes[a], mesh.nodes[b]);
        let mut inside: Vec<(f64, Point)> = points
            .iter()
            .filter_map(|&p| {
                let (d, t) = geometry::point_segment_distance(p, pa, pb);
                let interior = d <= tol && geometry::dist(p, pa) > tol && geometry::dist(p, pb) > tol && t > 0.0 && t < 1.0;
                interior.then_some((t, p))
            })
            .collect();
        if inside.is_empty() {
            new_edges.push([a, b]);
            continue;
        }
        inside.sort_by(|x, y| x.0.total_cmp(&y.0));
        inside.dedup_by(|x, y| geometry::dist(x.1, y.1) <= tol);
        let ids: Vec<usize> = inside
            .iter()
            .map(|&(_, p)| {
                mesh.nodes.push(p);
                mesh.nodes.len() - 1
            })
            .collect();
        // the tagged edge is either a -> b or b -> a in its element
        let (e, forward) = match (owner.get(&(a, b)), owner.get(&(b, a))) {
            (Some(&e), _) => (e, true),
            (None, Some(&e)) => (e, false),
            _ => return Err(VemError::InvalidMerge(format!("interface edge ({a}, {b}) belongs to no element"))),
        };
        let verts = &mut mesh.elements[e].vertices;
        let n = verts.len();
        let (first, second) = if forward { (a, b) } else { (b, a) };
        let pos = (0..n)
            .find(|&i| verts[i] == first && verts[(i + 1) % n] == second)
            .expect("owner map is consistent");
        let mut seq = ids.clone();
        if !forward {
            seq.reverse();
        }
        for (k, id) in seq.into_iter().enumerate() {
            verts.insert(pos + 1 + k, id);
        }
        let mut prev = a;
        for id in ids {
            new_edges.push([prev, id]);
            prev = id;
        }
        new_edges.push([prev, b]);
    }
    mesh.boundary.insert(tag.to_string(), new_edges);
    Ok(())
}

/// Couples two independently meshed regions along coincident tagged edge
/// chains. Interface nodes of each side become vertices of the abutting
/// elements of the other side; nodes closer than `tol` are merged and the two
/// interface tags are dropped. Other boundary tags are kept, with equal names
/// combined.
pub fn merge_nonmatching_interface(
    mesh_a: &PolygonalMesh,
    mesh_b: &PolygonalMesh,
    interface_tag_a: &str,
    interface_tag_b: &str,
    tol: f64,
) -> Result<PolygonalMesh> {
    let chain_a = chain(mesh_a, interface_tag_a)?;
    let chain_b = chain(mesh_b, interface_tag_b)?;
    let pts_a: Vec<Point> = chain_nodes(chain_a).into_iter().map(|i| mesh_a.nodes[i]).collect();
    let pts_b: Vec<Point> = chain_nodes(chain_b).into_iter().map(|i| mesh_b.nodes[i]).collect();
    check_on_chain(&pts_a, chain_b, &mesh_b.nodes, tol)?;
    check_on_chain(&pts_b, chain_a, &mesh_a.nodes, tol)?;

    let mut a = mesh_a.clone();
    let mut b = mesh_b.clone();
    insert_hanging_nodes(&mut a, interface_tag_a, &pts_b, tol)?;
    insert_hanging_nodes(&mut b, interface_tag_b, &pts_a, tol)?;
    a.boundary.remove(interface_tag_a);
    b.boundary.remove(interface_tag_b);

    let offset = a.nodes.len();
    let mut nodes = a.nodes;
    nodes.extend_from_slice(&b.nodes);
    let mut elements = a.elements;
    elements.extend(b.elements.into_iter().map(|el| Element {
        vertices: el.vertices.into_iter().map(|v| v + offset).collect(),
        region: el.region,
    }));
    let mut boundary: BTreeMap<String, Vec<[usize; 2]>> = a.boundary;
    for (tag, edges) in b.boundary {
        boundary.entry(tag).or_default().extend(edges.into_iter().map(|e| [e[0] + offset, e[1] + offset]));
    }

    let rep = merge_close_nodes(&nodes, tol);
    for el in &mut elements {
        for v in &mut el.vertices {
            *v = rep[*v];
        }
        dedup_cyclic(&mut el.vertices);
    }
    for edges in boundary.values_mut() {
        for e in edges.iter_mut() {
            *e = [rep[e[0]], rep[e[1]]];
        }
        edges.retain(|e| e[0] != e[1]);
    }
    let mut merged = PolygonalMesh { nodes, elements, boundary };
    merged.compact_nodes();

    for (e, el) in merged.elements.iter().enumerate() {
        let poly = merged.element_vertices(e);
        if el.vertices.len() < 3 || geometry::signed_area(&poly) <= 0.0 || !geometry::is_simple(&poly, tol) {
            return Err(VemError::InvalidMerge(format!("element {e} is degenerate or self-intersecting after the merge")));
        }
    }
    merged.audit_topology().map_err(|err| VemError::InvalidMerge(err.to_string()))?;
    Ok(merged)
}

/// Rigidly rotates the elements of `region` about `center` and re-couples
/// them to the rest of the mesh. The rotated interface nodes must land on the
/// unrotated interface curve (for instance a regular polygon rotated by a
/// multiple of its symmetry angle).
pub fn rotate_region_mesh(mesh: &PolygonalMesh, region: &str, angle: f64, center: Point) -> Result<PolygonalMesh> {
    if !mesh.elements.iter().any(|e| e.region == region) {
        return Err(VemError::InvalidMesh(format!("region '{region}' has no elements")));
    }
    if angle == 0.0 {
        return Ok(mesh.clone());
    }
    let in_region: Vec<bool> = mesh.elements.iter().map(|e| e.region == region).collect();
    // directed edges of each side, to find edges shared between the two sides
    let mut side_of: HashMap<(usize, usize), bool> = HashMap::new();
    for (el, &inside) in mesh.elements.iter().zip(&in_region) {
        let n = el.vertices.len();
        for i in 0..n {
            side_of.insert((el.vertices[i], el.vertices[(i + 1) % n]), inside);
        }
    }
    let extract = |inside: bool, own_tag: &str| -> PolygonalMesh {
        let mut sub = PolygonalMesh {
            nodes: mesh.nodes.clone(),
            elements: mesh.elements.iter().zip(&in_region).filter(|(_, &r)| r == inside).map(|(e, _)| e.clone()).collect(),
            boundary: BTreeMap::new(),
        };
        let mut interface = Vec::new();
        for el in &sub.elements {
            let n = el.vertices.len();
            for i in 0..n {
                let (p, q) = (el.vertices[i], el.vertices[(i + 1) % n]);
                if side_of.get(&(q, p)) == Some(&!inside) {
                    interface.push([p, q]);
                }
            }
        }
        let used: BTreeSet<usize> = sub.elements.iter().flat_map(|e| e.vertices.iter().copied()).collect();
        for (tag, edges) in &mesh.boundary {
            let own: Vec<[usize; 2]> = edges
                .iter()
                .filter(|e| used.contains(&e[0]) && used.contains(&e[1]) && side_of.get(&(e[0], e[1])) == Some(&inside))
                .copied()
                .collect();
            if !own.is_empty() {
                sub.boundary.insert(tag.clone(), own);
            }
        }
        sub.boundary.insert(own_tag.to_string(), interface);
        sub.compact_nodes();
        sub
    };
    let mut rotated = extract(true, INTERFACE_OWN);
    let rest = extract(false, INTERFACE_OTHER);
    for p in &mut rotated.nodes {
        *p = geometry::rotate(*p, angle, center);
    }
    if rest.elements.is_empty() {
        rotated.boundary.remove(INTERFACE_OWN);
        return Ok(rotated);
    }
    let tol = mesh.default_merge_tol();
    merge_nonmatching_interface(&rest, &rotated, INTERFACE_OTHER, INTERFACE_OWN, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_quad_mesh;

    #[test]
    fn coarse_fine_squares_share_a_midpoint() {
        let left = generate_quad_mesh([0.0, 1.0], [0.0, 1.0], 1, 1, "l").unwrap();
        let right = generate_quad_mesh([1.0, 2.0], [0.0, 1.0], 2, 2, "r").unwrap();
        let m = merge_nonmatching_interface(&left, &right, "right", "left", 1e-9).unwrap();
        assert_eq!(m.num_elements(), 5);
        assert_eq!(m.elements[0].vertices.len(), 5);
        assert_eq!(m.num_nodes(), 4 + 9 - 2);
        let mid = m.elements[0].vertices.iter().map(|&v| m.nodes[v]).any(|p| p == [1.0, 0.5]);
        assert!(mid);
        assert!(!m.boundary.contains_key("right") || m.boundary["right"].iter().all(|e| m.nodes[e[0]][0] == 2.0));
    }

    #[test]
    fn matching_interfaces_only_merge_nodes() {
        let a = generate_quad_mesh([0.0, 1.0], [0.0, 1.0], 2, 2, "a").unwrap();
        let b = generate_quad_mesh([1.0, 2.0], [0.0, 1.0], 2, 2, "b").unwrap();
        let m = merge_nonmatching_interface(&a, &b, "right", "left", 1e-9).unwrap();
        assert_eq!(m.num_nodes(), 9 + 9 - 3);
        assert!(m.elements.iter().all(|e| e.vertices.len() == 4));
    }

    #[test]
    fn mismatch_is_reported() {
        let a = generate_quad_mesh([0.0, 1.0], [0.0, 1.0], 1, 1, "a").unwrap();
        let b = generate_quad_mesh([1.1, 2.0], [0.0, 1.0], 1, 1, "b").unwrap();
        assert!(matches!(
            merge_nonmatching_interface(&a, &b, "right", "left", 1e-9),
            Err(VemError::GeometricMismatch { .. })
        ));
    }

    #[test]
    fn rotation_by_zero_and_quarter_turn() {
        let outer = generate_quad_mesh([0.0, 3.0], [0.0, 1.0], 3, 1, "o").unwrap();
        let mut inner = generate_quad_mesh([0.0, 3.0], [1.0, 4.0], 3, 3, "i").unwrap();
        inner.rename_boundary_tag("bottom", "seam");
        let m = merge_nonmatching_interface(&outer, &inner, "top", "seam", 1e-9).unwrap();
        assert_eq!(rotate_region_mesh(&m, "i", 0.0, [1.5, 2.5]).unwrap(), m);

        // a square block rotated a quarter turn about its own center maps its
        // seam onto its left side, so the seam no longer matches
        assert!(rotate_region_mesh(&m, "i", std::f64::consts::FRAC_PI_2, [1.5, 2.5]).is_err());
    }

    #[test]
    fn centre_cell_rotates_onto_itself() {
        let mut m = generate_quad_mesh([0.0, 3.0], [0.0, 3.0], 3, 3, "o").unwrap();
        m.elements[4].region = "c".into();
        let r = rotate_region_mesh(&m, "c", std::f64::consts::FRAC_PI_2, [1.5, 1.5]).unwrap();
        assert_eq!(r.num_elements(), 9);
        assert_eq!(r.num_nodes(), 16);
        r.audit_topology().unwrap();
        let areas = |m: &PolygonalMesh| {
            let mut a: Vec<f64> = (0..m.num_elements()).map(|e| m.element_geometry(e).unwrap().area).collect();
            a.sort_by(f64::total_cmp);
            a
        };
        for (x, y) in areas(&m).iter().zip(areas(&r)) {
            assert!((x - y).abs() < 1e-12);
        }
        assert_eq!(r.boundary.keys().collect::<Vec<_>>(), m.boundary.keys().collect::<Vec<_>>());
    }
}
