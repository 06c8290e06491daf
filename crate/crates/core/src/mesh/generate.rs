//! Structured quadrilateral generators.

use std::collections::BTreeMap;

use super::{Element, PolygonalMesh};
use crate::error::{Result, VemError};
use crate::geometry::Point;

fn structured(
    nx: usize,
    ny: usize,
    region: &str,
    node_at: impl Fn(usize, usize) -> Point,
    tags: [&str; 4],
) -> PolygonalMesh {
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            nodes.push(node_at(i, j));
        }
    }
    let mut elements = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            elements.push(Element {
                vertices: vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)],
                region: region.to_string(),
            });
        }
    }
    // edges oriented counter-clockwise around the parameter rectangle
    let [bottom, right, top, left] = tags;
    let mut boundary: BTreeMap<String, Vec<[usize; 2]>> = BTreeMap::new();
    boundary.insert(bottom.into(), (0..nx).map(|i| [id(i, 0), id(i + 1, 0)]).collect());
    boundary.insert(right.into(), (0..ny).map(|j| [id(nx, j), id(nx, j + 1)]).collect());
    boundary.insert(top.into(), (0..nx).rev().map(|i| [id(i + 1, ny), id(i, ny)]).collect());
    boundary.insert(left.into(), (0..ny).rev().map(|j| [id(0, j + 1), id(0, j)]).collect());
    PolygonalMesh { nodes, elements, boundary }
}

/// `nx × ny` rectangles over `x_range × y_range`, boundary tagged
/// left/right/top/bottom.
pub fn generate_quad_mesh(x_range: [f64; 2], y_range: [f64; 2], nx: usize, ny: usize, region: &str) -> Result<PolygonalMesh> {
    if nx == 0 || ny == 0 {
        return Err(VemError::InvalidDomain("nx and ny must be at least 1".into()));
    }
    let finite = x_range.iter().chain(&y_range).all(|v| v.is_finite());
    if !finite || !(x_range[1] > x_range[0]) || !(y_range[1] > y_range[0]) {
        return Err(VemError::InvalidDomain(format!("degenerate range {x_range:?} x {y_range:?}")));
    }
    let lerp = |r: [f64; 2], k: usize, n: usize| if k == n { r[1] } else { r[0] + (r[1] - r[0]) * k as f64 / n as f64 };
    Ok(structured(
        nx,
        ny,
        region,
        |i, j| [lerp(x_range, i, nx), lerp(y_range, j, ny)],
        ["bottom", "right", "top", "left"],
    ))
}

/// Quadrilaterals on the annular sector `r_inner ≤ r ≤ r_outer`,
/// `theta[0] ≤ θ ≤ theta[1]`, `nr` cells radially and `ntheta` around.
/// Tags: inner, outer, start (θ = theta[0]) and end (θ = theta[1]).
pub fn generate_polar_quad_mesh(
    r_inner: f64,
    r_outer: f64,
    theta: [f64; 2],
    nr: usize,
    ntheta: usize,
    region: &str,
) -> Result<PolygonalMesh> {
    if nr == 0 || ntheta == 0 {
        return Err(VemError::InvalidDomain("nr and ntheta must be at least 1".into()));
    }
    if !(r_inner > 0.0 && r_outer > r_inner && theta[1] > theta[0] && theta[1] - theta[0] < 2.0 * std::f64::consts::PI) {
        return Err(VemError::InvalidDomain(format!("invalid annular sector r=[{r_inner}, {r_outer}], theta={theta:?}")));
    }
    let node_at = |i: usize, j: usize| {
        let r = r_inner + (r_outer - r_inner) * i as f64 / nr as f64;
        let t = theta[0] + (theta[1] - theta[0]) * j as f64 / ntheta as f64;
        let (mut s, mut c) = t.sin_cos();
        if c.abs() < 1e-15 {
            c = 0.0;
        }
        if s.abs() < 1e-15 {
            s = 0.0;
        }
        [r * c, r * s]
    };
    // parameter rectangle: i radial (x-like), j angular (y-like)
    Ok(structured(nr, ntheta, region, node_at, ["start", "outer", "end", "inner"]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_cell() {
        let m = generate_quad_mesh([0.0, 1.0], [0.0, 1.0], 1, 1, "a").unwrap();
        assert_eq!((m.num_elements(), m.num_nodes()), (1, 4));
        assert_eq!(m.boundary.values().map(Vec::len).sum::<usize>(), 4);
    }

    #[test]
    fn counts_and_area() {
        let m = generate_quad_mesh([0.0, 1.0], [0.0, 1.0], 2, 2, "a").unwrap();
        assert_eq!((m.num_elements(), m.num_nodes()), (4, 9));
        let m = generate_quad_mesh([0.0, 1.0], [0.0, 2.0], 3, 5, "a").unwrap();
        assert!((m.total_area() - 2.0).abs() < 1e-12);
        m.validate().unwrap();
        m.audit_topology().unwrap();
    }

    #[test]
    fn degenerate_range_rejected() {
        assert!(matches!(generate_quad_mesh([1.0, 1.0], [0.0, 1.0], 2, 2, "a"), Err(VemError::InvalidDomain(_))));
        assert!(generate_quad_mesh([0.0, 1.0], [0.0, 1.0], 0, 2, "a").is_err());
    }

    #[test]
    fn polar_quarter_annulus() {
        let m = generate_polar_quad_mesh(20.0, 60.0, [0.0, std::f64::consts::FRAC_PI_2], 56, 88, "a").unwrap();
        assert_eq!(m.num_nodes(), 5073);
        m.validate().unwrap();
        m.audit_topology().unwrap();
        for &n in &m.boundary_nodes("end").unwrap() {
            assert_eq!(m.nodes[n][0], 0.0);
        }
        for &n in &m.boundary_nodes("start").unwrap() {
            assert_eq!(m.nodes[n][1], 0.0);
        }
        for &n in &m.boundary_nodes("inner").unwrap() {
            assert!((m.nodes[n][0].hypot(m.nodes[n][1]) - 20.0).abs() < 1e-12);
        }
    }
}
