//! Planar polygon helpers shared by the mesh generators, the quadrature
//! rules and the element kernels.

pub type Point = [f64; 2];

#[inline]
pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Signed shoelace area, positive for counter-clockwise vertex order.
pub fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    let mut a = 0.0;
    for i in 0..n {
        a += cross(poly[i], poly[(i + 1) % n]);
    }
    0.5 * a
}

/// Area-weighted centroid. Returns `None` for zero-area polygons.
pub fn centroid(poly: &[Point]) -> Option<Point> {
    let n = poly.len();
    let area = signed_area(poly);
    if area == 0.0 || !area.is_finite() {
        return None;
    }
    // shift to the first vertex to limit cancellation on far-from-origin polygons
    let o = poly[0];
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let p = sub(poly[i], o);
        let q = sub(poly[(i + 1) % n], o);
        let c = cross(p, q);
        cx += (p[0] + q[0]) * c;
        cy += (p[1] + q[1]) * c;
    }
    Some([o[0] + cx / (6.0 * area), o[1] + cy / (6.0 * area)])
}

/// Maximum distance between any two vertices.
pub fn diameter(poly: &[Point]) -> f64 {
    let mut h: f64 = 0.0;
    for i in 0..poly.len() {
        for j in (i + 1)..poly.len() {
            h = h.max(dist(poly[i], poly[j]));
        }
    }
    h
}

/// Outward unit normal and length of the edge `a -> b` of a CCW polygon.
#[inline]
pub fn edge_normal(a: Point, b: Point) -> (Point, f64) {
    let d = sub(b, a);
    let len = d[0].hypot(d[1]);
    ([d[1] / len, -d[0] / len], len)
}

/// Crossing-number point-in-polygon test. Points exactly on the boundary
/// may be reported either way.
pub fn point_in_polygon(p: Point, poly: &[Point]) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Distance from `p` to the segment `a-b` and the clamped segment parameter.
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> (f64, f64) {
    let d = sub(b, a);
    let len2 = d[0] * d[0] + d[1] * d[1];
    if len2 == 0.0 {
        return (dist(p, a), 0.0);
    }
    let t = ((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2;
    let tc = t.clamp(0.0, 1.0);
    let q = [a[0] + tc * d[0], a[1] + tc * d[1]];
    (dist(p, q), t)
}

/// True when `p` lies inside or on the boundary of `poly` (within `tol`).
pub fn point_in_or_on_polygon(p: Point, poly: &[Point], tol: f64) -> bool {
    if point_in_polygon(p, poly) {
        return true;
    }
    let n = poly.len();
    (0..n).any(|i| point_segment_distance(p, poly[i], poly[(i + 1) % n]).0 <= tol)
}

fn segments_properly_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = cross(sub(b, a), sub(c, a));
    let d2 = cross(sub(b, a), sub(d, a));
    let d3 = cross(sub(d, c), sub(a, c));
    let d4 = cross(sub(d, c), sub(b, c));
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// Checks that a closed polygon has no repeated vertex and no two
/// non-adjacent edges crossing each other. O(n²), intended for elements.
pub fn is_simple(poly: &[Point], tol: f64) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if dist(poly[i], poly[j]) <= tol {
                return false;
            }
        }
    }
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        for j in (i + 1)..n {
            if j == i || (j + 1) % n == i || (i + 1) % n == j {
                continue;
            }
            let (c, d) = (poly[j], poly[(j + 1) % n]);
            if segments_properly_intersect(a, b, c, d) {
                return false;
            }
        }
    }
    // a vertex touching a non-adjacent edge also makes the polygon non-simple
    for i in 0..n {
        for j in 0..n {
            let k = (j + 1) % n;
            if i == j || i == k {
                continue;
            }
            let (dd, t) = point_segment_distance(poly[i], poly[j], poly[k]);
            if dd <= tol && t > 0.0 && t < 1.0 {
                return false;
            }
        }
    }
    true
}

/// Rotates `p` by `angle` radians about `center`.
pub fn rotate(p: Point, angle: f64, center: Point) -> Point {
    let (s, c) = angle.sin_cos();
    let d = sub(p, center);
    [center[0] + c * d[0] - s * d[1], center[1] + s * d[0] + c * d[1]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_area_centroid_diameter() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert_eq!(signed_area(&sq), 1.0);
        assert_eq!(centroid(&sq).unwrap(), [0.5, 0.5]);
        assert!((diameter(&sq) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn clockwise_is_negative() {
        let tri = [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]];
        assert!(signed_area(&tri) < 0.0);
    }

    #[test]
    fn bowtie_is_not_simple() {
        let bow = [[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(!is_simple(&bow, 1e-12));
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert!(is_simple(&sq, 1e-12));
    }

    #[test]
    fn collinear_vertex_is_still_simple() {
        let p = [[0.0, 0.0], [1.0, 0.0], [1.0, 0.5], [1.0, 1.0], [0.0, 1.0]];
        assert!(is_simple(&p, 1e-12));
    }

    #[test]
    fn point_location() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert!(point_in_polygon([0.3, 0.7], &sq));
        assert!(!point_in_polygon([1.3, 0.7], &sq));
        assert!(point_in_or_on_polygon([1.0, 0.7], &sq, 1e-12));
    }

    #[test]
    fn rotation_quarter_turn() {
        let p = rotate([1.0, 0.0], std::f64::consts::FRAC_PI_2, [0.0, 0.0]);
        assert!((p[0]).abs() < 1e-15 && (p[1] - 1.0).abs() < 1e-15);
    }
}
