//! Integration rules over polygons (centroid fan + symmetric triangle rules)
//! and over straight edges (Gauss–Legendre).

use crate::error::{Result, VemError};
use crate::geometry::{self, Point};

pub const MAX_POLYGON_DEGREE: usize = 8;

#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub exact_degree: usize,
}

impl QuadratureRule {
    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&p, &w)| w * f(p)).sum()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Gauss–Legendre rule on a segment. `params` are the positions in [0, 1]
/// measured from `p0`, handy for evaluating linear traces.
#[derive(Clone, Debug)]
pub struct EdgeRule {
    pub points: Vec<Point>,
    pub params: Vec<f64>,
    pub weights: Vec<f64>,
    pub exact_degree: usize,
}

impl EdgeRule {
    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&p, &w)| w * f(p)).sum()
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            // p0 = P_n(z), p1 = P_{n-1}(z)
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

pub fn edge_rule(p0: Point, p1: Point, degree: usize) -> Result<EdgeRule> {
    let len = geometry::dist(p0, p1);
    if !(len > 0.0) {
        return Err(VemError::Quadrature("edge endpoints coincide".into()));
    }
    let n = (degree + 2) / 2;
    let (x, w) = gauss_legendre(n.max(1));
    let params: Vec<f64> = x.iter().map(|&s| 0.5 * (s + 1.0)).collect();
    let points = params.iter().map(|&t| [p0[0] + t * (p1[0] - p0[0]), p0[1] + t * (p1[1] - p0[1])]).collect();
    let weights = w.iter().map(|&wi| 0.5 * len * wi).collect();
    Ok(EdgeRule { points, params, weights, exact_degree: 2 * n - 1 })
}

/// Barycentric orbit of a symmetric triangle rule.
enum Orbit {
    Centroid(f64),
    /// (a, a, 1 - 2a) and its rotations
    S21(f64, f64),
    /// all permutations of (a, b, 1 - a - b)
    S111(f64, f64, f64),
}

fn triangle_orbits(degree: usize) -> (&'static [Orbit], usize) {
    use Orbit::*;
    static D1: [Orbit; 1] = [Centroid(1.0)];
    static D2: [Orbit; 1] = [S21(1.0 / 6.0, 1.0 / 3.0)];
    static D4: [Orbit; 2] = [
        S21(0.445948490915965, 0.223381589678011),
        S21(0.091576213509771, 0.109951743655322),
    ];
    static D5: [Orbit; 3] = [
        Centroid(0.225),
        S21(0.470142064105115, 0.132394152788506),
        S21(0.101286507323456, 0.125939180544827),
    ];
    static D6: [Orbit; 3] = [
        S21(0.249286745170910, 0.116786275726379),
        S21(0.063089014491502, 0.050844906370207),
        S111(0.053145049844817, 0.310352451033784, 0.082851075618374),
    ];
    static D8: [Orbit; 5] = [
        Centroid(0.144315607677787),
        S21(0.459292588292723, 0.095091634267285),
        S21(0.170569307751760, 0.103217370534718),
        S21(0.050547228317031, 0.032458497623198),
        S111(0.008394777409958, 0.263112829634638, 0.027230314174435),
    ];
    match degree {
        0 | 1 => (&D1, 1),
        2 => (&D2, 2),
        3 | 4 => (&D4, 4),
        5 => (&D5, 5),
        6 => (&D6, 6),
        _ => (&D8, 8),
    }
}

fn push_triangle(rule: &mut QuadratureRule, orbits: &[Orbit], t: [Point; 3]) {
    let area = 0.5 * geometry::cross(geometry::sub(t[1], t[0]), geometry::sub(t[2], t[0]));
    let mut push = |l: [f64; 3], w: f64| {
        let x = l[0] * t[0][0] + l[1] * t[1][0] + l[2] * t[2][0];
        let y = l[0] * t[0][1] + l[1] * t[1][1] + l[2] * t[2][1];
        rule.points.push([x, y]);
        rule.weights.push(w * area);
    };
    for orbit in orbits {
        match *orbit {
            Orbit::Centroid(w) => push([1.0 / 3.0; 3], w),
            Orbit::S21(a, w) => {
                let c = 1.0 - 2.0 * a;
                push([a, a, c], w);
                push([a, c, a], w);
                push([c, a, a], w);
            }
            Orbit::S111(a, b, w) => {
                let c = 1.0 - a - b;
                for l in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
                    push(l, w);
                }
            }
        }
    }
}

/// Triangulates a simple CCW polygon by ear clipping. Collinear vertices are
/// dropped without emitting a (zero-area) triangle.
fn ear_clip(poly: &[Point]) -> Vec<[Point; 3]> {
    let mut idx: Vec<usize> = (0..poly.len()).collect();
    let mut tris = Vec::with_capacity(poly.len().saturating_sub(2));
    let scale = geometry::diameter(poly).powi(2);
    let mut guard = 0;
    while idx.len() > 3 && guard < 4 * poly.len() * poly.len() {
        guard += 1;
        let n = idx.len();
        let mut clipped = false;
        for k in 0..n {
            let (ia, ib, ic) = (idx[(k + n - 1) % n], idx[k], idx[(k + 1) % n]);
            let (a, b, c) = (poly[ia], poly[ib], poly[ic]);
            let turn = geometry::cross(geometry::sub(b, a), geometry::sub(c, b));
            if turn.abs() <= 1e-14 * scale {
                idx.remove(k);
                clipped = true;
                break;
            }
            if turn < 0.0 {
                continue;
            }
            let blocked = idx.iter().any(|&j| {
                if j == ia || j == ib || j == ic {
                    return false;
                }
                let p = poly[j];
                geometry::cross(geometry::sub(b, a), geometry::sub(p, a)) >= 0.0
                    && geometry::cross(geometry::sub(c, b), geometry::sub(p, b)) >= 0.0
                    && geometry::cross(geometry::sub(a, c), geometry::sub(p, c)) >= 0.0
            });
            if !blocked {
                tris.push([a, b, c]);
                idx.remove(k);
                clipped = true;
                break;
            }
        }
        if !clipped {
            break;
        }
    }
    if idx.len() == 3 {
        tris.push([poly[idx[0]], poly[idx[1]], poly[idx[2]]]);
    }
    tris
}

/// Splits a polygon into triangles: a fan from the centroid when every fan
/// triangle is positive, ear clipping otherwise.
pub fn triangulate(poly: &[Point]) -> Result<Vec<[Point; 3]>> {
    let c = geometry::centroid(poly).ok_or_else(|| VemError::Quadrature("zero-area polygon".into()))?;
    let n = poly.len();
    let fan: Vec<[Point; 3]> = (0..n).map(|i| [c, poly[i], poly[(i + 1) % n]]).collect();
    if fan.iter().all(|t| geometry::cross(geometry::sub(t[1], t[0]), geometry::sub(t[2], t[0])) > 0.0) {
        return Ok(fan);
    }
    let tris = ear_clip(poly);
    let area: f64 = tris.iter().map(|t| geometry::signed_area(t)).sum();
    let expect = geometry::signed_area(poly);
    if (area - expect).abs() > 1e-10 * expect.abs() {
        return Err(VemError::Quadrature("polygon could not be triangulated".into()));
    }
    Ok(tris)
}

/// Rule integrating bivariate polynomials of total degree ≤ `degree` exactly
/// over a simple counter-clockwise polygon.
pub fn polygon_rule(poly: &[Point], degree: usize) -> Result<QuadratureRule> {
    if degree > MAX_POLYGON_DEGREE {
        return Err(VemError::Quadrature(format!("degree {degree} exceeds the supported maximum {MAX_POLYGON_DEGREE}")));
    }
    if poly.len() < 3 || geometry::signed_area(poly) <= 0.0 {
        return Err(VemError::Quadrature("polygon must be counter-clockwise with positive area".into()));
    }
    if !geometry::is_simple(poly, 0.0) {
        return Err(VemError::Quadrature("polygon is not simple".into()));
    }
    polygon_rule_unchecked(poly, degree)
}

/// Same as [`polygon_rule`] without the O(n²) simplicity check; for element
/// kernels on meshes that were already validated.
pub fn polygon_rule_unchecked(poly: &[Point], degree: usize) -> Result<QuadratureRule> {
    let (orbits, exact) = triangle_orbits(degree);
    let tris = triangulate(poly)?;
    let per = orbits
        .iter()
        .map(|o| match o {
            Orbit::Centroid(_) => 1,
            Orbit::S21(..) => 3,
            Orbit::S111(..) => 6,
        })
        .sum::<usize>();
    let mut rule = QuadratureRule {
        points: Vec::with_capacity(per * tris.len()),
        weights: Vec::with_capacity(per * tris.len()),
        exact_degree: exact,
    };
    for t in tris {
        push_triangle(&mut rule, orbits, t);
    }
    Ok(rule)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// ∫_P x^a y^b by the divergence theorem, each edge integrated with a
    /// Gauss rule of sufficient order.
    fn exact_monomial_integral(poly: &[Point], a: i32, b: i32) -> f64 {
        let n = poly.len();
        let mut total = 0.0;
        for i in 0..n {
            let (p, q) = (poly[i], poly[(i + 1) % n]);
            let (nrm, _) = geometry::edge_normal(p, q);
            let rule = edge_rule(p, q, (a + b + 1) as usize + 1).unwrap();
            total += rule.integrate(|x| x[0].powi(a + 1) / (a + 1) as f64 * x[1].powi(b)) * nrm[0];
        }
        total
    }

    fn pentagon() -> Vec<Point> {
        vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 2.0], [0.0, 1.0]]
    }

    #[test]
    fn gauss_legendre_weights_sum_to_two() {
        for n in 1..10 {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn edge_rule_examples() {
        let r = edge_rule([0.0, 0.0], [1.0, 0.0], 0).unwrap();
        assert!((r.integrate(|_| 1.0) - 1.0).abs() < 1e-15);
        let r = edge_rule([0.0, 0.0], [0.0, 2.0], 1).unwrap();
        assert!((r.integrate(|p| p[1]) - 2.0).abs() < 1e-14);
        // ∫ (x+y)² along (1,1)-(4,5): x+y = 2 + 7t, length 5, closed form 515/3
        let r = edge_rule([1.0, 1.0], [4.0, 5.0], 2).unwrap();
        assert!((r.integrate(|p| (p[0] + p[1]).powi(2)) - 515.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn coincident_edge_is_error() {
        assert!(edge_rule([1.0, 1.0], [1.0, 1.0], 2).is_err());
    }

    #[test]
    fn unit_square_measure() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let r = polygon_rule(&sq, 0).unwrap();
        assert!((r.integrate(|_| 1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pentagon_x2y_matches_closed_form() {
        let r = polygon_rule(&pentagon(), 3).unwrap();
        assert!((r.integrate(|p| p[0] * p[0] * p[1]) - 43.0 / 15.0).abs() < 1e-12);
    }

    #[test]
    fn scaled_first_moments_vanish() {
        let poly = pentagon();
        let c = geometry::centroid(&poly).unwrap();
        let h = geometry::diameter(&poly);
        let r = polygon_rule(&poly, 1).unwrap();
        assert!(r.integrate(|p| (p[0] - c[0]) / h).abs() < 1e-14);
        assert!(r.integrate(|p| (p[1] - c[1]) / h).abs() < 1e-14);
    }

    #[test]
    fn monomial_exactness_for_every_degree() {
        let polys: Vec<Vec<Point>> = vec![
            pentagon(),
            vec![[0.3, -0.2], [1.7, 0.1], [2.2, 1.4], [1.0, 2.3], [-0.4, 1.1]],
            // non-convex: forces ear clipping
            vec![[0.0, 0.0], [3.0, 0.0], [3.0, 3.0], [2.0, 3.0], [2.0, 0.5], [0.3, 0.6], [0.0, 3.0]],
        ];
        for poly in &polys {
            for degree in 0..=MAX_POLYGON_DEGREE {
                let rule = polygon_rule(poly, degree).unwrap();
                assert!(rule.exact_degree >= degree);
                assert!(rule.weights.iter().all(|&w| w > 0.0));
                for total in 0..=degree as i32 {
                    for a in 0..=total {
                        let b = total - a;
                        let exact = exact_monomial_integral(poly, a, b);
                        let got = rule.integrate(|p| p[0].powi(a) * p[1].powi(b));
                        assert!(
                            (got - exact).abs() <= 1e-12 * exact.abs().max(1.0),
                            "degree {degree}, x^{a} y^{b}: {got} vs {exact}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn collinear_vertex_triangulates() {
        let poly = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0]];
        let r = polygon_rule(&poly, 4).unwrap();
        assert!((r.integrate(|_| 1.0) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn self_intersecting_is_rejected() {
        let bow = [[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(polygon_rule(&bow, 2).is_err());
        assert!(polygon_rule(&pentagon(), 9).is_err());
    }
}
