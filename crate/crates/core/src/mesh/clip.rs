//! Half-plane clipping of convex polygons and of multi-ring regions.
//!
//! A region is a set of rings with the interior on the left of every edge:
//! outer boundaries counter-clockwise, holes clockwise. Clipping a region by
//! a line keeps the rings that lie inside, cuts the others into chains that
//! start where the boundary enters the half-plane and end where it leaves,
//! and re-links the chains along the cutting line.

use crate::geometry::{self, Point};

/// Points with n·(x − p0) ≤ 0 are inside.
#[derive(Clone, Copy, Debug)]
pub(crate) struct HalfPlane {
    pub p0: Point,
    pub n: Point,
}

impl HalfPlane {
    #[inline]
    fn side(&self, p: Point) -> f64 {
        self.n[0] * (p[0] - self.p0[0]) + self.n[1] * (p[1] - self.p0[1])
    }

    /// Position along the line, increasing in the direction that keeps the
    /// inside on the left.
    #[inline]
    fn param(&self, p: Point) -> f64 {
        -self.n[1] * (p[0] - self.p0[0]) + self.n[0] * (p[1] - self.p0[1])
    }

    fn crossing(&self, a: Point, b: Point, sa: f64, sb: f64) -> Point {
        let t = sa / (sa - sb);
        [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
    }

    /// Normalizes `n` so that `side` returns distances.
    pub fn new(p0: Point, n: Point) -> Self {
        let len = n[0].hypot(n[1]);
        HalfPlane { p0, n: [n[0] / len, n[1] / len] }
    }
}

/// Sutherland–Hodgman step for a convex subject polygon.
pub(crate) fn clip_convex(poly: &[Point], hp: &HalfPlane) -> Vec<Point> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let (sa, sb) = (hp.side(a), hp.side(b));
        if sa <= 0.0 {
            out.push(a);
        }
        if (sa < 0.0 && sb > 0.0) || (sa > 0.0 && sb < 0.0) {
            out.push(hp.crossing(a, b, sa, sb));
        }
    }
    out
}

struct Chain {
    points: Vec<Point>,
    t_entry: f64,
    t_exit: f64,
}

/// Clips a region by a half-plane. `eps` is the distance below which a
/// vertex counts as lying on the line. Returns `None` when the chains cannot
/// be linked consistently (degenerate input).
pub(crate) fn clip_rings(rings: &[Vec<Point>], hp: &HalfPlane, eps: f64) -> Option<Vec<Vec<Point>>> {
    let mut out = Vec::new();
    let mut chains: Vec<Chain> = Vec::new();
    for ring in rings {
        let n = ring.len();
        let s: Vec<f64> = ring
            .iter()
            .map(|&p| {
                let v = hp.side(p);
                if v.abs() <= eps {
                    0.0
                } else {
                    v
                }
            })
            .collect();
        if s.iter().all(|&v| v <= 0.0) {
            out.push(ring.clone());
            continue;
        }
        let Some(start) = s.iter().position(|&v| v > 0.0) else { continue };
        let mut current: Option<(Vec<Point>, f64, bool)> = None;
        for k in 1..=n {
            let (ip, ic) = ((start + k - 1) % n, (start + k) % n);
            let (sp, sc) = (s[ip], s[ic]);
            let (p, c) = (ring[ip], ring[ic]);
            if sp > 0.0 && sc <= 0.0 {
                let entry = if sc == 0.0 { c } else { hp.crossing(p, c, sp, sc) };
                let mut pts = vec![entry];
                if sc < 0.0 {
                    pts.push(c);
                }
                current = Some((pts, hp.param(entry), sc < 0.0));
            } else if sp <= 0.0 && sc <= 0.0 {
                if let Some((pts, _, interior)) = current.as_mut() {
                    pts.push(c);
                    *interior |= sc < 0.0;
                }
            } else if sp <= 0.0 && sc > 0.0 {
                if let Some((mut pts, t_entry, interior)) = current.take() {
                    let exit = if sp == 0.0 { p } else { hp.crossing(p, c, sp, sc) };
                    if sp != 0.0 {
                        pts.push(exit);
                    }
                    if interior {
                        chains.push(Chain { points: pts, t_entry, t_exit: hp.param(exit) });
                    }
                }
            }
        }
    }

    let tol = eps.max(1e-300);
    let mut used = vec![false; chains.len()];
    for c0 in 0..chains.len() {
        if used[c0] {
            continue;
        }
        let mut ring = Vec::new();
        let mut c = c0;
        loop {
            used[c] = true;
            ring.extend_from_slice(&chains[c].points);
            let tx = chains[c].t_exit;
            let next = (0..chains.len())
                .filter(|&j| !used[j] || j == c0)
                .filter(|&j| chains[j].t_entry - tx >= -tol)
                .min_by(|&a, &b| (chains[a].t_entry - tx).total_cmp(&(chains[b].t_entry - tx)))?;
            if next == c0 {
                break;
            }
            c = next;
        }
        out.push(ring);
    }
    Some(out)
}

/// Removes consecutive points closer than `tol` and drops rings whose area
/// is negligible.
pub(crate) fn clean_rings(rings: Vec<Vec<Point>>, tol: f64, min_area: f64) -> Vec<Vec<Point>> {
    rings
        .into_iter()
        .filter_map(|ring| {
            let mut r: Vec<Point> = Vec::with_capacity(ring.len());
            for p in ring {
                if r.last().is_none_or(|&q| geometry::dist(p, q) > tol) {
                    r.push(p);
                }
            }
            while r.len() > 1 && geometry::dist(r[0], *r.last().unwrap()) <= tol {
                r.pop();
            }
            (r.len() >= 3 && geometry::signed_area(&r).abs() > min_area).then_some(r)
        })
        .collect()
}

/// Intersection of a region with a convex CCW polygon. Holes that end up
/// strictly inside the convex polygon are opened by splitting the result
/// along a horizontal line through the hole, so every returned ring is a
/// simple counter-clockwise polygon.
pub(crate) fn intersect_convex(rings: &[Vec<Point>], convex: &[Point], eps: f64, min_area: f64) -> Option<Vec<Vec<Point>>> {
    let n = convex.len();
    let mut current = rings.to_vec();
    for i in 0..n {
        let (a, b) = (convex[i], convex[(i + 1) % n]);
        let (nrm, len) = geometry::edge_normal(a, b);
        if len <= eps {
            continue;
        }
        current = clip_rings(&current, &HalfPlane { p0: a, n: nrm }, eps)?;
        current = clean_rings(current, eps, min_area);
        if current.is_empty() {
            return Some(current);
        }
    }
    split_holes(current, eps, min_area, 0)
}

fn split_holes(rings: Vec<Vec<Point>>, eps: f64, min_area: f64, depth: usize) -> Option<Vec<Vec<Point>>> {
    let Some(hole) = rings.iter().find(|r| geometry::signed_area(r) < 0.0) else {
        return Some(rings);
    };
    if depth > 16 {
        return None;
    }
    let (lo, hi) = hole.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p[1]), hi.max(p[1])));
    let yc = 0.5 * (lo + hi);
    let mut out = Vec::new();
    for n in [[0.0, 1.0], [0.0, -1.0]] {
        let half = clip_rings(&rings, &HalfPlane { p0: [0.0, yc], n }, eps)?;
        out.extend(split_holes(clean_rings(half, eps, min_area), eps, min_area, depth + 1)?);
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn total_area(rings: &[Vec<Point>]) -> f64 {
        rings.iter().map(|r| geometry::signed_area(r)).sum()
    }

    #[test]
    fn convex_clip_halves_square() {
        let sq = [[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]];
        let out = clip_convex(&sq, &HalfPlane::new([1.0, 0.0], [1.0, 0.0]));
        assert!((geometry::signed_area(&out) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn clipping_a_u_shape_gives_two_pieces() {
        // U opening upwards; cutting off everything below y = 1 leaves two prongs
        let u = vec![
            [0.0, 0.0],
            [3.0, 0.0],
            [3.0, 3.0],
            [2.0, 3.0],
            [2.0, 0.5],
            [1.0, 0.5],
            [1.0, 3.0],
            [0.0, 3.0],
        ];
        let out = clip_rings(&[u], &HalfPlane::new([0.0, 1.0], [0.0, -1.0]), 1e-12).unwrap();
        assert_eq!(out.len(), 2);
        for r in &out {
            assert!((geometry::signed_area(r) - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn region_with_hole_is_split_into_simple_pieces() {
        let outer = vec![[0.0, 0.0], [4.0, 0.0], [4.0, 4.0], [0.0, 4.0]];
        let hole = vec![[1.0, 1.0], [1.0, 2.0], [2.0, 2.0], [2.0, 1.0]];
        let cell = [[-1.0, -1.0], [5.0, -1.0], [5.0, 5.0], [-1.0, 5.0]];
        let out = intersect_convex(&[outer, hole], &cell, 1e-12, 1e-14).unwrap();
        assert!(out.len() >= 2);
        assert!(out.iter().all(|r| geometry::signed_area(r) > 0.0 && geometry::is_simple(r, 1e-12)));
        assert!((total_area(&out) - 15.0).abs() < 1e-12);
    }

    #[test]
    fn cut_through_hole_links_across_it() {
        let outer = vec![[0.0, 0.0], [4.0, 0.0], [4.0, 4.0], [0.0, 4.0]];
        let hole = vec![[1.0, 1.0], [1.0, 3.0], [3.0, 3.0], [3.0, 1.0]];
        let out = clip_rings(&[outer, hole], &HalfPlane::new([0.0, 2.0], [0.0, 1.0]), 1e-12).unwrap();
        assert_eq!(out.len(), 1);
        assert!((total_area(&out) - 6.0).abs() < 1e-12);
        assert!(geometry::is_simple(&out[0], 1e-12));
    }
}
