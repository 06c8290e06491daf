//! Scaled monomials ξ^a η^b with ξ = (x − x̄)/h, η = (y − ȳ)/h.

use crate::geometry::Point;

/// Number of monomials of total degree ≤ `l` in two variables.
#[inline]
pub fn dim(l: usize) -> usize {
    (l + 1) * (l + 2) / 2
}

/// Exponents ordered by total degree, then by decreasing power of ξ:
/// 1, ξ, η, ξ², ξη, η², ...
pub fn exponents(l: usize) -> Vec<(u32, u32)> {
    let mut out = Vec::with_capacity(dim(l));
    for d in 0..=l as u32 {
        for b in 0..=d {
            out.push((d - b, b));
        }
    }
    out
}

/// Values of all monomials of degree ≤ `l` at scaled point `s`.
pub fn eval(exps: &[(u32, u32)], s: Point) -> Vec<f64> {
    exps.iter().map(|&(a, b)| s[0].powi(a as i32) * s[1].powi(b as i32)).collect()
}

/// Physical-space divergence contributions: ∂/∂x and ∂/∂y of each scaled
/// monomial, i.e. (1/h) ∂/∂ξ and (1/h) ∂/∂η.
pub fn grad(exps: &[(u32, u32)], s: Point, h: f64) -> Vec<[f64; 2]> {
    exps.iter()
        .map(|&(a, b)| {
            let dx = if a == 0 { 0.0 } else { a as f64 * s[0].powi(a as i32 - 1) * s[1].powi(b as i32) };
            let dy = if b == 0 { 0.0 } else { b as f64 * s[0].powi(a as i32) * s[1].powi(b as i32 - 1) };
            [dx / h, dy / h]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_and_dimension() {
        assert_eq!(exponents(2), vec![(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]);
        for l in 0..6 {
            assert_eq!(exponents(l).len(), dim(l));
        }
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let e = exponents(3);
        let s = [0.31, -0.17];
        let h = 2.5;
        let g = grad(&e, s, h);
        let eps = 1e-6;
        let fx = eval(&e, [s[0] + eps, s[1]]);
        let bx = eval(&e, [s[0] - eps, s[1]]);
        let fy = eval(&e, [s[0], s[1] + eps]);
        let by = eval(&e, [s[0], s[1] - eps]);
        for k in 0..e.len() {
            assert!((g[k][0] - (fx[k] - bx[k]) / (2.0 * eps * h)).abs() < 1e-8);
            assert!((g[k][1] - (fy[k] - by[k]) / (2.0 * eps * h)).abs() < 1e-8);
        }
    }
}
