//! First-order VEM kernel for scalar conduction.

use nalgebra::DMatrix;

use crate::error::{Result, VemError};
use crate::geometry::{self, Point};
use crate::mesh::ElementGeometry;

/// Projection Π∇ onto the scaled linear monomials {1, ξ, η}.
#[derive(Clone, Debug)]
pub struct ScalarProjection {
    pub geometry: ElementGeometry,
    /// 3 × 3: vertex-average row, then the energy rows.
    pub g: DMatrix<f64>,
    /// 3 × n_v right-hand side.
    pub b: DMatrix<f64>,
    /// Π̃ = G⁻¹B, maps nodal values to monomial coefficients.
    pub pi_star: DMatrix<f64>,
    /// Values of Π∇φ_i at the vertices, n_v × n_v.
    pub pi_nodal: DMatrix<f64>,
    /// Energy form on the monomials (constant row and column zero).
    pub g_energy: DMatrix<f64>,
}

impl ScalarProjection {
    pub fn num_vertices(&self) -> usize {
        self.b.ncols()
    }

    /// Projected field Π∇v at physical point `p`, given nodal values.
    pub fn evaluate(&self, nodal: &[f64], p: Point) -> f64 {
        let c = self.coefficients(nodal);
        let s = self.geometry.scaled(p);
        c[0] + c[1] * s[0] + c[2] * s[1]
    }

    pub fn coefficients(&self, nodal: &[f64]) -> [f64; 3] {
        let mut c = [0.0; 3];
        for (a, ca) in c.iter_mut().enumerate() {
            *ca = (0..nodal.len()).map(|i| self.pi_star[(a, i)] * nodal[i]).sum();
        }
        c
    }

    /// Physical gradient operator (2 × n_v) of the projection.
    pub fn gradient_operator(&self) -> DMatrix<f64> {
        let h = self.geometry.diameter;
        let n = self.num_vertices();
        DMatrix::from_fn(2, n, |r, i| self.pi_star[(r + 1, i)] / h)
    }
}

#[derive(Clone, Debug)]
pub struct ScalarElementKernel {
    pub projection: ScalarProjection,
    pub k_c: DMatrix<f64>,
    pub k_s: DMatrix<f64>,
    pub k: DMatrix<f64>,
}

/// Builds Π∇ for a CCW polygon with conductivity λ.
pub fn scalar_projection(vertices: &[Point], conductivity: f64) -> Result<ScalarProjection> {
    let geom = ElementGeometry::from_vertices(vertices)?;
    let n = vertices.len();
    let h = geom.diameter;
    let scaled: Vec<Point> = vertices.iter().map(|&p| geom.scaled(p)).collect();

    let mut g = DMatrix::zeros(3, 3);
    g[(0, 0)] = 1.0;
    g[(0, 1)] = scaled.iter().map(|s| s[0]).sum::<f64>() / n as f64;
    g[(0, 2)] = scaled.iter().map(|s| s[1]).sum::<f64>() / n as f64;
    let energy = conductivity * geom.area / (h * h);
    g[(1, 1)] = energy;
    g[(2, 2)] = energy;

    let mut b = DMatrix::zeros(3, n);
    for i in 0..n {
        b[(0, i)] = 1.0 / n as f64;
    }
    // ∫_∂E φ_i λ ∇m·n: each edge contributes half its length times the normal
    for e in 0..n {
        let j = (e + 1) % n;
        let (nrm, len) = geometry::edge_normal(vertices[e], vertices[j]);
        for &i in &[e, j] {
            b[(1, i)] += conductivity / h * 0.5 * len * nrm[0];
            b[(2, i)] += conductivity / h * 0.5 * len * nrm[1];
        }
    }

    let lu = g.clone().lu();
    let pi_star = lu
        .solve(&b)
        .ok_or_else(|| VemError::DegenerateElement { element: usize::MAX, reason: "singular projection matrix G".into() })?;
    let d = DMatrix::from_fn(n, 3, |i, a| match a {
        0 => 1.0,
        1 => scaled[i][0],
        _ => scaled[i][1],
    });
    let pi_nodal = &d * &pi_star;
    let mut g_energy = g.clone();
    g_energy.row_mut(0).fill(0.0);
    Ok(ScalarProjection { geometry: geom, g, b, pi_star, pi_nodal, g_energy })
}

/// K = K_c + K_s with K_s = τ tr(K_c) (I − Π)ᵀ(I − Π).
pub fn thermal_stiffness(projection: ScalarProjection, tau: f64) -> ScalarElementKernel {
    let n = projection.num_vertices();
    let k_c = projection.pi_star.transpose() * &projection.g_energy * &projection.pi_star;
    // on a triangle the k = 1 space is P1 itself, so I − Π vanishes identically
    let k_s = if n == 3 {
        DMatrix::zeros(3, 3)
    } else {
        let r = DMatrix::identity(n, n) - &projection.pi_nodal;
        r.transpose() * r * (tau * k_c.trace())
    };
    let k = &k_c + &k_s;
    ScalarElementKernel { projection, k_c, k_s, k }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vem::numerical_rank;

    fn septagon() -> Vec<Point> {
        (0..7)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / 7.0 + 0.1 * (k as f64).sin();
                let r = 1.0 + 0.2 * (k as f64 * 1.7).cos();
                [r * t.cos(), r * t.sin()]
            })
            .collect()
    }

    #[test]
    fn reproduces_linear_fields() {
        let poly = septagon();
        let p = scalar_projection(&poly, 2.5).unwrap();
        let f = |x: Point| 3.0 + 2.0 * x[0] - x[1];
        let nodal: Vec<f64> = poly.iter().map(|&x| f(x)).collect();
        for &x in &[[0.1, 0.2], [-0.3, 0.5]] {
            assert!((p.evaluate(&nodal, x) - f(x)).abs() < 1e-12);
        }
        let grad = p.gradient_operator() * nalgebra::DVector::from_vec(nodal);
        assert!((grad[0] - 2.0).abs() < 1e-12 && (grad[1] + 1.0).abs() < 1e-12);
        let ones = vec![1.0; poly.len()];
        let g1 = p.gradient_operator() * nalgebra::DVector::from_vec(ones);
        assert!(g1.norm() < 1e-13);
    }

    #[test]
    fn unit_square_energy_of_x() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let k = thermal_stiffness(scalar_projection(&sq, 1.0).unwrap(), 0.5);
        let x = nalgebra::DVector::from_vec(sq.iter().map(|p| p[0]).collect());
        assert!(((x.transpose() * &k.k * &x)[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_and_null_space() {
        let k = thermal_stiffness(scalar_projection(&septagon(), 1.0).unwrap(), 0.5);
        assert_eq!(numerical_rank(&k.k, 1e-10), 6);
        let ones = nalgebra::DVector::from_element(7, 1.0);
        assert!((&k.k * ones).norm() < 1e-12 * k.k.norm());
        assert!((&k.k - k.k.transpose()).norm() < 1e-14 * k.k.norm());
    }

    #[test]
    fn conductivity_scales_stiffness() {
        let a = thermal_stiffness(scalar_projection(&septagon(), 1.0).unwrap(), 0.5).k;
        let b = thermal_stiffness(scalar_projection(&septagon(), 3.0).unwrap(), 0.5).k;
        assert!((a * 3.0 - b).norm() < 1e-13);
    }
}
