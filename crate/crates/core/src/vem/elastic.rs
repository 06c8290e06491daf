//! First-order VEM kernel for plane elasticity with thermal strain loading.
//!
//! Vector basis in scaled coordinates, dofs interleaved (u₁, v₁, u₂, …):
//! m1 = (1, 0), m2 = (0, 1), m3 = (−η, ξ), m4 = (η, ξ), m5 = (ξ, 0), m6 = (0, η).

use nalgebra::{DMatrix, DVector, Matrix3, SMatrix};

use crate::error::{Result, VemError};
use crate::geometry::{self, Point};
use crate::mesh::ElementGeometry;

/// Voigt strains (εxx, εyy, γxy) of the six basis fields, one column each.
pub fn basis_strains(h: f64) -> SMatrix<f64, 3, 6> {
    let mut e = SMatrix::<f64, 3, 6>::zeros();
    e[(2, 3)] = 2.0 / h;
    e[(0, 4)] = 1.0 / h;
    e[(1, 5)] = 1.0 / h;
    e
}

/// Basis values at a scaled point, 2 × 6.
fn basis_at(s: Point) -> SMatrix<f64, 2, 6> {
    let (x, y) = (s[0], s[1]);
    SMatrix::<f64, 2, 6>::from_row_slice(&[
        1.0, 0.0, -y, y, x, 0.0, //
        0.0, 1.0, x, x, 0.0, y,
    ])
}

#[derive(Clone, Debug)]
pub struct VectorProjection {
    pub geometry: ElementGeometry,
    /// 6 × 2n_v.
    pub b_bar: DMatrix<f64>,
    /// 2n_v × 6.
    pub d_bar: DMatrix<f64>,
    /// M = B̄ D̄.
    pub m: DMatrix<f64>,
    /// Π̃* = M⁻¹ B̄.
    pub pi_star: DMatrix<f64>,
    /// D̄ Π̃*.
    pub pi_nodal: DMatrix<f64>,
    /// ∫ ε̂ᵀ D̂ ε̂ over the element, zero on the rigid modes.
    pub m_energy: DMatrix<f64>,
    /// Constant strain operator ε̂ Π̃*, 3 × 2n_v.
    pub strain_operator: DMatrix<f64>,
}

#[derive(Clone, Debug)]
pub struct VectorElementKernel {
    pub projection: VectorProjection,
    pub k_c: DMatrix<f64>,
    pub k_s: DMatrix<f64>,
    pub k: DMatrix<f64>,
}

pub fn vector_projection(vertices: &[Point], d: &Matrix3<f64>) -> Result<VectorProjection> {
    let geom = ElementGeometry::from_vertices(vertices)?;
    let n = vertices.len();
    let h = geom.diameter;
    let eps = basis_strains(h);
    let scaled: Vec<Point> = vertices.iter().map(|&p| geom.scaled(p)).collect();

    let mut b_bar = DMatrix::zeros(6, 2 * n);
    let inv = 1.0 / n as f64;
    for (i, s) in scaled.iter().enumerate() {
        b_bar[(0, 2 * i)] = inv;
        b_bar[(1, 2 * i + 1)] = inv;
        // vertex average of the rotation field m3 paired with the nodal vector
        b_bar[(2, 2 * i)] = -s[1] * inv;
        b_bar[(2, 2 * i + 1)] = s[0] * inv;
    }
    // rows 4..6: ∫_∂E φ_i σ(m_α) n dΓ with constant stress σ(m_α) = D̂ ε̂(m_α)
    for a in 3..6 {
        let sig = d * eps.column(a);
        for e in 0..n {
            let j = (e + 1) % n;
            let (nrm, len) = geometry::edge_normal(vertices[e], vertices[j]);
            let tx = sig[0] * nrm[0] + sig[2] * nrm[1];
            let ty = sig[2] * nrm[0] + sig[1] * nrm[1];
            for &i in &[e, j] {
                b_bar[(a, 2 * i)] += 0.5 * len * tx;
                b_bar[(a, 2 * i + 1)] += 0.5 * len * ty;
            }
        }
    }

    let mut d_bar = DMatrix::zeros(2 * n, 6);
    for (i, &s) in scaled.iter().enumerate() {
        let m = basis_at(s);
        for a in 0..6 {
            d_bar[(2 * i, a)] = m[(0, a)];
            d_bar[(2 * i + 1, a)] = m[(1, a)];
        }
    }
    let m = &b_bar * &d_bar;
    let pi_star = m
        .clone()
        .lu()
        .solve(&b_bar)
        .ok_or_else(|| VemError::DegenerateElement { element: usize::MAX, reason: "singular projection matrix M".into() })?;
    let pi_nodal = &d_bar * &pi_star;
    let e6 = DMatrix::from_fn(3, 6, |r, c| eps[(r, c)]);
    let dd = DMatrix::from_fn(3, 3, |r, c| d[(r, c)]);
    let m_energy = e6.transpose() * &dd * &e6 * geom.area;
    let strain_operator = &e6 * &pi_star;
    Ok(VectorProjection { geometry: geom, b_bar, d_bar, m, pi_star, pi_nodal, m_energy, strain_operator })
}

pub fn elastic_stiffness(projection: VectorProjection, tau: f64) -> VectorElementKernel {
    let n2 = projection.pi_nodal.nrows();
    let k_c = projection.pi_star.transpose() * &projection.m_energy * &projection.pi_star;
    // linear fields span the whole k = 1 space on a triangle
    let k_s = if n2 == 6 {
        DMatrix::zeros(6, 6)
    } else {
        let r = DMatrix::identity(n2, n2) - &projection.pi_nodal;
        r.transpose() * r * (tau * k_c.trace())
    };
    let k = &k_c + &k_s;
    VectorElementKernel { projection, k_c, k_s, k }
}

/// F_th = Π̃*ᵀ ∫ ε̂ᵀ D̂ ε_t dΩ with ε_t = α ΔT [1, 1, 0]. Since ε̂ is constant
/// on the element only the mean of ΔT enters.
pub fn thermal_force(projection: &VectorProjection, d: &Matrix3<f64>, expansion: f64, mean_delta_t: f64) -> DVector<f64> {
    let eps_t = nalgebra::Vector3::new(expansion * mean_delta_t, expansion * mean_delta_t, 0.0);
    let sigma_t = d * eps_t * projection.geometry.area;
    projection.strain_operator.transpose() * DVector::from_column_slice(sigma_t.as_slice())
}
