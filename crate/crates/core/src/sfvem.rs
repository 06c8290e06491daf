//! Stabilization-free VEM: L2 projection of the gradient onto vector
//! polynomials of degree `l`, computed from vertex values and the first-order
//! energy projection.

use nalgebra::{DMatrix, DVector, Matrix3};

use crate::error::{Result, VemError};
use crate::geometry::{self, Point};
use crate::mesh::ElementGeometry;
use crate::monomial;
use crate::quadrature::{edge_rule, polygon_rule_unchecked, QuadratureRule, MAX_POLYGON_DEGREE};
use crate::vem::{numerical_rank, scalar_projection, ScalarProjection};

/// Condition number of the monomial mass matrix above which the basis is
/// orthonormalized before solving.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Highest projection order the polygon rules support.
pub const MAX_ORDER: usize = MAX_POLYGON_DEGREE / 2;

/// Relative singular value threshold used by the rank checks.
pub const RANK_TOL: f64 = 1e-10;

/// Whether `(l+1)(l+2) > n_v − 1` holds.
pub fn order_satisfies(l: usize, n_v: usize) -> bool {
    (l + 1) * (l + 2) > n_v.saturating_sub(1)
}

/// Smallest `l ≥ 1` with `(l+1)(l+2) > n_v − 1`.
pub fn select_order(n_v: usize) -> usize {
    let mut l = 1;
    while !order_satisfies(l, n_v) {
        l += 1;
    }
    l
}

/// Smallest `l ≥ select_order(n_v)` whose strain space is large enough for
/// a vector field: the stiffness rank is bounded by the 3·dim(P_l) strain
/// coefficients, so `3(l+1)(l+2)/2 ≥ 2n_v − 3` is also needed.
pub fn select_order_vector(n_v: usize) -> usize {
    let mut l = select_order(n_v);
    while !vector_order_satisfies(l, n_v) {
        l += 1;
    }
    l
}

pub fn vector_order_satisfies(l: usize, n_v: usize) -> bool {
    order_satisfies(l, n_v) && 3 * monomial::dim(l) + 3 >= 2 * n_v
}

/// Which field an SFVEM element is built for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    Scalar,
    Vector,
}

#[derive(Clone, Debug)]
pub struct GradientProjection {
    pub order: usize,
    pub exponents: Vec<(u32, u32)>,
    /// First-order energy projection the volume term is evaluated with.
    pub base: ScalarProjection,
    /// ∫ m mᵀ over the element (scaled monomials), dim × dim.
    pub h: DMatrix<f64>,
    /// blockdiag(H, H).
    pub g_tilde: DMatrix<f64>,
    /// 2·dim × n_v.
    pub b_tilde: DMatrix<f64>,
    /// Π^m = G̃⁻¹ B̃ in monomial coefficients: rows 0..dim give ∂x, rows
    /// dim..2·dim give ∂y.
    pub pi_m: DMatrix<f64>,
    /// Π^m expressed in the basis actually used for the solve (identity
    /// transform unless the monomials were orthonormalized).
    basis_transform: DMatrix<f64>,
    pi_q: DMatrix<f64>,
    rule: QuadratureRule,
}

impl GradientProjection {
    pub fn geometry(&self) -> &ElementGeometry {
        &self.base.geometry
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.pi_m.ncols()
    }

    /// Projected gradient operator at a physical point, 2 × n_v.
    pub fn gradient_at(&self, p: Point) -> DMatrix<f64> {
        let s = self.geometry().scaled(p);
        let m = monomial::eval(&self.exponents, s);
        let dim = self.dim();
        let n = self.num_vertices();
        DMatrix::from_fn(2, n, |r, i| (0..dim).map(|j| m[j] * self.pi_m[(r * dim + j, i)]).sum())
    }

    /// Voigt strain operator (εxx, εyy, γxy) at a physical point, 3 × 2n_v.
    pub fn strain_at(&self, p: Point) -> DMatrix<f64> {
        strain_from_gradient(&self.gradient_at(p))
    }
}

fn strain_from_gradient(g: &DMatrix<f64>) -> DMatrix<f64> {
    let n = g.ncols();
    let mut b = DMatrix::zeros(3, 2 * n);
    for i in 0..n {
        let (gx, gy) = (g[(0, i)], g[(1, i)]);
        b[(0, 2 * i)] = gx;
        b[(2, 2 * i)] = gy;
        b[(1, 2 * i + 1)] = gy;
        b[(2, 2 * i + 1)] = gx;
    }
    b
}

fn condition_number(h: &DMatrix<f64>) -> f64 {
    let ev = h.clone().symmetric_eigenvalues();
    let max = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = ev.iter().copied().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn block_diag(a: &DMatrix<f64>) -> DMatrix<f64> {
    let d = a.nrows();
    let mut out = DMatrix::zeros(2 * d, 2 * d);
    out.view_mut((0, 0), (d, d)).copy_from(a);
    out.view_mut((d, d), (d, d)).copy_from(a);
    out
}

/// Builds Π^m of order `l` for a CCW polygon.
pub fn gradient_projection_scalar(vertices: &[Point], l: usize) -> Result<GradientProjection> {
    let base = scalar_projection(vertices, 1.0)?;
    let geom = base.geometry;
    let n = vertices.len();
    let h_e = geom.diameter;
    let exps = monomial::exponents(l);
    let dim = exps.len();
    let degree = 2 * l + 2;
    if 2 * l > MAX_POLYGON_DEGREE {
        return Err(VemError::Quadrature(format!("projection order {l} needs more than degree {MAX_POLYGON_DEGREE}")));
    }
    let rule = polygon_rule_unchecked(vertices, degree.min(MAX_POLYGON_DEGREE))?;

    let mut h = DMatrix::zeros(dim, dim);
    let mut b = DMatrix::zeros(2 * dim, n);
    for (&p, &w) in rule.points.iter().zip(&rule.weights) {
        let s = geom.scaled(p);
        let m = monomial::eval(&exps, s);
        let g = monomial::grad(&exps, s, h_e);
        for j in 0..dim {
            for k in 0..dim {
                h[(j, k)] += w * m[j] * m[k];
            }
        }
        // − ∫ div(p_j) Π∇φ_i with p_j = (m_j, 0) or (0, m_j)
        let phi: Vec<f64> = (0..n).map(|i| base.pi_star[(0, i)] + base.pi_star[(1, i)] * s[0] + base.pi_star[(2, i)] * s[1]).collect();
        for j in 0..dim {
            for i in 0..n {
                b[(j, i)] -= w * g[j][0] * phi[i];
                b[(dim + j, i)] -= w * g[j][1] * phi[i];
            }
        }
    }
    // + ∫_∂E m_j n φ_i with φ_i linear along each edge
    for e in 0..n {
        let k = (e + 1) % n;
        let (nrm, _) = geometry::edge_normal(vertices[e], vertices[k]);
        let er = edge_rule(vertices[e], vertices[k], l + 2)?;
        for ((&p, &t), &w) in er.points.iter().zip(&er.params).zip(&er.weights) {
            let m = monomial::eval(&exps, geom.scaled(p));
            for j in 0..dim {
                for (node, phi) in [(e, 1.0 - t), (k, t)] {
                    b[(j, node)] += w * m[j] * phi * nrm[0];
                    b[(dim + j, node)] += w * m[j] * phi * nrm[1];
                }
            }
        }
    }

    let cond = condition_number(&h);
    let transform = if cond <= CONDITION_LIMIT {
        DMatrix::identity(dim, dim)
    } else {
        // Gram–Schmidt against the element rule, via the Cholesky factor
        let chol = h.clone().cholesky().ok_or(VemError::IllConditioned { element: usize::MAX, condition: cond })?;
        let t = chol.l().try_inverse().ok_or(VemError::IllConditioned { element: usize::MAX, condition: cond })?;
        let hq = &t * &h * t.transpose();
        let cq = condition_number(&hq);
        if cq > CONDITION_LIMIT {
            return Err(VemError::IllConditioned { element: usize::MAX, condition: cq });
        }
        t
    };
    let t2 = block_diag(&transform);
    let hq = &transform * &h * transform.transpose();
    let gq = block_diag(&hq);
    let bq = &t2 * &b;
    let pi_q = gq
        .clone()
        .cholesky()
        .ok_or(VemError::IllConditioned { element: usize::MAX, condition: cond })?
        .solve(&bq);
    let pi_m = t2.transpose() * &pi_q;
    let g_tilde = block_diag(&h);
    Ok(GradientProjection { order: l, exponents: exps, base, h, g_tilde, b_tilde: b, pi_m, basis_transform: transform, pi_q, rule })
}

/// Order for an element with `n_v` vertices, honouring a global override.
pub fn element_order(n_v: usize, uniform: Option<usize>, field: FieldKind) -> Result<usize> {
    let (ok, auto, expected, bound) = match field {
        FieldKind::Scalar => (order_satisfies as fn(usize, usize) -> bool, select_order(n_v), n_v - 1, 0),
        FieldKind::Vector => (vector_order_satisfies as fn(usize, usize) -> bool, select_order_vector(n_v), 2 * n_v - 3, 1),
    };
    match uniform {
        None => Ok(auto),
        Some(l) if (1..=MAX_ORDER).contains(&l) && ok(l, n_v) => Ok(l),
        Some(l) => {
            let rank = if bound == 0 { (l + 1) * (l + 2) } else { 3 * monomial::dim(l) };
            Err(VemError::InsufficientOrder { element: usize::MAX, order: l, vertices: n_v, rank, expected })
        }
    }
}

/// K = λ Π^mᵀ G̃ Π^m, checked to have rank n_v − 1.
pub fn sfvem_thermal_stiffness(proj: &GradientProjection, conductivity: f64) -> Result<DMatrix<f64>> {
    let hq = &proj.basis_transform * &proj.h * proj.basis_transform.transpose();
    let gq = block_diag(&hq);
    let k = proj.pi_q.transpose() * gq * &proj.pi_q * conductivity;
    let k = symmetrize(k);
    let n = proj.num_vertices();
    let rank = numerical_rank(&k, RANK_TOL);
    if rank != n - 1 {
        return Err(VemError::InsufficientOrder { element: usize::MAX, order: proj.order, vertices: n, rank, expected: n - 1 });
    }
    Ok(k)
}

fn symmetrize(k: DMatrix<f64>) -> DMatrix<f64> {
    (&k + k.transpose()) * 0.5
}

/// K = ∫ B_qᵀ D̂ B_q dΩ with B_q = A N_pᵀ (Π^m ⊗ I₂), checked to have rank
/// 2n_v − 3.
pub fn sfvem_elastic_stiffness(proj: &GradientProjection, d: &Matrix3<f64>) -> Result<DMatrix<f64>> {
    let n = proj.num_vertices();
    let dd = DMatrix::from_fn(3, 3, |r, c| d[(r, c)]);
    let mut k = DMatrix::zeros(2 * n, 2 * n);
    for (&p, &w) in proj.rule.points.iter().zip(&proj.rule.weights) {
        let b = proj.strain_at(p);
        k += b.transpose() * &dd * &b * w;
    }
    let k = symmetrize(k);
    let rank = numerical_rank(&k, RANK_TOL);
    if rank != 2 * n - 3 {
        return Err(VemError::InsufficientOrder { element: usize::MAX, order: proj.order, vertices: n, rank, expected: 2 * n - 3 });
    }
    Ok(k)
}

/// F_th = ∫ B_qᵀ D̂ ε_t dΩ, ε_t = α ΔT(x) [1, 1, 0] with ΔT given by its
/// linear coefficients in the element's scaled coordinates.
pub fn sfvem_thermal_force(proj: &GradientProjection, d: &Matrix3<f64>, expansion: f64, delta_t: [f64; 3]) -> DVector<f64> {
    let n = proj.num_vertices();
    let dd = DMatrix::from_fn(3, 3, |r, c| d[(r, c)]);
    let mut f = DVector::zeros(2 * n);
    for (&p, &w) in proj.rule.points.iter().zip(&proj.rule.weights) {
        let s = proj.geometry().scaled(p);
        let dt = delta_t[0] + delta_t[1] * s[0] + delta_t[2] * s[1];
        let eps_t = DVector::from_vec(vec![expansion * dt, expansion * dt, 0.0]);
        let b = proj.strain_at(p);
        f += b.transpose() * (&dd * eps_t) * w;
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{elasticity_matrix, AnalysisMode, Material};

    fn regular(n: usize, r: f64) -> Vec<Point> {
        (0..n)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                [r * t.cos(), r * t.sin()]
            })
            .collect()
    }

    /// Irregular convex polygon: vertices on a wobbly circle at jittered angles.
    fn irregular(n: usize) -> Vec<Point> {
        (0..n)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * (k as f64 + 0.3 * (k as f64 * 1.3).cos()) / n as f64;
                let r = 1.0 + 0.1 * (k as f64 * 2.1).sin();
                [r * t.cos(), r * t.sin()]
            })
            .collect()
    }

    #[test]
    fn order_selection() {
        assert_eq!(select_order(3), 1);
        assert_eq!(select_order(4), 1);
        assert_eq!(select_order(6), 1);
        assert_eq!(select_order(7), 2);
        assert_eq!(select_order(12), 2);
        assert_eq!(select_order(13), 3);
        assert!(element_order(7, Some(1), FieldKind::Scalar).is_err());
        assert_eq!(element_order(5, Some(2), FieldKind::Scalar).unwrap(), 2);
        assert_eq!(select_order_vector(10), 2);
        assert_eq!(select_order_vector(11), 3);
        assert_eq!(select_order_vector(12), 3);
        assert_eq!(select_order_vector(17), 4);
        assert!(element_order(12, Some(2), FieldKind::Vector).is_err());
        assert_eq!(element_order(12, Some(2), FieldKind::Scalar).unwrap(), 2);
    }

    #[test]
    fn linear_gradient_is_exact() {
        let poly = irregular(5);
        let p = gradient_projection_scalar(&poly, 2).unwrap();
        let v = DVector::from_vec(poly.iter().map(|x| 2.0 * x[0] - x[1]).collect());
        let c = &p.pi_m * &v;
        let dim = p.dim();
        assert!((c[0] - 2.0).abs() < 1e-12 && (c[dim] + 1.0).abs() < 1e-12);
        for j in 1..dim {
            assert!(c[j].abs() < 1e-12 && c[dim + j].abs() < 1e-12);
        }
        let ones = DVector::from_element(5, 1.0);
        assert!((&p.pi_m * ones).norm() < 1e-12);
    }

    #[test]
    fn ranks_without_stabilization() {
        let d = elasticity_matrix(&Material::new(1.0, 0.25, 0.0, 1.0), AnalysisMode::PlaneStrain).unwrap();
        for n in [3, 5, 8, 10, 11, 12, 16] {
            let poly = irregular(n);
            let p = gradient_projection_scalar(&poly, select_order(n)).unwrap();
            let kt = sfvem_thermal_stiffness(&p, 1.0).unwrap();
            assert_eq!(numerical_rank(&kt, RANK_TOL), n - 1);
            let p = gradient_projection_scalar(&poly, select_order_vector(n)).unwrap();
            let ke = sfvem_elastic_stiffness(&p, &d).unwrap();
            assert_eq!(numerical_rank(&ke, RANK_TOL), 2 * n - 3);
        }
    }

    #[test]
    fn vector_rank_is_capped_by_strain_coefficients() {
        let d = elasticity_matrix(&Material::new(1.0, 0.25, 0.0, 1.0), AnalysisMode::PlaneStrain).unwrap();
        let poly = irregular(12);
        let p = gradient_projection_scalar(&poly, 2).unwrap();
        assert!(matches!(sfvem_elastic_stiffness(&p, &d), Err(VemError::InsufficientOrder { rank: 18, expected: 21, .. })));
    }

    #[test]
    fn regular_hexagon_needs_more_than_the_counting_bound() {
        // the alternating vertex mode is invisible to linear gradients by
        // symmetry, so l = 1 leaves a spurious zero-energy mode
        let hex = regular(6, 1.0);
        let p = gradient_projection_scalar(&hex, 1).unwrap();
        assert!(matches!(sfvem_thermal_stiffness(&p, 1.0), Err(VemError::InsufficientOrder { rank: 4, .. })));
        let p = gradient_projection_scalar(&hex, 2).unwrap();
        assert_eq!(numerical_rank(&sfvem_thermal_stiffness(&p, 1.0).unwrap(), RANK_TOL), 5);
    }

    #[test]
    fn hanging_node_square_has_full_rank_at_order_one() {
        let poly = [[0.0, 0.0], [1.0, 0.0], [1.0, 0.5], [1.0, 1.0], [0.0, 1.0]];
        let p = gradient_projection_scalar(&poly, 1).unwrap();
        let k = sfvem_thermal_stiffness(&p, 1.0).unwrap();
        assert_eq!(numerical_rank(&k, RANK_TOL), 4);
    }

    #[test]
    fn too_low_order_is_reported() {
        let poly = regular(9, 1.0);
        let p = gradient_projection_scalar(&poly, 1).unwrap();
        assert!(matches!(sfvem_thermal_stiffness(&p, 1.0), Err(VemError::InsufficientOrder { .. })));
    }

    #[test]
    fn orthonormalized_basis_matches_plain_solve() {
        // a sliver gives a badly conditioned monomial mass matrix
        let poly = [[0.0, 0.0], [1.0, 0.0], [1.0, 1e-4], [0.0, 1e-4]];
        let p = gradient_projection_scalar(&poly, 3).unwrap();
        let v = DVector::from_vec(poly.iter().map(|x| 3.0 * x[0] + 5.0 * x[1]).collect());
        let g = p.gradient_at([0.5, 5e-5]) * v;
        assert!((g[0] - 3.0).abs() < 1e-6 && (g[1] - 5.0).abs() < 1e-6);
    }
}
