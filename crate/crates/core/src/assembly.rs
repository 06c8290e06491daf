//! Global assembly: per-element kernels computed in parallel, scattered in
//! element order, boundary conditions and Dirichlet elimination.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector, Matrix3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VemError};
use crate::geometry::{self, Point};
use crate::material::{elasticity_matrix, AnalysisMode, Material};
use crate::mesh::PolygonalMesh;
use crate::monomial;
use crate::sfvem::{self, FieldKind};
use crate::solver::{solve_linear, CsrMatrix, SolverConfig};
use crate::vem;

/// Materials keyed by element region tag.
pub type MaterialMap = BTreeMap<String, Material>;

pub fn material_for<'a>(materials: &'a MaterialMap, region: &str) -> Result<&'a Material> {
    materials.get(region).ok_or_else(|| VemError::Config(format!("no material assigned to region '{region}'")))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    Vem,
    Sfvem,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Vem => "vem",
            Method::Sfvem => "sfvem",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MethodParams {
    pub method: Method,
    /// Stabilization factor; read only on the classical VEM path.
    pub tau: f64,
    /// Forces one SFVEM order on every element.
    pub uniform_order: Option<usize>,
}

impl Default for MethodParams {
    fn default() -> Self {
        MethodParams { method: Method::Vem, tau: 0.5, uniform_order: None }
    }
}

impl MethodParams {
    pub fn vem(tau: f64) -> Self {
        MethodParams { method: Method::Vem, tau, uniform_order: None }
    }

    pub fn sfvem(uniform_order: Option<usize>) -> Self {
        MethodParams { method: Method::Sfvem, tau: 0.5, uniform_order }
    }
}

/// What an element contributes beyond its stiffness: the maps from element
/// dofs to projected field data used in postprocessing.
#[derive(Clone, Debug)]
pub struct ElementOperators {
    pub dofs: Vec<usize>,
    pub centroid: Point,
    pub diameter: f64,
    /// SFVEM order, 0 for classical VEM (constant gradients).
    pub order: usize,
    /// Rows: gradient components × monomials, component-major. Scalar
    /// fields have components (∂x, ∂y); vector fields (∂x u, ∂y u, ∂x v, ∂y v).
    pub gradient: DMatrix<f64>,
    /// Π∇ coefficients of a scalar field (3 × n_v); empty for vector fields.
    pub value: DMatrix<f64>,
}

impl ElementOperators {
    pub fn num_components(&self) -> usize {
        self.gradient.nrows() / monomial::dim(self.order)
    }
}

struct ElementKernel {
    stiffness: DMatrix<f64>,
    load: DVector<f64>,
    operators: ElementOperators,
}

/// Assembled global system before boundary conditions.
#[derive(Clone, Debug)]
pub struct Assembled {
    pub matrix: CsrMatrix,
    pub load: Vec<f64>,
    pub elements: Vec<ElementOperators>,
    /// Elements whose kernel was built at each SFVEM order.
    pub order_counts: BTreeMap<usize, usize>,
}

fn sparsity(mesh: &PolygonalMesh, per_node: usize) -> CsrMatrix {
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); mesh.num_nodes()];
    for el in &mesh.elements {
        for &a in &el.vertices {
            adj[a].extend(el.vertices.iter().copied());
        }
    }
    let mut rows = Vec::with_capacity(per_node * mesh.num_nodes());
    for (i, nbrs) in adj.iter().enumerate() {
        let cols: Vec<usize> = nbrs.iter().flat_map(|&j| (0..per_node).map(move |c| per_node * j + c)).collect();
        for _ in 0..per_node {
            rows.push(if cols.is_empty() { vec![per_node * i] } else { cols.clone() });
        }
    }
    // isolated nodes keep a diagonal slot so the pattern is square
    for (i, r) in rows.iter_mut().enumerate() {
        if r.binary_search(&i).is_err() {
            r.push(i);
        }
    }
    CsrMatrix::from_pattern(rows)
}

fn scatter(mesh: &PolygonalMesh, per_node: usize, kernels: Vec<ElementKernel>) -> Assembled {
    let mut matrix = sparsity(mesh, per_node);
    let mut load = vec![0.0; per_node * mesh.num_nodes()];
    let mut elements = Vec::with_capacity(kernels.len());
    let mut order_counts = BTreeMap::new();
    for k in kernels {
        let dofs = &k.operators.dofs;
        for (a, &i) in dofs.iter().enumerate() {
            load[i] += k.load[a];
            for (b, &j) in dofs.iter().enumerate() {
                matrix.add(i, j, k.stiffness[(a, b)]);
            }
        }
        *order_counts.entry(k.operators.order).or_insert(0) += 1;
        elements.push(k.operators);
    }
    Assembled { matrix, load, elements, order_counts }
}

fn thermal_kernel(vertices: &[Point], dofs: Vec<usize>, material: &Material, params: &MethodParams) -> Result<ElementKernel> {
    let n = vertices.len();
    match params.method {
        Method::Vem => {
            let proj = vem::scalar_projection(vertices, material.conductivity)?;
            let geom = proj.geometry;
            let gradient = proj.gradient_operator();
            let value = proj.pi_star.clone();
            let k = vem::thermal_stiffness(proj, params.tau);
            let operators = ElementOperators { dofs, centroid: geom.centroid, diameter: geom.diameter, order: 0, gradient, value };
            Ok(ElementKernel { stiffness: k.k, load: DVector::zeros(n), operators })
        }
        Method::Sfvem => {
            let l = sfvem::element_order(n, params.uniform_order, FieldKind::Scalar)?;
            let proj = sfvem::gradient_projection_scalar(vertices, l)?;
            let stiffness = sfvem::sfvem_thermal_stiffness(&proj, material.conductivity)?;
            let geom = *proj.geometry();
            let operators = ElementOperators {
                dofs,
                centroid: geom.centroid,
                diameter: geom.diameter,
                order: l,
                // Π^m already stores the (∂x, ∂y) coefficient blocks
                gradient: proj.pi_m.clone(),
                value: proj.base.pi_star.clone(),
            };
            Ok(ElementKernel { stiffness, load: DVector::zeros(n), operators })
        }
    }
}

/// Temperature data the elastic kernels need: nodal values and T_ref.
#[derive(Clone, Copy, Debug)]
pub struct ThermalLoad<'a> {
    pub temperature: &'a [f64],
    pub t_ref: f64,
}

fn delta_t_coefficients(vertices: &[Point], nodes: &[usize], load: &ThermalLoad) -> Result<[f64; 3]> {
    let proj = vem::scalar_projection(vertices, 1.0)?;
    let t: Vec<f64> = nodes.iter().map(|&i| load.temperature[i]).collect();
    let c = proj.coefficients(&t);
    Ok([c[0] - load.t_ref, c[1], c[2]])
}

fn elastic_kernel(
    vertices: &[Point],
    nodes: &[usize],
    material: &Material,
    d: &Matrix3<f64>,
    params: &MethodParams,
    thermal: Option<&ThermalLoad>,
) -> Result<ElementKernel> {
    let n = vertices.len();
    let dofs: Vec<usize> = nodes.iter().flat_map(|&i| [2 * i, 2 * i + 1]).collect();
    let dt = match thermal {
        Some(t) if material.expansion != 0.0 => Some(delta_t_coefficients(vertices, nodes, t)?),
        _ => None,
    };
    match params.method {
        Method::Vem => {
            let proj = vem::vector_projection(vertices, d)?;
            let geom = proj.geometry;
            let h = geom.diameter;
            // displacement gradient from the coefficients of m3..m6
            let mut gradient = DMatrix::zeros(4, 2 * n);
            for c in 0..2 * n {
                let a = |r: usize| proj.pi_star[(r, c)];
                gradient[(0, c)] = a(4) / h;
                gradient[(1, c)] = (a(3) - a(2)) / h;
                gradient[(2, c)] = (a(3) + a(2)) / h;
                gradient[(3, c)] = a(5) / h;
            }
            let load = match dt {
                Some(c) => vem::thermal_force(&proj, d, material.expansion, c[0]),
                None => DVector::zeros(2 * n),
            };
            let k = vem::elastic_stiffness(proj, params.tau);
            let operators = ElementOperators { dofs, centroid: geom.centroid, diameter: h, order: 0, gradient, value: DMatrix::zeros(0, 0) };
            Ok(ElementKernel { stiffness: k.k, load, operators })
        }
        Method::Sfvem => {
            let l = sfvem::element_order(n, params.uniform_order, FieldKind::Vector)?;
            let proj = sfvem::gradient_projection_scalar(vertices, l)?;
            let stiffness = sfvem::sfvem_elastic_stiffness(&proj, d)?;
            let dim = proj.dim();
            let mut gradient = DMatrix::zeros(4 * dim, 2 * n);
            for i in 0..n {
                for j in 0..dim {
                    gradient[(j, 2 * i)] = proj.pi_m[(j, i)];
                    gradient[(dim + j, 2 * i)] = proj.pi_m[(dim + j, i)];
                    gradient[(2 * dim + j, 2 * i + 1)] = proj.pi_m[(j, i)];
                    gradient[(3 * dim + j, 2 * i + 1)] = proj.pi_m[(dim + j, i)];
                }
            }
            let load = match dt {
                Some(c) => sfvem::sfvem_thermal_force(&proj, d, material.expansion, c),
                None => DVector::zeros(2 * n),
            };
            let geom = *proj.geometry();
            let operators =
                ElementOperators { dofs, centroid: geom.centroid, diameter: geom.diameter, order: l, gradient, value: DMatrix::zeros(0, 0) };
            Ok(ElementKernel { stiffness, load, operators })
        }
    }
}

pub fn assemble_thermal(mesh: &PolygonalMesh, materials: &MaterialMap, params: &MethodParams) -> Result<Assembled> {
    let kernels: Vec<ElementKernel> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let el = &mesh.elements[e];
            let material = material_for(materials, &el.region)?;
            material.validate()?;
            thermal_kernel(&mesh.element_vertices(e), el.vertices.clone(), material, params).map_err(|err| err.with_element(e))
        })
        .collect::<Result<_>>()?;
    Ok(scatter(mesh, 1, kernels))
}

pub fn assemble_elastic(
    mesh: &PolygonalMesh,
    materials: &MaterialMap,
    mode: AnalysisMode,
    params: &MethodParams,
    thermal: Option<ThermalLoad>,
) -> Result<Assembled> {
    if let Some(t) = &thermal {
        if t.temperature.len() != mesh.num_nodes() {
            return Err(VemError::MeshMismatch(format!("{} temperatures for {} nodes", t.temperature.len(), mesh.num_nodes())));
        }
    }
    let mut dmats = BTreeMap::new();
    for region in mesh.regions() {
        let m = material_for(materials, &region)?;
        dmats.insert(region, elasticity_matrix(m, mode)?);
    }
    let kernels: Vec<ElementKernel> = (0..mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let el = &mesh.elements[e];
            let material = &materials[&el.region];
            elastic_kernel(&mesh.element_vertices(e), &el.vertices, material, &dmats[&el.region], params, thermal.as_ref())
                .map_err(|err| err.with_element(e))
        })
        .collect::<Result<_>>()?;
    Ok(scatter(mesh, 2, kernels))
}

/// Thermal boundary condition. Neumann values are outward heat flux
/// (positive = heat leaving through the boundary).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ThermalBc {
    Dirichlet { target: String, value: f64 },
    Neumann { target: String, value: f64 },
}

/// Mechanical boundary condition. Dirichlet fixes the listed components,
/// Neumann applies a constant traction vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MechanicalBc {
    Dirichlet {
        target: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        y: Option<f64>,
    },
    Neumann { target: String, value: [f64; 2] },
}

impl ThermalBc {
    pub fn target(&self) -> &str {
        match self {
            ThermalBc::Dirichlet { target, .. } | ThermalBc::Neumann { target, .. } => target,
        }
    }
}

impl MechanicalBc {
    pub fn target(&self) -> &str {
        match self {
            MechanicalBc::Dirichlet { target, .. } | MechanicalBc::Neumann { target, .. } => target,
        }
    }
}

fn check_disjoint<'a>(mesh: &PolygonalMesh, items: impl Iterator<Item = (&'a str, bool)>) -> Result<()> {
    let mut kinds: BTreeMap<&str, bool> = BTreeMap::new();
    for (tag, dirichlet) in items {
        if !mesh.boundary.contains_key(tag) {
            return Err(VemError::BoundaryCondition(format!("unknown boundary tag '{tag}'")));
        }
        if let Some(&prev) = kinds.get(tag) {
            if prev != dirichlet {
                return Err(VemError::BoundaryCondition(format!("tag '{tag}' carries both Dirichlet and Neumann conditions")));
            }
        }
        kinds.insert(tag, dirichlet);
    }
    Ok(())
}

/// Prescribed dof values.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Constraints {
    values: BTreeMap<usize, f64>,
}

impl Constraints {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a constraint; a second, different value on the same dof is an error.
    pub fn insert(&mut self, dof: usize, value: f64) -> Result<()> {
        match self.values.get(&dof) {
            Some(&prev) if prev != value => Err(VemError::ConflictingConstraint { dof, first: prev, second: value }),
            _ => {
                self.values.insert(dof, value);
                Ok(())
            }
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, dof: usize) -> Option<f64> {
        self.values.get(&dof).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().map(|(&d, &v)| (d, v))
    }

    pub fn thermal(mesh: &PolygonalMesh, bcs: &[ThermalBc]) -> Result<Self> {
        check_disjoint(mesh, bcs.iter().map(|b| (b.target(), matches!(b, ThermalBc::Dirichlet { .. }))))?;
        let mut c = Constraints::new();
        for bc in bcs {
            if let ThermalBc::Dirichlet { target, value } = bc {
                for node in mesh.boundary_nodes(target)? {
                    c.insert(node, *value)?;
                }
            }
        }
        Ok(c)
    }

    pub fn mechanical(mesh: &PolygonalMesh, bcs: &[MechanicalBc]) -> Result<Self> {
        check_disjoint(mesh, bcs.iter().map(|b| (b.target(), matches!(b, MechanicalBc::Dirichlet { .. }))))?;
        let mut c = Constraints::new();
        for bc in bcs {
            if let MechanicalBc::Dirichlet { target, x, y } = bc {
                if x.is_none() && y.is_none() {
                    return Err(VemError::BoundaryCondition(format!("Dirichlet condition on '{target}' fixes no component")));
                }
                for node in mesh.boundary_nodes(target)? {
                    if let Some(v) = x {
                        c.insert(2 * node, *v)?;
                    }
                    if let Some(v) = y {
                        c.insert(2 * node + 1, *v)?;
                    }
                }
            }
        }
        Ok(c)
    }
}

/// Edge loads from Neumann conditions; linear traces make each end node
/// receive half the edge resultant.
pub fn thermal_neumann_load(mesh: &PolygonalMesh, bcs: &[ThermalBc]) -> Result<Vec<f64>> {
    let mut f = vec![0.0; mesh.num_nodes()];
    for bc in bcs {
        if let ThermalBc::Neumann { target, value } = bc {
            for e in boundary_edges(mesh, target)? {
                let len = geometry::dist(mesh.nodes[e[0]], mesh.nodes[e[1]]);
                // weak form carries −∫ q̄ φ with q̄ the outward flux
                f[e[0]] -= 0.5 * len * value;
                f[e[1]] -= 0.5 * len * value;
            }
        }
    }
    Ok(f)
}

pub fn mechanical_neumann_load(mesh: &PolygonalMesh, bcs: &[MechanicalBc]) -> Result<Vec<f64>> {
    let mut f = vec![0.0; 2 * mesh.num_nodes()];
    for bc in bcs {
        if let MechanicalBc::Neumann { target, value } = bc {
            for e in boundary_edges(mesh, target)? {
                let len = geometry::dist(mesh.nodes[e[0]], mesh.nodes[e[1]]);
                for &node in e {
                    f[2 * node] += 0.5 * len * value[0];
                    f[2 * node + 1] += 0.5 * len * value[1];
                }
            }
        }
    }
    Ok(f)
}

fn boundary_edges<'a>(mesh: &'a PolygonalMesh, tag: &str) -> Result<&'a [[usize; 2]]> {
    mesh.boundary
        .get(tag)
        .map(|v| v.as_slice())
        .ok_or_else(|| VemError::BoundaryCondition(format!("unknown boundary tag '{tag}'")))
}

/// Solution of a constrained system.
#[derive(Clone, Debug)]
pub struct ConstrainedSolution {
    pub values: Vec<f64>,
    /// K u − f, nonzero only at constrained dofs.
    pub reactions: Vec<f64>,
}

/// Partition-and-substitute elimination of the constrained dofs, then solve.
pub fn solve_constrained(matrix: &CsrMatrix, load: &[f64], constraints: &Constraints, config: &SolverConfig) -> Result<ConstrainedSolution> {
    let n = matrix.nrows();
    if let Some((dof, _)) = constraints.iter().find(|&(d, _)| d >= n) {
        return Err(VemError::BoundaryCondition(format!("constraint on dof {dof} outside the {n}-dof system")));
    }
    let mut values = vec![0.0; n];
    for (d, v) in constraints.iter() {
        values[d] = v;
    }
    let free: Vec<usize> = (0..n).filter(|&d| constraints.get(d).is_none()).collect();
    let mut map = vec![None; n];
    for (k, &d) in free.iter().enumerate() {
        map[d] = Some(k);
    }
    let reduced = matrix.principal_submatrix(&free, &map);
    let rhs: Vec<f64> = free
        .iter()
        .map(|&i| load[i] - matrix.row(i).filter(|&(j, _)| map[j].is_none()).map(|(j, v)| v * values[j]).sum::<f64>())
        .collect();
    let x = solve_linear(&reduced, &rhs, config)?;
    for (k, &d) in free.iter().enumerate() {
        values[d] = x[k];
    }
    let ku = matrix.mul_vec(&values);
    let reactions = (0..n).map(|d| if map[d].is_none() { ku[d] - load[d] } else { 0.0 }).collect();
    Ok(ConstrainedSolution { values, reactions })
}
