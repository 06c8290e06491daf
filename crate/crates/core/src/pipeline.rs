//! Thermal, elastic and one-way coupled solves producing [`FieldSolution`]s.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::assembly::{
    assemble_elastic, assemble_thermal, mechanical_neumann_load, solve_constrained, thermal_neumann_load, Assembled, Constraints,
    ElementOperators, MaterialMap, MechanicalBc, Method, MethodParams, ThermalBc, ThermalLoad,
};
use crate::error::{Result, VemError};
use crate::geometry::Point;
use crate::material::AnalysisMode;
use crate::mesh::PolygonalMesh;
use crate::monomial;
use crate::solver::SolverConfig;

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    pub params: MethodParams,
    pub mode: AnalysisMode,
    /// Reference temperature of the thermal strain α (T − T_ref).
    pub t_ref: f64,
    pub solver: SolverConfig,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { params: MethodParams::default(), mode: AnalysisMode::PlaneStress, t_ref: 0.0, solver: SolverConfig::default() }
    }
}

impl SolveOptions {
    pub fn with_params(params: MethodParams) -> Self {
        SolveOptions { params, ..Default::default() }
    }
}

/// Projected gradient of one element as polynomial coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementField {
    pub centroid: Point,
    pub diameter: f64,
    /// Polynomial degree of the gradient (0 for classical VEM).
    pub order: usize,
    /// Rows: gradient components (2 for scalars, 4 for displacements),
    /// each with `dim(order)` monomial coefficients, row-major.
    pub gradient: Vec<f64>,
    /// Π∇ coefficients (1, ξ, η) of a scalar field.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<[f64; 3]>,
}

impl ElementField {
    fn from_operators(op: &ElementOperators, nodal: &[f64]) -> Self {
        let local: Vec<f64> = op.dofs.iter().map(|&d| nodal[d]).collect();
        let gradient = (0..op.gradient.nrows()).map(|r| (0..local.len()).map(|c| op.gradient[(r, c)] * local[c]).sum()).collect();
        let value = (op.value.nrows() == 3).then(|| {
            let mut v = [0.0; 3];
            for (a, va) in v.iter_mut().enumerate() {
                *va = (0..local.len()).map(|c| op.value[(a, c)] * local[c]).sum();
            }
            v
        });
        ElementField { centroid: op.centroid, diameter: op.diameter, order: op.order, gradient, value }
    }

    pub fn num_components(&self) -> usize {
        self.gradient.len() / monomial::dim(self.order)
    }

    /// Gradient components at a physical point.
    pub fn gradient_at(&self, p: Point) -> Vec<f64> {
        let exps = monomial::exponents(self.order);
        let s = [(p[0] - self.centroid[0]) / self.diameter, (p[1] - self.centroid[1]) / self.diameter];
        let m = monomial::eval(&exps, s);
        self.gradient.chunks(m.len()).map(|row| row.iter().zip(&m).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn gradient_at_centroid(&self) -> Vec<f64> {
        self.gradient_at(self.centroid)
    }

    /// Π∇ of the scalar field at a physical point.
    pub fn value_at(&self, p: Point) -> Option<f64> {
        self.value.map(|c| c[0] + c[1] * (p[0] - self.centroid[0]) / self.diameter + c[2] * (p[1] - self.centroid[1]) / self.diameter)
    }

    /// Voigt strain (εxx, εyy, γxy) of a displacement gradient at `p`.
    pub fn strain_at(&self, p: Point) -> [f64; 3] {
        let g = self.gradient_at(p);
        [g[0], g[3], g[1] + g[2]]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolutionKind {
    Temperature,
    Displacement,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionMetadata {
    pub mesh_hash: String,
    pub method: Method,
    /// Only recorded for classical VEM; SFVEM never reads it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    /// Number of elements per SFVEM projection order.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub orders: BTreeMap<usize, usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_ref: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<AnalysisMode>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSolution {
    pub kind: SolutionKind,
    /// One value per node (temperature) or interleaved (u, v) per node.
    pub values: Vec<f64>,
    /// K u − f at constrained dofs, zero elsewhere.
    pub reactions: Vec<f64>,
    pub elements: Vec<ElementField>,
    pub metadata: SolutionMetadata,
}

impl FieldSolution {
    pub fn dofs_per_node(&self) -> usize {
        match self.kind {
            SolutionKind::Temperature => 1,
            SolutionKind::Displacement => 2,
        }
    }

    pub fn displacement(&self, node: usize) -> [f64; 2] {
        [self.values[2 * node], self.values[2 * node + 1]]
    }

    /// Sum of reactions over the nodes of a boundary tag, per component.
    pub fn tag_reaction(&self, mesh: &PolygonalMesh, tag: &str) -> Result<Vec<f64>> {
        let k = self.dofs_per_node();
        let mut total = vec![0.0; k];
        for node in mesh.boundary_nodes(tag)? {
            for (c, t) in total.iter_mut().enumerate() {
                *t += self.reactions[k * node + c];
            }
        }
        Ok(total)
    }

    pub fn check_mesh(&self, mesh: &PolygonalMesh) -> Result<()> {
        let hash = mesh.content_hash();
        if hash != self.metadata.mesh_hash {
            return Err(VemError::MeshMismatch(format!("solution was computed on mesh {} but got mesh {hash}", self.metadata.mesh_hash)));
        }
        Ok(())
    }
}

fn metadata(mesh: &PolygonalMesh, params: &MethodParams, assembled: &Assembled) -> SolutionMetadata {
    let sfvem = params.method == Method::Sfvem;
    SolutionMetadata {
        mesh_hash: mesh.content_hash(),
        method: params.method,
        tau: (!sfvem).then_some(params.tau),
        orders: if sfvem { assembled.order_counts.clone() } else { BTreeMap::new() },
        t_ref: None,
        mode: None,
    }
}

/// Thermal solve with explicit constraints and an extra nodal load.
pub fn solve_thermal_with(
    mesh: &PolygonalMesh,
    materials: &MaterialMap,
    constraints: &Constraints,
    extra_load: &[f64],
    options: &SolveOptions,
) -> Result<FieldSolution> {
    let assembled = assemble_thermal(mesh, materials, &options.params)?;
    let load: Vec<f64> = assembled.load.iter().zip(extra_load).map(|(a, b)| a + b).collect();
    let sol = solve_constrained(&assembled.matrix, &load, constraints, &options.solver)?;
    let elements = assembled.elements.iter().map(|op| ElementField::from_operators(op, &sol.values)).collect();
    Ok(FieldSolution {
        kind: SolutionKind::Temperature,
        metadata: metadata(mesh, &options.params, &assembled),
        values: sol.values,
        reactions: sol.reactions,
        elements,
    })
}

pub fn solve_thermal(mesh: &PolygonalMesh, materials: &MaterialMap, bcs: &[ThermalBc], options: &SolveOptions) -> Result<FieldSolution> {
    let constraints = Constraints::thermal(mesh, bcs)?;
    let load = thermal_neumann_load(mesh, bcs)?;
    solve_thermal_with(mesh, materials, &constraints, &load, options)
}

/// Elastic solve with explicit constraints, extra nodal load and optional
/// temperature field driving the thermal strain.
pub fn solve_elastic_with(
    mesh: &PolygonalMesh,
    materials: &MaterialMap,
    constraints: &Constraints,
    extra_load: &[f64],
    temperature: Option<&FieldSolution>,
    options: &SolveOptions,
) -> Result<FieldSolution> {
    let thermal = match temperature {
        Some(t) => {
            if t.kind != SolutionKind::Temperature {
                return Err(VemError::MeshMismatch("the thermal load needs a temperature solution".into()));
            }
            t.check_mesh(mesh)?;
            Some(ThermalLoad { temperature: &t.values, t_ref: options.t_ref })
        }
        None => None,
    };
    let assembled = assemble_elastic(mesh, materials, options.mode, &options.params, thermal)?;
    let load: Vec<f64> = assembled.load.iter().zip(extra_load).map(|(a, b)| a + b).collect();
    let sol = solve_constrained(&assembled.matrix, &load, constraints, &options.solver)?;
    let elements = assembled.elements.iter().map(|op| ElementField::from_operators(op, &sol.values)).collect();
    let mut meta = metadata(mesh, &options.params, &assembled);
    meta.t_ref = temperature.map(|_| options.t_ref);
    meta.mode = Some(options.mode);
    Ok(FieldSolution { kind: SolutionKind::Displacement, metadata: meta, values: sol.values, reactions: sol.reactions, elements })
}

pub fn solve_elastic(
    mesh: &PolygonalMesh,
    materials: &MaterialMap,
    bcs: &[MechanicalBc],
    temperature: Option<&FieldSolution>,
    options: &SolveOptions,
) -> Result<FieldSolution> {
    let constraints = Constraints::mechanical(mesh, bcs)?;
    let load = mechanical_neumann_load(mesh, bcs)?;
    solve_elastic_with(mesh, materials, &constraints, &load, temperature, options)
}

/// Temperature first, then displacement under the resulting thermal strain.
pub fn solve_thermomechanical(
    mesh: &PolygonalMesh,
    materials: &MaterialMap,
    thermal_bcs: &[ThermalBc],
    mechanical_bcs: &[MechanicalBc],
    options: &SolveOptions,
) -> Result<(FieldSolution, FieldSolution)> {
    let temperature = solve_thermal(mesh, materials, thermal_bcs, options)?;
    let displacement = solve_elastic(mesh, materials, mechanical_bcs, Some(&temperature), options)?;
    Ok((temperature, displacement))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::Material;
    use crate::mesh::generate_quad_mesh;

    fn strip() -> (PolygonalMesh, MaterialMap) {
        let mesh = generate_quad_mesh([0.0, 4.0], [0.0, 1.0], 8, 3, "s").unwrap();
        (mesh, BTreeMap::from([("s".to_string(), Material::new(200.0, 0.3, 1e-4, 3.0))]))
    }

    #[test]
    fn strip_temperature_is_linear() {
        let (mesh, mats) = strip();
        let bcs = [ThermalBc::Dirichlet { target: "left".into(), value: 80.0 }, ThermalBc::Dirichlet { target: "right".into(), value: 25.0 }];
        for params in [MethodParams::vem(0.5), MethodParams::sfvem(None)] {
            let t = solve_thermal(&mesh, &mats, &bcs, &SolveOptions::with_params(params)).unwrap();
            for (i, p) in mesh.nodes.iter().enumerate() {
                assert!((t.values[i] - (80.0 - 55.0 * p[0] / 4.0)).abs() < 1e-10);
            }
            let hot = t.tag_reaction(&mesh, "left").unwrap()[0];
            let cold = t.tag_reaction(&mesh, "right").unwrap()[0];
            // q = λ ΔT / L over a unit-height strip
            assert!((hot - 3.0 * 55.0 / 4.0).abs() < 1e-9 && (hot + cold).abs() < 1e-9);
            let g = t.elements[5].gradient_at_centroid();
            assert!((g[0] + 55.0 / 4.0).abs() < 1e-10 && g[1].abs() < 1e-10);
        }
    }

    #[test]
    fn outward_flux_sign() {
        let (mesh, mats) = strip();
        // heat leaves on the right at q = 2, so T decreases towards it
        let bcs = [ThermalBc::Dirichlet { target: "left".into(), value: 10.0 }, ThermalBc::Neumann { target: "right".into(), value: 2.0 }];
        let t = solve_thermal(&mesh, &mats, &bcs, &SolveOptions::default()).unwrap();
        for (i, p) in mesh.nodes.iter().enumerate() {
            assert!((t.values[i] - (10.0 - 2.0 / 3.0 * p[0])).abs() < 1e-10);
        }
    }

    #[test]
    fn uniform_reference_temperature_matches_pure_mechanics() {
        let (mesh, mats) = strip();
        let opts = SolveOptions { t_ref: 40.0, ..Default::default() };
        let tb = [ThermalBc::Dirichlet { target: "left".into(), value: 40.0 }, ThermalBc::Dirichlet { target: "right".into(), value: 40.0 }];
        let mb = [MechanicalBc::Dirichlet { target: "left".into(), x: Some(0.0), y: Some(0.0) }, MechanicalBc::Neumann {
            target: "right".into(),
            value: [1.0, 0.5],
        }];
        let (_, coupled) = solve_thermomechanical(&mesh, &mats, &tb, &mb, &opts).unwrap();
        let plain = solve_elastic(&mesh, &mats, &mb, None, &opts).unwrap();
        for (a, b) in coupled.values.iter().zip(&plain.values) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-6));
        }
    }

    #[test]
    fn temperature_from_another_mesh_is_rejected() {
        let (mesh, mats) = strip();
        let other = generate_quad_mesh([0.0, 4.0], [0.0, 1.0], 4, 3, "s").unwrap();
        let bcs = [ThermalBc::Dirichlet { target: "left".into(), value: 1.0 }];
        let t = solve_thermal(&other, &mats, &bcs, &SolveOptions::default()).unwrap();
        let mb = [MechanicalBc::Dirichlet { target: "left".into(), x: Some(0.0), y: Some(0.0) }];
        assert!(matches!(solve_elastic(&mesh, &mats, &mb, Some(&t), &SolveOptions::default()), Err(VemError::MeshMismatch(_))));
    }
}
