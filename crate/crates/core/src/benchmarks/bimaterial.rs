//! Si strip with one Cu channel opening on the top face: hot top, cold
//! bottom, insulated sides, bottom clamped. The Cu channel is meshed with
//! structured quads and coupled to a Voronoi Si mesh along a non-matching
//! interface.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::assembly::{MaterialMap, MechanicalBc, MethodParams, ThermalBc};
use crate::error::Result;
use crate::geometry::Point;
use crate::material::Material;
use crate::mesh::{generate_polygonal_mesh, generate_quad_mesh, merge_nonmatching_interface, Domain, DomainLoop, PolygonalMesh};
use crate::pipeline::{solve_thermomechanical, SolveOptions};
use crate::postprocess::{extract_line, recover_stress, LineField};

pub const SILICON: &str = "si";
pub const COPPER: &str = "cu";

/// Geometry in mm, temperatures in K.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BimaterialParams {
    pub width: f64,
    pub height: f64,
    pub channel_width: f64,
    pub channel_depth: f64,
    pub t_top: f64,
    pub t_bottom: f64,
    pub t_ref: f64,
    pub silicon_seeds: usize,
    pub channel_cells: [usize; 2],
    pub seed: u64,
    pub samples: usize,
}

impl Default for BimaterialParams {
    fn default() -> Self {
        BimaterialParams {
            width: 0.15,
            height: 0.25,
            channel_width: 0.01,
            channel_depth: 0.1,
            t_top: 125.0,
            t_bottom: 25.0,
            t_ref: 25.0,
            silicon_seeds: 400,
            channel_cells: [2, 24],
            seed: 11,
            samples: 121,
        }
    }
}

impl BimaterialParams {
    pub fn materials(&self) -> MaterialMap {
        BTreeMap::from([
            (COPPER.to_string(), Material::new(155000.0, 0.3, 17e-6, 397.0)),
            (SILICON.to_string(), Material::new(140000.0, 0.25, 2.8e-6, 149.0)),
        ])
    }

    fn channel_x(&self) -> [f64; 2] {
        [(self.width - self.channel_width) / 2.0, (self.width + self.channel_width) / 2.0]
    }

    /// Left wall, floor and right wall of the channel, top to top.
    pub fn interface_polyline(&self) -> Vec<Point> {
        let [x0, x1] = self.channel_x();
        let y0 = self.height - self.channel_depth;
        vec![[x0, self.height], [x0, y0], [x1, y0], [x1, self.height]]
    }

    pub fn thermal_bcs(&self) -> Vec<ThermalBc> {
        vec![
            ThermalBc::Dirichlet { target: "top".into(), value: self.t_top },
            ThermalBc::Dirichlet { target: "bottom".into(), value: self.t_bottom },
        ]
    }

    pub fn mechanical_bcs(&self) -> Vec<MechanicalBc> {
        vec![MechanicalBc::Dirichlet { target: "bottom".into(), x: Some(0.0), y: Some(0.0) }]
    }
}

pub fn bimaterial_mesh(p: &BimaterialParams) -> Result<PolygonalMesh> {
    let [x0, x1] = p.channel_x();
    let (w, h, y0) = (p.width, p.height, p.height - p.channel_depth);
    let outline = vec![[0.0, 0.0], [w, 0.0], [w, h], [x1, h], [x1, y0], [x0, y0], [x0, h], [0.0, h]];
    let tags = ["bottom", "right", "top", "interface", "interface", "interface", "top", "left"].map(String::from).to_vec();
    let si = generate_polygonal_mesh(&Domain::new(DomainLoop::new(outline, tags), vec![]), p.silicon_seeds, 10, p.seed, SILICON)?;
    let mut cu = generate_quad_mesh([x0, x1], [y0, h], p.channel_cells[0], p.channel_cells[1], COPPER)?;
    for side in ["left", "bottom", "right"] {
        cu.rename_boundary_tag(side, "interface");
    }
    merge_nonmatching_interface(&si, &cu, "interface", "interface", si.default_merge_tol())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BimaterialReport {
    pub nodes: usize,
    pub elements: usize,
    pub method: crate::assembly::Method,
    pub temperature_min: f64,
    pub temperature_max: f64,
    /// Heat entering through the top face.
    pub heat_in: f64,
    /// Heat leaving through the bottom face.
    pub heat_out: f64,
    /// |heat_in − heat_out| / |heat_in|.
    pub heat_imbalance: f64,
    pub von_mises_max: f64,
    /// (arc length, von Mises) along the channel walls.
    pub interface_profile: Vec<(f64, f64)>,
}

pub fn run_bimaterial_demo(p: &BimaterialParams, params: &MethodParams) -> Result<BimaterialReport> {
    let mesh = bimaterial_mesh(p)?;
    let materials = p.materials();
    let options = SolveOptions { t_ref: p.t_ref, ..SolveOptions::with_params(params.clone()) };
    let (t, u) = solve_thermomechanical(&mesh, &materials, &p.thermal_bcs(), &p.mechanical_bcs(), &options)?;
    // a Dirichlet reaction K T − f is the heat supplied to the body there
    let heat_in = t.tag_reaction(&mesh, "top")?[0];
    let heat_out = -t.tag_reaction(&mesh, "bottom")?[0];
    let stress = recover_stress(&u, Some(&t), &mesh, &materials)?;
    let element_vm = stress.von_mises_elements();
    let nodal_vm = stress.von_mises_nodes(&materials);
    let field = LineField { element_value: Box::new(|e, _| element_vm[e]), nodal_averaged: Some(&nodal_vm) };
    Ok(BimaterialReport {
        nodes: mesh.num_nodes(),
        elements: mesh.num_elements(),
        method: params.method,
        temperature_min: t.values.iter().copied().fold(f64::INFINITY, f64::min),
        temperature_max: t.values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        heat_in,
        heat_out,
        heat_imbalance: (heat_in - heat_out).abs() / heat_in.abs(),
        von_mises_max: element_vm.iter().copied().fold(0.0, f64::max),
        interface_profile: extract_line(&mesh, &field, &p.interface_polyline(), p.samples)?,
    })
}
