//! Config-driven thermal, elastic and coupled solves and their output files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{vtk, write_json, Manifest, RunConfig, VtkFields};
use crate::assembly::{MechanicalBc, Method, ThermalBc};
use crate::error::{Result, VemError};
use crate::mesh::PolygonalMesh;
use crate::pipeline::{solve_elastic, solve_thermal, FieldSolution};
use crate::postprocess::{recover_stress, StressField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Analysis {
    Thermal,
    Elastic,
    Coupled,
}

impl Analysis {
    pub fn command(self) -> &'static str {
        match self {
            Analysis::Thermal => "solve-thermal",
            Analysis::Elastic => "solve-elastic",
            Analysis::Coupled => "solve-coupled",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub analysis: Analysis,
    pub method: Method,
    pub nodes: usize,
    pub elements: usize,
    /// SFVEM elements per projection order.
    pub orders: BTreeMap<usize, usize>,
    pub temperature_min: Option<f64>,
    pub temperature_max: Option<f64>,
    /// Heat supplied through each Dirichlet tag.
    pub heat_reactions: BTreeMap<String, f64>,
    /// Force supplied through each Dirichlet tag.
    pub force_reactions: BTreeMap<String, [f64; 2]>,
    pub displacement_max: Option<f64>,
    pub von_mises_max: Option<f64>,
}

pub struct RunOutcome {
    pub mesh: PolygonalMesh,
    pub temperature: Option<FieldSolution>,
    pub displacement: Option<FieldSolution>,
    pub stress: Option<StressField>,
    pub summary: RunSummary,
}

fn dirichlet_thermal_tags(bcs: &[ThermalBc]) -> Vec<&str> {
    bcs.iter().filter(|b| matches!(b, ThermalBc::Dirichlet { .. })).map(ThermalBc::target).collect()
}

fn dirichlet_mechanical_tags(bcs: &[MechanicalBc]) -> Vec<&str> {
    bcs.iter().filter(|b| matches!(b, MechanicalBc::Dirichlet { .. })).map(MechanicalBc::target).collect()
}

/// Builds the mesh and runs the requested analysis.
pub fn execute(config: &RunConfig, base_dir: &Path, analysis: Analysis) -> Result<RunOutcome> {
    let mesh = config.mesh.build(base_dir)?;
    let options = config.solve_options();
    let needs_thermal = analysis != Analysis::Elastic;
    if needs_thermal && config.thermal_bcs.is_empty() {
        return Err(VemError::Config(format!("{} needs at least one thermal boundary condition", analysis.command())));
    }
    if analysis != Analysis::Thermal && config.mechanical_bcs.is_empty() {
        return Err(VemError::Config(format!("{} needs at least one mechanical boundary condition", analysis.command())));
    }
    let temperature = if needs_thermal { Some(solve_thermal(&mesh, &config.materials, &config.thermal_bcs, &options)?) } else { None };
    let displacement = if analysis == Analysis::Thermal {
        None
    } else {
        Some(solve_elastic(&mesh, &config.materials, &config.mechanical_bcs, temperature.as_ref(), &options)?)
    };
    let stress = match &displacement {
        Some(u) => Some(recover_stress(u, temperature.as_ref(), &mesh, &config.materials)?),
        None => None,
    };

    let mut summary = RunSummary {
        analysis,
        method: config.method,
        nodes: mesh.num_nodes(),
        elements: mesh.num_elements(),
        orders: BTreeMap::new(),
        temperature_min: None,
        temperature_max: None,
        heat_reactions: BTreeMap::new(),
        force_reactions: BTreeMap::new(),
        displacement_max: None,
        von_mises_max: None,
    };
    if let Some(t) = &temperature {
        summary.orders = t.metadata.orders.clone();
        summary.temperature_min = t.values.iter().copied().reduce(f64::min);
        summary.temperature_max = t.values.iter().copied().reduce(f64::max);
        for tag in dirichlet_thermal_tags(&config.thermal_bcs) {
            summary.heat_reactions.insert(tag.to_string(), t.tag_reaction(&mesh, tag)?[0]);
        }
    }
    if let Some(u) = &displacement {
        summary.orders = u.metadata.orders.clone();
        summary.displacement_max = (0..mesh.num_nodes()).map(|i| u.displacement(i)).map(|d| d[0].hypot(d[1])).reduce(f64::max);
        for tag in dirichlet_mechanical_tags(&config.mechanical_bcs) {
            let r = u.tag_reaction(&mesh, tag)?;
            summary.force_reactions.insert(tag.to_string(), [r[0], r[1]]);
        }
    }
    if let Some(s) = &stress {
        summary.von_mises_max = s.von_mises_elements().into_iter().reduce(f64::max);
    }
    Ok(RunOutcome { mesh, temperature, displacement, stress, summary })
}

pub fn result_fields(outcome: &RunOutcome, config: &RunConfig) -> VtkFields {
    let mut fields = VtkFields::default();
    if let Some(t) = &outcome.temperature {
        fields.point_scalars.push(("temperature".into(), t.values.clone()));
    }
    if let Some(u) = &outcome.displacement {
        fields.point_vectors.push(("displacement".into(), (0..outcome.mesh.num_nodes()).map(|i| u.displacement(i)).collect()));
    }
    if let Some(s) = &outcome.stress {
        fields.point_scalars.push(("von_mises_nodal".into(), s.von_mises_nodes(&config.materials)));
        for (k, name) in ["sigma_xx", "sigma_yy", "sigma_xy"].iter().enumerate() {
            fields.cell_scalars.push((name.to_string(), s.per_element.iter().map(|x| x[k]).collect()));
        }
        fields.cell_scalars.push(("von_mises".into(), s.von_mises_elements()));
    }
    fields
}

/// Writes `result.vtk`, `summary.json` and `manifest.json` into `out_dir`.
pub fn write_outputs(outcome: &RunOutcome, config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let vtk_path = out_dir.join("result.vtk");
    vtk::write_vtk(&vtk_path, &outcome.mesh, &result_fields(outcome, config))?;
    let summary_path = out_dir.join("summary.json");
    write_json(&summary_path, &outcome.summary)?;
    let mut manifest = Manifest::new(
        outcome.summary.analysis.command(),
        Some(config.content_hash()),
        outcome.mesh.content_hash(),
        Some(config.method),
    );
    manifest.outputs = vec!["result.vtk".into(), "summary.json".into()];
    let manifest_path = out_dir.join("manifest.json");
    write_json(&manifest_path, &manifest)?;
    Ok(vec![vtk_path, summary_path, manifest_path])
}
