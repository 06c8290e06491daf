//! Run configuration read from JSON. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::assembly::{MaterialMap, MechanicalBc, Method, MethodParams, ThermalBc};
use crate::error::{Result, VemError};
use crate::material::AnalysisMode;
use crate::mesh::{generate_polar_quad_mesh, generate_polygonal_mesh, generate_quad_mesh, read_mesh, Domain, PolygonalMesh};
use crate::pipeline::SolveOptions;
use crate::solver::SolverConfig;

fn default_tau() -> f64 {
    0.5
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn default_region() -> String {
    "domain".into()
}

/// Where the mesh comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeshSource {
    /// Mesh JSON file; relative paths resolve against the config file.
    File { path: PathBuf },
    /// Structured rectangles, tagged left, right, top and bottom.
    Quad {
        x: [f64; 2],
        y: [f64; 2],
        nx: usize,
        ny: usize,
        #[serde(default = "default_region")]
        region: String,
    },
    /// Structured annular sector, tagged inner, outer, start and end.
    PolarQuad {
        r: [f64; 2],
        theta_degrees: [f64; 2],
        nr: usize,
        ntheta: usize,
        #[serde(default = "default_region")]
        region: String,
    },
    /// Clipped Voronoi cells on a rectangle, tagged like `quad`.
    Voronoi {
        x: [f64; 2],
        y: [f64; 2],
        seeds: usize,
        #[serde(default)]
        lloyd: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default = "default_region")]
        region: String,
    },
}

impl MeshSource {
    pub fn build(&self, base_dir: &Path) -> Result<PolygonalMesh> {
        match self {
            MeshSource::File { path } => read_mesh(base_dir.join(path)),
            MeshSource::Quad { x, y, nx, ny, region } => generate_quad_mesh(*x, *y, *nx, *ny, region),
            MeshSource::PolarQuad { r, theta_degrees, nr, ntheta, region } => {
                generate_polar_quad_mesh(r[0], r[1], theta_degrees.map(f64::to_radians), *nr, *ntheta, region)
            }
            MeshSource::Voronoi { x, y, seeds, lloyd, seed, region } => {
                generate_polygonal_mesh(&Domain::rectangle(*x, *y), *seeds, *lloyd, *seed, region)
            }
        }
    }
}

/// Everything a solve needs. Defaults: method sfvem, tau_h 0.5, automatic
/// SFVEM order, plane stress, T_ref 0, output directory `out`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_tau")]
    pub tau_h: f64,
    #[serde(default)]
    pub uniform_order: Option<usize>,
    #[serde(default)]
    pub mode: AnalysisMode,
    #[serde(default, rename = "T_ref")]
    pub t_ref: f64,
    #[serde(default)]
    pub solver: SolverConfig,
    pub materials: MaterialMap,
    #[serde(default)]
    pub thermal_bcs: Vec<ThermalBc>,
    #[serde(default)]
    pub mechanical_bcs: Vec<MechanicalBc>,
    pub mesh: MeshSource,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
}

fn default_method() -> Method {
    Method::Sfvem
}

impl RunConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let config: RunConfig = serde_json::from_str(s).map_err(|e| VemError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&crate::error::read_text(path)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau_h > 0.0 && self.tau_h.is_finite()) {
            return Err(VemError::Config(format!("tau_h must be positive, got {}", self.tau_h)));
        }
        if !(self.solver.tol > 0.0 && self.solver.tol < 1.0) {
            return Err(VemError::Config(format!("solver tolerance must lie in (0, 1), got {}", self.solver.tol)));
        }
        if self.materials.is_empty() {
            return Err(VemError::Config("the materials table is empty".into()));
        }
        for (name, m) in &self.materials {
            m.validate().map_err(|e| VemError::Config(format!("material '{name}': {e}")))?;
        }
        Ok(())
    }

    pub fn method_params(&self) -> MethodParams {
        MethodParams { method: self.method, tau: self.tau_h, uniform_order: self.uniform_order }
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions { params: self.method_params(), mode: self.mode, t_ref: self.t_ref, solver: self.solver.clone() }
    }

    /// SHA-256 of the canonical (compact, field-ordered) serialization.
    pub fn content_hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "materials": {"domain": {"young": 200.0, "poisson": 0.3, "expansion": 1e-5, "conductivity": 5.0}},
        "thermal_bcs": [{"kind": "dirichlet", "target": "left", "value": 80.0}],
        "mesh": {"kind": "quad", "x": [0, 1], "y": [0, 1], "nx": 2, "ny": 2}
    }"#;

    #[test]
    fn defaults_and_round_trip() {
        let c = RunConfig::from_json_str(MINIMAL).unwrap();
        assert_eq!(c.method, Method::Sfvem);
        assert_eq!(c.tau_h, 0.5);
        assert_eq!(c.mode, AnalysisMode::PlaneStress);
        assert_eq!(c.output_dir, PathBuf::from("out"));
        let again = RunConfig::from_json_str(&c.to_json_string()).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.content_hash(), c.content_hash());
    }

    #[test]
    fn unknown_keys_are_named() {
        let bad = MINIMAL.replacen('{', r#"{"tau": 1.0,"#, 1);
        let err = RunConfig::from_json_str(&bad).unwrap_err().to_string();
        assert!(err.contains("tau"), "{err}");
        let bad = MINIMAL.replace(r#""nx": 2"#, r#""nx": 2, "nz": 1"#);
        assert!(RunConfig::from_json_str(&bad).unwrap_err().to_string().contains("nz"));
    }

    #[test]
    fn invalid_values_are_rejected() {
        let bad = MINIMAL.replacen('{', r#"{"tau_h": 0.0,"#, 1);
        assert!(matches!(RunConfig::from_json_str(&bad), Err(VemError::Config(_))));
    }
}
