use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VemError};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnalysisMode {
    #[default]
    PlaneStress,
    PlaneStrain,
}

/// Isotropic linear thermoelastic material, units MPa, 1/K and W/(m·K).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Material {
    pub young: f64,
    pub poisson: f64,
    #[serde(default)]
    pub expansion: f64,
    pub conductivity: f64,
}

impl Material {
    pub fn new(young: f64, poisson: f64, expansion: f64, conductivity: f64) -> Self {
        Material { young, poisson, expansion, conductivity }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.young > 0.0 && self.young.is_finite()) {
            return Err(VemError::InvalidMaterial(format!("young modulus must be positive, got {}", self.young)));
        }
        if self.poisson == 0.5 {
            return Err(VemError::IncompressibleUnsupported);
        }
        if !(self.poisson > -1.0 && self.poisson < 0.5) {
            return Err(VemError::InvalidMaterial(format!("poisson ratio must lie in (-1, 0.5), got {}", self.poisson)));
        }
        if !(self.expansion >= 0.0 && self.expansion.is_finite()) {
            return Err(VemError::InvalidMaterial(format!("expansion must be non-negative, got {}", self.expansion)));
        }
        if !(self.conductivity > 0.0 && self.conductivity.is_finite()) {
            return Err(VemError::InvalidMaterial(format!("conductivity must be positive, got {}", self.conductivity)));
        }
        Ok(())
    }

    /// Thermal strain multiplier for the in-plane normal components: ε_t = α ΔT [1, 1, 0].
    pub fn thermal_strain(&self, delta_t: f64) -> [f64; 3] {
        let e = self.expansion * delta_t;
        [e, e, 0.0]
    }
}

/// Voigt constitutive matrix (σxx, σyy, σxy) = D (εxx, εyy, γxy).
pub fn elasticity_matrix(material: &Material, mode: AnalysisMode) -> Result<Matrix3<f64>> {
    material.validate()?;
    let (e, nu) = (material.young, material.poisson);
    Ok(match mode {
        AnalysisMode::PlaneStress => {
            let c = e / (1.0 - nu * nu);
            Matrix3::new(c, c * nu, 0.0, c * nu, c, 0.0, 0.0, 0.0, c * (1.0 - nu) / 2.0)
        }
        AnalysisMode::PlaneStrain => {
            let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
            let mu = e / (2.0 * (1.0 + nu));
            Matrix3::new(lambda + 2.0 * mu, lambda, 0.0, lambda, lambda + 2.0 * mu, 0.0, 0.0, 0.0, mu)
        }
    })
}
