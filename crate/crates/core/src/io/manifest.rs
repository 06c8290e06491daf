//! Provenance record written next to every result set.

use serde::{Deserialize, Serialize};

use crate::assembly::Method;

/// Unit system of all inputs and outputs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Units {
    pub length: String,
    pub stress: String,
    pub temperature: String,
    pub conductivity: String,
    pub expansion: String,
}

impl Default for Units {
    fn default() -> Self {
        Units {
            length: "mm".into(),
            stress: "MPa".into(),
            temperature: "K".into(),
            conductivity: "W/(m·K)".into(),
            expansion: "1/K".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub command: String,
    pub config_hash: Option<String>,
    pub mesh_hash: String,
    pub method: Option<Method>,
    pub units: Units,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, config_hash: Option<String>, mesh_hash: String, method: Option<Method>) -> Self {
        Manifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config_hash,
            mesh_hash,
            method,
            units: Units::default(),
            outputs: Vec::new(),
        }
    }
}
