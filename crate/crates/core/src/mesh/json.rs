//! Mesh JSON document:
//! `{ "nodes": [[x,y],…], "elements": [{"v":[i,…],"region":"tag"},…], "boundary": {"tag":[[i,j],…]} }`

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Element, PolygonalMesh};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementDocument {
    pub v: Vec<usize>,
    pub region: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshDocument {
    pub nodes: Vec<[f64; 2]>,
    pub elements: Vec<ElementDocument>,
    #[serde(default)]
    pub boundary: BTreeMap<String, Vec<[usize; 2]>>,
}

impl From<&PolygonalMesh> for MeshDocument {
    fn from(m: &PolygonalMesh) -> Self {
        MeshDocument {
            nodes: m.nodes.clone(),
            elements: m.elements.iter().map(|e| ElementDocument { v: e.vertices.clone(), region: e.region.clone() }).collect(),
            boundary: m.boundary.clone(),
        }
    }
}

impl From<MeshDocument> for PolygonalMesh {
    fn from(d: MeshDocument) -> Self {
        PolygonalMesh {
            nodes: d.nodes,
            elements: d.elements.into_iter().map(|e| Element { vertices: e.v, region: e.region }).collect(),
            boundary: d.boundary,
        }
    }
}

impl PolygonalMesh {
    /// Parses and validates a mesh document.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let doc: MeshDocument = serde_json::from_str(s)?;
        let mesh = PolygonalMesh::from(doc);
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&MeshDocument::from(self)).expect("mesh serializes")
    }
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<PolygonalMesh> {
    PolygonalMesh::from_json_str(&crate::error::read_text(path)?)
}

pub fn write_mesh(path: impl AsRef<Path>, mesh: &PolygonalMesh) -> Result<()> {
    std::fs::write(path, mesh.to_json_string())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_quad_mesh;

    #[test]
    fn round_trip() {
        let m = generate_quad_mesh([0.0, 1.0], [0.0, 0.7], 3, 2, "si").unwrap();
        let back = PolygonalMesh::from_json_str(&m.to_json_string()).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn unknown_key_is_named() {
        let s = r#"{"nodes":[[0,0],[1,0],[0,1]],"elements":[{"v":[0,1,2],"region":"a"}],"boundary":{},"extra":1}"#;
        let err = PolygonalMesh::from_json_str(s).unwrap_err().to_string();
        assert!(err.contains("extra"), "{err}");
    }

    #[test]
    fn clockwise_element_rejected() {
        let s = r#"{"nodes":[[0,0],[1,0],[0,1]],"elements":[{"v":[0,2,1],"region":"a"}]}"#;
        assert!(PolygonalMesh::from_json_str(s).is_err());
    }
}
