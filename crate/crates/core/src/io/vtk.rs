//! VTK legacy 2.0 ASCII writer: polygon cells, point and cell data.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Result, VemError};
use crate::mesh::PolygonalMesh;

const VTK_POLYGON: u8 = 7;

/// Named arrays attached to a mesh.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VtkFields {
    pub point_scalars: Vec<(String, Vec<f64>)>,
    /// Two components per point; written with a zero third component.
    pub point_vectors: Vec<(String, Vec<[f64; 2]>)>,
    pub cell_scalars: Vec<(String, Vec<f64>)>,
}

impl VtkFields {
    fn check(&self, mesh: &PolygonalMesh) -> Result<()> {
        let (n, m) = (mesh.num_nodes(), mesh.num_elements());
        let bad = |name: &str, len: usize, want: usize| {
            VemError::MeshMismatch(format!("field '{name}' has {len} values, the mesh needs {want}"))
        };
        for (name, v) in &self.point_scalars {
            if v.len() != n {
                return Err(bad(name, v.len(), n));
            }
        }
        for (name, v) in &self.point_vectors {
            if v.len() != n {
                return Err(bad(name, v.len(), n));
            }
        }
        for (name, v) in &self.cell_scalars {
            if v.len() != m {
                return Err(bad(name, v.len(), m));
            }
        }
        Ok(())
    }
}

fn scalars(out: &mut String, name: &str, values: &[f64]) {
    let _ = writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default");
    for v in values {
        let _ = writeln!(out, "{v:e}");
    }
}

/// Renders the file; identical inputs give identical bytes.
pub fn vtk_string(mesh: &PolygonalMesh, fields: &VtkFields) -> Result<String> {
    fields.check(mesh)?;
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 2.0\npolyvem\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(out, "POINTS {} double", mesh.num_nodes());
    for p in &mesh.nodes {
        let _ = writeln!(out, "{:e} {:e} 0", p[0], p[1]);
    }
    let size: usize = mesh.elements.iter().map(|e| e.vertices.len() + 1).sum();
    let _ = writeln!(out, "CELLS {} {size}", mesh.num_elements());
    for el in &mesh.elements {
        let ids: Vec<String> = el.vertices.iter().map(usize::to_string).collect();
        let _ = writeln!(out, "{} {}", el.vertices.len(), ids.join(" "));
    }
    let _ = writeln!(out, "CELL_TYPES {}", mesh.num_elements());
    for _ in &mesh.elements {
        let _ = writeln!(out, "{VTK_POLYGON}");
    }
    if !fields.point_scalars.is_empty() || !fields.point_vectors.is_empty() {
        let _ = writeln!(out, "POINT_DATA {}", mesh.num_nodes());
        for (name, v) in &fields.point_scalars {
            scalars(&mut out, name, v);
        }
        for (name, v) in &fields.point_vectors {
            let _ = writeln!(out, "VECTORS {name} double");
            for x in v {
                let _ = writeln!(out, "{:e} {:e} 0", x[0], x[1]);
            }
        }
    }
    // region index, in sorted region-name order
    let regions: Vec<String> = mesh.regions().into_iter().collect();
    let _ = writeln!(out, "CELL_DATA {}", mesh.num_elements());
    let _ = writeln!(out, "SCALARS region int 1\nLOOKUP_TABLE default");
    for el in &mesh.elements {
        let _ = writeln!(out, "{}", regions.binary_search(&el.region).unwrap_or(0));
    }
    for (name, v) in &fields.cell_scalars {
        scalars(&mut out, name, v);
    }
    Ok(out)
}

pub fn write_vtk(path: impl AsRef<Path>, mesh: &PolygonalMesh, fields: &VtkFields) -> Result<()> {
    std::fs::write(path, vtk_string(mesh, fields)?)?;
    Ok(())
}

/// Point and cell counts declared in a legacy file, with a check that each
/// section holds as many entries as declared.
pub fn vtk_counts(text: &str) -> Result<(usize, usize)> {
    let lines: Vec<&str> = text.lines().collect();
    let header = |key: &str| -> Result<(usize, usize)> {
        let i = lines
            .iter()
            .position(|l| l.starts_with(key))
            .ok_or_else(|| VemError::Config(format!("vtk file lacks a {key} section")))?;
        let n = lines[i]
            .split_whitespace()
            .nth(1)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| VemError::Config(format!("malformed {key} header")))?;
        Ok((i, n))
    };
    let (pi, points) = header("POINTS")?;
    let (ci, cells) = header("CELLS")?;
    let (ti, types) = header("CELL_TYPES")?;
    if ci - pi - 1 != points || ti - ci - 1 != cells || types != cells {
        return Err(VemError::Config("vtk section sizes disagree with their headers".into()));
    }
    for l in &lines[ci + 1..ti] {
        let mut it = l.split_whitespace();
        let n: usize = it.next().and_then(|s| s.parse().ok()).unwrap_or(0);
        if it.count() != n || n < 3 {
            return Err(VemError::Config(format!("malformed cell line '{l}'")));
        }
    }
    Ok((points, cells))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_quad_mesh;

    #[test]
    fn counts_round_trip_and_size_check() {
        let mesh = generate_quad_mesh([0.0, 2.0], [0.0, 1.0], 3, 2, "a").unwrap();
        let fields = VtkFields { cell_scalars: vec![("von_mises".into(), vec![1.5; 6])], ..Default::default() };
        let text = vtk_string(&mesh, &fields).unwrap();
        assert_eq!(vtk_counts(&text).unwrap(), (12, 6));
        assert!(text.contains("CELL_TYPES 6\n7\n"));
        let short = VtkFields { point_scalars: vec![("t".into(), vec![0.0; 3])], ..Default::default() };
        assert!(matches!(vtk_string(&mesh, &short), Err(VemError::MeshMismatch(_))));
    }
}
