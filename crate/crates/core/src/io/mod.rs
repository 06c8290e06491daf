//! Configuration, run manifests, VTK output and the solve runner used by
//! the command line.

pub mod config;
pub mod manifest;
pub mod run;
pub mod vtk;

pub use config::{MeshSource, RunConfig};
pub use manifest::{Manifest, Units};
pub use run::{execute, write_outputs, Analysis, RunOutcome, RunSummary};
pub use vtk::{vtk_counts, vtk_string, write_vtk, VtkFields};

use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// Pretty JSON with a trailing newline.
pub fn write_json(path: impl AsRef<Path>, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
