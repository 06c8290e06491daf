//! Analytical oracles and scripted experiments.

pub mod bimaterial;
pub mod cylinder;
pub mod patch;
pub mod rotation;

pub use bimaterial::{bimaterial_mesh, run_bimaterial_demo, BimaterialParams, BimaterialReport};
pub use cylinder::{
    cylinder_exact, cylinder_ode_displacement, nested_quad_levels, run_convergence, run_cylinder_benchmark, ConvergenceReport,
    CylinderExact, CylinderMesh, CylinderParams, CylinderReport, CylinderRun,
};
pub use patch::{elastic_patch, l_shape_mesh, patch_meshes, thermal_patch, PatchReport};
pub use rotation::{run_rotation_study, RotationParams, RotationReport};
