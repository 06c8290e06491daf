//! Virtual element (VEM) and stabilization-free virtual element (SFVEM)
//! solvers for steady heat conduction and one-way thermoelasticity on 2D
//! polygonal meshes.

pub mod assembly;
pub mod benchmarks;
pub mod error;
pub mod geometry;
pub mod io;
pub mod material;
pub mod mesh;
pub mod monomial;
pub mod pipeline;
pub mod postprocess;
pub mod quadrature;
pub mod sfvem;
pub mod solver;
pub mod vem;

pub use error::{Result, VemError};
