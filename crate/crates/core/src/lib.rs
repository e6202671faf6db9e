//! Facet orientation repair for polylines and triangle meshes by minimizing
//! the Dirichlet energy of the generalized winding number.
//!
//! Pipeline: [`patching::extract_patches`] groups facets into orientable
//! patches, [`energy::assemble_q`] builds the patch interaction matrix from
//! boundary integrals, [`solver`] minimizes the resulting binary quadratic
//! program, and [`patching::apply_signs`] writes the chosen orientation back.

pub mod cli;
pub mod energy;
pub mod error;
pub mod field;
pub mod fixtures;
pub mod io;
pub mod mesh;
pub mod patching;
mod quadrature;
pub mod solver;
pub mod winding;

pub use energy::{QEntry, QMatrix, QuadratureConfig};
pub use error::{Error, Result};
pub use mesh::{Dimension, DimensionConstants, SurfaceMesh, Vec3};
pub use patching::{apply_signs, extract_patches, PatchDecomposition};
pub use solver::SolveResult;
pub use winding::SignAssignment;
