//! Sparse spectral graph filters built from decoupled positive and negative
//! polynomial bases, with the activation calculus that motivates them,
//! hand-differentiated training for node classification, and dense oracles
//! for checking all of it.

pub mod basis;
pub mod data;
pub mod experiment;
pub mod error;
pub mod graph;
pub mod matrix;
pub mod model;
pub mod pnca;
pub mod verify;

pub use basis::{build_basis_cache, gsc_combine, BasisCache, FilterSpec};
pub use error::{Error, Result};
pub use graph::{build_csr, laplacian_apply, shifted_apply, SparseGraph};
pub use matrix::{FeatureMatrix, Matrix};
