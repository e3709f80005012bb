//! Symmetric-tensor algebra, the Taylor basis, and model geometries.

pub mod geometry;
pub mod multi_index;
pub mod potential;
pub mod symtensor;
pub mod taylor;

pub use geometry::{build_model_geometry, build_model_geometry_capped, GeometryKind, ModelGeometry};
pub use potential::PotentialJet;
pub use symtensor::{inner_product, sym_power, sym_product, SymTensor};
pub use taylor::{basis_pairing, taylor_basis_pairing, MatPoly, Poly, TaylorSeries};
