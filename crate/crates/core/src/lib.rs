//! High-order nodal discontinuous Galerkin solver for the first-order
//! acoustic wave equation on hybrid meshes of tetrahedra and vertically
//! mapped wedges.
//!
//! The wedge operators are stored in Kronecker-factored form: one dense
//! triangle-sized lift matrix and three edge lift blocks per element, plus a
//! handful of geometric scalars. Tetrahedra are affine and store only scalars.

pub mod analysis;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod mesh;
pub mod operators;
pub mod reference;
pub mod solver;

pub use error::{Error, Result};
