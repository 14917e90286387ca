//! Continuous Lagrange finite elements on triangles.

pub mod basis;
pub mod geometry;
pub mod quadrature;
pub mod space;

pub use basis::{eval_basis, LagrangeBasis};
pub use geometry::{CellGeometry, Tabulation};
pub use quadrature::QuadratureRule;
pub use space::{DirichletBC, Field, LagrangeSpace};
