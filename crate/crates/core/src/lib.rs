//! Finite element kernels for incompressible Navier-Stokes using an
//! incremental pressure-correction fractional-step scheme on 2D triangle meshes.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, logging setup and
//! the command-line driver live in the companion `nsfrac` crate.
//!
//! Module map:
//!
//! - [`mesh`]: structured rectangle triangulations, periodic vertex pairing, stretching.
//! - [`fem`]: Lagrange P1-P4 basis, quadrature, dof maps, interpolation, Dirichlet sets.
//! - [`sparse`]: CSR matrices with frozen patterns and Krylov solvers.
//! - [`assembly`]: mass, stiffness, convection, gradient and divergence operators.
//! - [`fracstep`]: the time loop, naive and preassembled IPCS solvers, scalars.
//! - [`problems`]: the problem interface and the built-in flows.
//! - [`verify`]: error norms, convergence orders and study runners.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod assembly;
pub mod error;
pub mod fem;
pub mod fracstep;
pub mod mesh;
pub mod params;
pub mod problems;
pub mod sparse;
pub mod verify;

pub use error::{Error, Result};
