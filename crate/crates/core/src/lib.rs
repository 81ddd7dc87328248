//! Bergman functions of Fock-Sobolev spaces with conical and bulk
//! singularities, equilibrium data of radial potentials, finite-n
//! polynomial kernels and Monte Carlo sampling of the associated
//! Coulomb gas.
//!
//! Conventions: `Δ = ∂∂̄` is a quarter of the usual Laplacian and areas are
//! measured with `dA = dx dy / π`.

pub mod coulomb_mc;
pub mod equilibrium;
pub mod error;
pub mod finite_kernel;
pub mod fixtures;
pub mod general_bergman;
pub mod potentials;
pub mod quad;
pub mod radial_bergman;
pub mod special_fn;
pub mod stats;

pub use error::{Error, Result};
pub use num_complex::Complex64;
