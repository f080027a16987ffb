//! Dirac spinors of a massive neutral spin-1/2 particle on flat and static
//! curved backgrounds: the basic spin-tensorial fields and their identities,
//! the Levi-Civita spin connection, the Dirac equation and its time
//! evolution, the conserved current and its hypersurface pairing, and the
//! fermionic Fock space over an orthonormal mode basis.

pub mod cli;
pub mod config;
pub mod dirac_dynamics;
pub mod error;
pub mod field;
pub mod fock;
pub mod geometry;
pub mod grid;
pub mod linalg;
pub mod pairing;
pub mod spin_algebra;

pub use error::{Error, Result};
pub use field::{CurrentField, SpinorField};
pub use grid::Grid;
pub use spin_algebra::{canonical_gamma_set, GammaSet, PhysicalConstants};
