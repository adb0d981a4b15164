//! Probability-current decompositions, spectral solvers for the Schrödinger,
//! Pauli, Dirac and d'Alembert equations, and residual diagnostics for the
//! identities that connect them, all on uniform periodic lattices.

pub mod algebra;
pub mod decomposition;
pub mod diagnostics;
pub mod error;
pub mod evolvers;
pub mod fields;
pub mod lattice;
pub mod trajectories;

pub use error::{Error, Result};
pub use lattice::{make_grid, Grid};

/// Version of this library, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
