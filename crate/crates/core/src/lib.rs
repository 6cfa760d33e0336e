//! Discrete-time quantum walks in (1+1) dimensions that reproduce Dirac and
//! Majorana fermion dynamics.
//!
//! * [`lattice`]: periodic lattice, walker states, plane waves, charge
//!   conjugation and basis changes.
//! * [`coin`]: Lorentz-covariant coin operators and gamma-matrix bases.
//! * [`walk`]: the SB, BS, BSB, SBS and SQW step rules and evolution.
//! * [`momentum`]: momentum-space blocks, dispersion and splitting-order fits.
//! * [`observables`]: distributions, entanglement entropy, the Bloch-sphere
//!   `<x>` map and the shift angle.
//! * [`circuit`]: gate-level compilation, statevector simulation and
//!   OpenQASM 2.0 export.

pub mod circuit;
pub mod coin;
pub mod error;
pub mod lattice;
pub mod linalg;
pub mod momentum;
pub mod observables;
pub mod walk;

pub use error::{Error, Result};
pub use num_complex::Complex64;
