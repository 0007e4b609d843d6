//! Complexity geometry on the unitary group of N qubits.
//!
//! Pauli-string algebra, dense norms and distances, penalty schedules,
//! piecewise-constant paths with Euler–Arnold geodesics, a path-to-circuit
//! compiler with measured errors, and closed-form gate-count and diameter
//! bounds.

pub mod bounds;
pub mod cli;
pub mod compile;
pub mod error;
pub mod hamiltonian;
pub mod json;
pub mod linalg;
pub mod path;
pub mod pauli;
pub mod random;
pub mod schedule;
pub mod verify;

pub use error::{Error, Result};
