//! Statevector VQE inside a complete active space, two-step orbital
//! optimization, and adiabatic-connection (AC0/AC) correlation corrections,
//! with a determinant-space exact solver used as baseline and oracle.

pub mod error;
pub mod integrals;
pub mod linalg;

pub use error::{Error, Result};
pub mod ac;
pub mod ansatz;
pub mod bits;
pub mod commutators;
pub mod exactsolver;
pub mod operators;
pub mod optimize;
pub mod orbital_opt;
pub mod rdm;
pub mod statevector;
pub mod vqe;

/// Crate version, stamped into emitted result records.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
