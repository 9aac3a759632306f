//! Exact canonical-ensemble solver for quantum spin models with strong
//! long-range interactions (power-law decay rate below the lattice
//! dimension), instantiated for the transverse-field Ising chain.
//!
//! The pipeline: build the Kac-rescaled coupling matrix ([`lattice`]),
//! eigendecompose it and keep the few modes with non-negligible eigenvalues
//! ([`spectral`]), maximize the saddle-point exponent over those mode
//! amplitudes ([`saddle`]), and evaluate magnetization, susceptibilities and
//! the phase diagram from the maximizer ([`observables`]). A brute-force
//! exact-diagonalization oracle ([`oracle`]) validates the whole stack at
//! small site counts.

pub mod config;
pub mod error;
pub mod lattice;
pub mod linalg;
pub mod observables;
pub mod oracle;
pub mod saddle;
pub mod spectral;

pub use error::{Error, Result};
