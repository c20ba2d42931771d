//! Exact-diagonalization toolkit for treating local subsystems of a quenched
//! Ising chain as quantum stopwatches.
//!
//! The crate computes subsystem quantum Fisher information, out-of-time-ordered
//! correlators, and Lyapunov exponents for the chaotic transverse-field Ising
//! chain with a longitudinal field, and verifies the inequalities relating
//! them (generalized Cramér–Rao, cosine envelope, Lyapunov lower bound, QFI
//! sandwich) together with the ancilla-clock equalities.

extern crate blas_src;

/// Complex double-precision scalar used throughout.
pub type C64 = num_complex::Complex<f64>;

pub mod clock;
pub mod dynamics;
pub mod error;
pub(crate) mod linalg;
pub mod metrology;
pub mod operators;
pub mod scrambling;
pub mod sweep;

pub use error::{Error, Result};
