//! Rescaling matrices and the Grothendieck bound formalism for a single
//! quantum system.
//!
//! The library is organised around a small dense complex matrix type
//! ([`matrix::CMat`]) and builds up:
//!
//! * rescaling matrices (capacity `N(V)`, the sets `S_d` / `T_d`, star
//!   product, dequantisation maps) in [`rescaling`],
//! * the classical and quantum quadratic forms, the suprema `g` and `g'`,
//!   classification into the ultra-quantum set, and the necessary-condition
//!   checker in [`forms`],
//! * square-barrier tunnelling amplitudes and the induced projector blocks
//!   in [`physics`],
//! * the 3x6 semi-unitary construction and its certified `Q > 1`
//!   demonstration in [`ultraquantum`].

pub mod error;
pub mod forms;
pub mod matrix;
pub mod physics;
pub mod rescaling;
pub mod sampling;
pub mod ultraquantum;

pub use error::{Error, Result};
pub use matrix::{CMat, CVec, PermSpec};
