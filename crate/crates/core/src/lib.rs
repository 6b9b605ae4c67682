//! Exact and robust reconstruction of integer vectors from remainders modulo
//! nonsingular integer matrices.

pub mod error;
pub mod freqsim;
pub mod intalg;
pub mod lattice;
pub mod mdcrt;
pub mod realcrt;
pub mod wire;

pub use error::{Error, Result};
pub use intalg::{IntMatrix, IntVector};
pub use lattice::{LatticeBasis, Norm, RealMatrix};
