//! Exact integer-matrix algebra: determinants, adjugates, Smith forms,
//! matrix gcd/lcm and modular reduction of integer vectors.

mod divisor;
mod matrix;
mod modular;
mod smith;

pub use divisor::{gcld, gcrd, lclm, lcrm, lcrm_many, BezoutCertificate};
pub use matrix::{IntMatrix, IntVector};
pub use modular::{in_parallelepiped, mod_reduce, remainder};
pub use smith::{smith_normal_form, SmithDecomposition};
