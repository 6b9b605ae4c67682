//! Robust reconstruction of real vectors `m = MΨ_i n_i + r_i` with integer
//! `Ψ_i` and a real `M`. Floats are confined to the real lattices; after the
//! closest-point step everything is snapped back to integers.

mod remainder;
mod system;

pub use remainder::real_remainder;
pub use system::{RealCongruenceSystem, RealPairInfo, RealRobustResult, INTEGER_SNAP_TOLERANCE};
