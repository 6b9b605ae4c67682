//! Exact and robust reconstruction of an integer vector from its remainders
//! modulo several nonsingular integer matrices.

mod cascade;
mod cover;
mod robust;
mod system;

pub use cascade::{crt_closed_form_coprime, CascadePlan};
pub use cover::covering_lcrm;
pub use robust::{RobustOptions, RobustResult};
pub use system::{
    build_system, detect_redundant, CongruenceSystem, ModulusBound, PairInfo, Redundancy,
    SystemOptions,
};
