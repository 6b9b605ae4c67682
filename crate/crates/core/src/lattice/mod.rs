//! Full-rank lattices: minimum distance, closest points, coset
//! representatives and fundamental-parallelepiped membership.

mod basis;
mod cosets;
mod lll;
mod real;

pub use basis::{lll_reduce, CvpResult, LatticeBasis, LatticeConfig, Norm};
pub use cosets::{coset_representatives, DEFAULT_COSET_CAP};
pub use real::RealMatrix;
