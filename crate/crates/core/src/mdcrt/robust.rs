use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use super::system::CongruenceSystem;
use crate::error::{Error, Result};
use crate::intalg::IntVector;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RobustOptions {
    /// Resolve CVP ties by the lexicographically smallest coefficient vector
    /// instead of failing. The tie stays visible in `cvp_unique`.
    pub allow_ties: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RobustResult {
    /// `m̃ = (1/L)·Σ(M_i ñ_i + r̃_i)`.
    pub estimate: Vec<f64>,
    /// `Σ(M_i ñ_i + r̃_i)`, so the estimate can be rounded exactly.
    pub estimate_sum: IntVector,
    /// `M_i ñ_i` per modulus.
    pub folded: Vec<IntVector>,
    /// `ñ_i` per modulus.
    pub folding_vectors: Vec<IntVector>,
    /// `v_j` per modulus (zero at the reference).
    pub cvp_points: Vec<IntVector>,
    /// Per modulus; always true at the reference.
    pub cvp_unique: Vec<bool>,
    /// `M_{l0} ñ_{l0}`.
    pub zeta: IntVector,
    /// Whether the rounded estimate itself passes the range check. Near the
    /// edge of the range the remainder errors can push it across even when
    /// every `M_i ñ_i` is correct.
    pub within_range: bool,
}

impl RobustResult {
    /// Componentwise nearest integer of the estimate, halves rounded up,
    /// computed from the exact sum.
    pub fn rounded_estimate(&self) -> IntVector {
        let l = BigInt::from(self.folded.len());
        let two = BigInt::from(2);
        IntVector::new(
            self.estimate_sum
                .iter()
                .map(|s| (s * &two + &l).div_floor(&(&l * &two)))
                .collect(),
        )
    }
}

impl CongruenceSystem {
    /// Robust reconstruction from erroneous remainders.
    ///
    /// Only differences of remainders enter the computation, so remainders
    /// slightly outside `N(M_i)` (an error pushed across the parallelepiped
    /// boundary) are accepted as given.
    ///
    /// For each `j ≠ l0` the closest point `v_j` of `L(M_{l0 j})` to
    /// `r̃_j − r̃_{l0}` estimates `M_{l0}n_{l0} − M_j n_j`. The cascade then
    /// solves `ζ ≡ 0 (M_{l0})`, `ζ ≡ v_j (M_j)` for `ζ = M_{l0}ñ_{l0} ∈ N(R)`,
    /// and `M_j ñ_j = ζ − v_j`.
    pub fn robust_reconstruct(
        &self,
        remainders: &[IntVector],
        options: RobustOptions,
    ) -> Result<RobustResult> {
        self.check_len(remainders.len())?;
        let d = self.dim();
        for (i, r) in remainders.iter().enumerate() {
            if r.dim() != d {
                return Err(Error::DimensionMismatch(format!(
                    "remainder {i} has dimension {}",
                    r.dim()
                )));
            }
        }
        let l0 = self.reference();
        let n = self.len();

        let mut cvp_points = vec![IntVector::zeros(d); n];
        let mut cvp_unique = vec![true; n];
        for j in (0..n).filter(|&j| j != l0) {
            let target = &remainders[j] - &remainders[l0];
            let cvp = self.pair(l0, j).lattice.closest_point_exact(&target)?;
            if !cvp.unique && !options.allow_ties {
                return Err(Error::CvpTie {
                    reference: l0,
                    other: j,
                });
            }
            cvp_unique[j] = cvp.unique;
            cvp_points[j] = cvp.exact_point.expect("integer lattice and target");
        }

        let zeta = self.plan().reconstruct(&cvp_points)?;
        let folded: Vec<IntVector> = cvp_points.iter().map(|v| &zeta - v).collect();
        let folding_vectors = folded
            .iter()
            .zip(self.moduli())
            .map(|(f, m)| m.left_solve_vec(f)?.ok_or(Error::Inconsistent { stage: 0 }))
            .collect::<Result<Vec<_>>>()?;

        let estimate_sum = folded
            .iter()
            .zip(remainders)
            .fold(IntVector::zeros(d), |acc, (f, r)| &(&acc + f) + r);
        let estimate = estimate_sum
            .iter()
            .map(|s| s.to_f64().unwrap_or(f64::NAN) / n as f64)
            .collect();

        let mut result = RobustResult {
            estimate,
            estimate_sum,
            folded,
            folding_vectors,
            cvp_points,
            cvp_unique,
            zeta,
            within_range: false,
        };
        result.within_range = self.range_check(&result.rounded_estimate())?;
        Ok(result)
    }
}
