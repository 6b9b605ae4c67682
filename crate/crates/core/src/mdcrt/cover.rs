use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::error::Result;
use crate::intalg::{mod_reduce, smith_normal_form, IntMatrix, IntVector};

/// A right associate `R·W⁻¹` of `lcrm` (same lattice) whose range for the
/// given reference contains `m`, i.e. `⌊M_{l0}⁻¹m⌋ ∈ N(M_{l0}⁻¹R·W⁻¹)`.
///
/// With `K = M_{l0}⁻¹R` and `c = K⁻¹⌊M_{l0}⁻¹m⌋ = p/q`, the condition reads
/// `W·c ∈ [0,1)^D` for a unimodular `W`. The content `g = gcd(p)` is invariant
/// under unimodular maps and every nonzero entry of such a `W·p` is at least
/// `g`, so a solution exists iff `p = 0` or `g < q`; then `W` sends `p` to
/// `(g, 0, …, 0)`. Returns `None` when no associate covers `m`.
pub fn covering_lcrm(
    reference_modulus: &IntMatrix,
    lcrm: &IntMatrix,
    m: &IntVector,
) -> Result<Option<IntMatrix>> {
    let (z, _) = mod_reduce(m, reference_modulus)?;
    let k = reference_modulus
        .left_quotient(lcrm)?
        .expect("the lcrm is a right multiple of the reference modulus");
    let mut q = k.determinant()?;
    let mut p = &k.adjugate()? * &z;
    if q.is_negative() {
        q = -q;
        p = -p;
    }
    let g = p.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return Ok(Some(lcrm.clone()));
    }
    if g >= q {
        return Ok(None);
    }
    let column = IntMatrix::new(p.dim(), 1, p.entries().to_vec())?;
    let s = smith_normal_form(&column);
    // U·p·v = (g, 0, …)ᵀ with v = ±1
    let mut w = s.u;
    if s.v[(0, 0)].is_negative() {
        for j in 0..w.cols() {
            let x = -w[(0, j)].clone();
            w.set(0, j, x);
        }
    }
    debug_assert_eq!((&w * &p)[0], g);
    Ok(Some(lcrm * &w.unimodular_inverse()?))
}
