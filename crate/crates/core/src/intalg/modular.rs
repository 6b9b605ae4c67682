use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

use super::matrix::{IntMatrix, IntVector};
use crate::error::{Error, Result};

/// Division `m = M·n + r` with `r ∈ N(M)`.
///
/// `r = M·(adj(M)·m mod det(M)) / det(M)` where the elementwise reduction uses
/// floor semantics, so `adj(M)·r / det(M)` lands in `[0, 1)` for either sign
/// of the determinant. The folding vector is `n = ⌊M⁻¹m⌋`.
pub fn mod_reduce(m: &IntVector, modulus: &IntMatrix) -> Result<(IntVector, IntVector)> {
    let det = modulus.determinant()?;
    if det.is_zero() {
        return Err(Error::Singular);
    }
    let adj = modulus.adjugate()?;
    let scaled = adj.try_mul_vec(m)?;
    let (quot, rem): (Vec<BigInt>, Vec<BigInt>) =
        scaled.iter().map(|x| x.div_mod_floor(&det)).unzip();
    let mr = modulus * &IntVector::new(rem);
    let r = IntVector::new(mr.into_inner().into_iter().map(|x| x / &det).collect());
    let n = IntVector::new(quot);
    debug_assert_eq!(&(modulus * &n) + &r, *m);
    Ok((n, r))
}

/// Remainder only, `⟨m⟩_M`.
pub fn remainder(m: &IntVector, modulus: &IntMatrix) -> Result<IntVector> {
    Ok(mod_reduce(m, modulus)?.1)
}

/// Exact test `M⁻¹k ∈ [0, 1)^D`.
pub fn in_parallelepiped(k: &IntVector, modulus: &IntMatrix) -> Result<bool> {
    let det = modulus.determinant()?;
    if det.is_zero() {
        return Err(Error::Singular);
    }
    let scaled = modulus.adjugate()?.try_mul_vec(k)?;
    Ok(scaled.iter().all(|x| {
        // 0 <= x/det < 1
        let q = x.div_floor(&det);
        q.is_zero()
    }))
}
