use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::intalg::{smith_normal_form, IntMatrix, IntVector};

pub const DEFAULT_COSET_CAP: u64 = 10_000_000;

/// The `|det M|` points of `N(M)`, sorted lexicographically.
///
/// `U·M·V = Λ` identifies `Z^D / L(M)` with `⊕ Z/δ_i`, so each Smith coordinate
/// tuple `c` gives one coset; `U⁻¹c` is a member and its remainder modulo `M`
/// is the representative inside the parallelepiped.
pub fn coset_representatives(m: &IntMatrix, cap: u64) -> Result<Vec<IntVector>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("modulus must be square".into()));
    }
    let det = m.determinant()?;
    if det.is_zero() {
        return Err(Error::Singular);
    }
    let size = det.abs();
    if size > BigInt::from(cap) {
        return Err(Error::CosetCapExceeded {
            size: size.to_string(),
            cap,
        });
    }
    let d = m.rows();
    let s = smith_normal_form(m);
    let u_inv = s.u.unimodular_inverse()?;
    let adj = m.adjugate()?;
    let deltas: Vec<i64> = s
        .invariant_factors
        .iter()
        .map(|x| x.to_i64().expect("bounded by the cap"))
        .collect();

    let total = size.to_usize().expect("bounded by the cap");
    let mut out = Vec::with_capacity(total);
    let mut c = vec![0i64; d];
    for _ in 0..total {
        let k = &u_inv * &IntVector::from_i64s(&c);
        // k − M·⌊M⁻¹k⌋
        let q: Vec<BigInt> = (&adj * &k).iter().map(|x| x.div_floor(&det)).collect();
        out.push(&k - &(m * &IntVector::new(q)));
        for (ci, &di) in c.iter_mut().zip(&deltas) {
            *ci += 1;
            if *ci < di {
                break;
            }
            *ci = 0;
        }
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intalg::{in_parallelepiped, remainder};
    use std::collections::BTreeSet;

    /// Scan the integer bounding box of the parallelepiped spanned by the
    /// columns and keep the points passing the exact membership test.
    fn bounding_box_scan(m: &IntMatrix) -> Vec<IntVector> {
        let d = m.rows();
        let mut lo = vec![0i64; d];
        let mut hi = vec![0i64; d];
        for i in 0..d {
            for j in 0..d {
                let x = m.get(i, j).to_i64().unwrap();
                if x < 0 {
                    lo[i] += x;
                } else {
                    hi[i] += x;
                }
            }
        }
        let mut out = Vec::new();
        let mut p = lo.clone();
        loop {
            let v = IntVector::from_i64s(&p);
            if in_parallelepiped(&v, m).unwrap() {
                out.push(v);
            }
            let mut i = 0;
            loop {
                if i == d {
                    out.sort();
                    return out;
                }
                p[i] += 1;
                if p[i] <= hi[i] {
                    break;
                }
                p[i] = lo[i];
                i += 1;
            }
        }
    }

    #[test]
    fn diagonal_and_identity() {
        let reps = coset_representatives(&IntMatrix::diag(&[2, 3]), DEFAULT_COSET_CAP).unwrap();
        let expected: Vec<IntVector> = (0..2)
            .flat_map(|i| (0..3).map(move |j| IntVector::from_i64s(&[i, j])))
            .collect();
        assert_eq!(reps, expected);
        let reps = coset_representatives(&IntMatrix::identity(2), DEFAULT_COSET_CAP).unwrap();
        assert_eq!(reps, vec![IntVector::zeros(2)]);
    }

    #[test]
    fn matches_bounding_box_scan() {
        for rows in [
            [[1, 3], [3, 1]],
            [[96, 40], [16, 80]],
            [[5, 2], [5, 3]],
            [[-4, 7], [3, -2]],
        ] {
            let m = IntMatrix::from_rows(&rows);
            let reps = coset_representatives(&m, DEFAULT_COSET_CAP).unwrap();
            assert_eq!(reps, bounding_box_scan(&m));
        }
        let m = IntMatrix::from_rows(&[[1, 3], [3, 1]]);
        assert_eq!(
            coset_representatives(&m, DEFAULT_COSET_CAP).unwrap().len(),
            8
        );
    }

    #[test]
    fn three_dimensional_cosets_are_distinct() {
        let m = IntMatrix::from_rows(&[[2, 1, 0], [0, 3, 1], [1, 0, 4]]);
        let reps = coset_representatives(&m, DEFAULT_COSET_CAP).unwrap();
        assert_eq!(reps.len(), 25);
        let set: BTreeSet<_> = reps.iter().map(|r| remainder(r, &m).unwrap()).collect();
        assert_eq!(set.len(), 25);
        assert_eq!(reps, bounding_box_scan(&m));
    }

    #[test]
    fn cap_and_singular() {
        let m = IntMatrix::diag(&[100, 100]);
        assert!(matches!(
            coset_representatives(&m, 9999),
            Err(Error::CosetCapExceeded { .. })
        ));
        assert_eq!(
            coset_representatives(&IntMatrix::from_rows(&[[1, 2], [2, 4]]), 10),
            Err(Error::Singular)
        );
    }
}
