use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::intalg::{IntMatrix, IntVector};
use crate::lattice::RealMatrix;

pub(crate) fn rational(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::Invalid(format!("non-finite value {x}")))
}

/// `M·Ψ` as exact rationals (every finite `f64` is a dyadic rational).
pub(crate) fn exact_product(m: &RealMatrix, psi: &IntMatrix) -> Result<Vec<Vec<BigRational>>> {
    let d = m.rows();
    if m.cols() != d || psi.rows() != d || psi.cols() != d {
        return Err(Error::DimensionMismatch(
            "real matrix and integer modulus must be square of equal size".into(),
        ));
    }
    let mq = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| rational(m.get(i, j)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    (0..d).fold(BigRational::zero(), |acc, k| {
                        acc + &mq[i][k] * BigRational::from_integer(psi[(k, j)].clone())
                    })
                })
                .collect()
        })
        .collect())
}

/// Solves `B·x = y` by Gauss-Jordan elimination in exact rationals.
pub(crate) fn solve_exact(b: &[Vec<BigRational>], y: &[BigRational]) -> Result<Vec<BigRational>> {
    let d = b.len();
    let mut a: Vec<Vec<BigRational>> = b
        .iter()
        .zip(y)
        .map(|(row, v)| {
            row.iter()
                .cloned()
                .chain(std::iter::once(v.clone()))
                .collect()
        })
        .collect();
    for c in 0..d {
        let p = (c..d)
            .find(|&r| !a[r][c].is_zero())
            .ok_or(Error::Singular)?;
        a.swap(c, p);
        let inv = BigRational::one() / &a[c][c];
        for x in &mut a[c][c..] {
            *x = &*x * &inv;
        }
        let pivot = a[c].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != c && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, p) in row[c..].iter_mut().zip(&pivot[c..]) {
                    *x -= &f * p;
                }
            }
        }
    }
    Ok(a.into_iter().map(|row| row[d].clone()).collect())
}

/// Writes `m = MΨ·n + r` with `r ∈ F(MΨ)` and `n = ⌊(MΨ)⁻¹m⌋`.
///
/// The floor is taken on the exact rational value of `(MΨ)⁻¹m`, so points on
/// the half-open boundary land on the closed side regardless of rounding.
/// `r` is computed exactly and then rounded to `f64`.
pub fn real_remainder(
    m: &[f64],
    real: &RealMatrix,
    psi: &IntMatrix,
) -> Result<(IntVector, Vec<f64>)> {
    let b = exact_product(real, psi)?;
    if m.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "vector of dimension {} for a {}×{} modulus",
            m.len(),
            b.len(),
            b.len()
        )));
    }
    let mq = m.iter().map(|&x| rational(x)).collect::<Result<Vec<_>>>()?;
    let x = solve_exact(&b, &mq)?;
    let n: Vec<BigInt> = x.iter().map(|q| q.floor().to_integer()).collect();
    let r = mq
        .iter()
        .enumerate()
        .map(|(i, mi)| {
            let bn = n
                .iter()
                .enumerate()
                .fold(BigRational::zero(), |acc, (k, nk)| {
                    acc + &b[i][k] * BigRational::from_integer(nk.clone())
                });
            (mi - bn).to_f64().unwrap_or(f64::NAN)
        })
        .collect();
    Ok((IntVector::new(n), r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intalg::mod_reduce;

    #[test]
    fn zero_maps_to_zero() {
        let psi = IntMatrix::from_rows(&[[3, 1], [1, 2]]);
        let m = RealMatrix::from_rows(&[[0.7, 0.2], [-0.1, 1.3]]);
        let (n, r) = real_remainder(&[0.0, 0.0], &m, &psi).unwrap();
        assert!(n.is_zero());
        assert_eq!(r, vec![0.0, 0.0]);
    }

    #[test]
    fn identity_matches_integer_path() {
        let psi = IntMatrix::from_rows(&[[5850, 9000], [2580, 2940]]);
        for v in [
            [-5365350i64, -2402280],
            [12, -7],
            [0, 1],
            [5850, 2580],
            [-1, -1],
        ] {
            let iv = IntVector::from_i64s(&v);
            let (n, r) = real_remainder(&iv.to_f64(), &RealMatrix::identity(2), &psi).unwrap();
            let (en, er) = mod_reduce(&iv, &psi).unwrap();
            assert_eq!(n, en);
            assert_eq!(r, er.to_f64());
        }
    }

    #[test]
    fn boundary_point_goes_to_closed_side() {
        // m = MΨ·(1, 0) exactly, so n = (1, 0) and r = 0
        let psi = IntMatrix::from_rows(&[[2, 0], [0, 3]]);
        let m = RealMatrix::from_rows(&[[0.5, 0.25], [0.0, 0.75]]);
        let (n, r) = real_remainder(&[1.0, 0.0], &m, &psi).unwrap();
        assert_eq!(n, IntVector::from_i64s(&[1, 0]));
        assert_eq!(r, vec![0.0, 0.0]);
    }

    #[test]
    fn round_trip_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let e: Vec<f64> = (0..4).map(|_| rng.random_range(-3.0..3.0)).collect();
            let m = RealMatrix::from_rows(&[[e[0], e[1]], [e[2], e[3]]]);
            if m.determinant().abs() < 0.1 {
                continue;
            }
            let psi = IntMatrix::from_rows(&[[4, 1], [-2, 5]]);
            let v: Vec<f64> = (0..2).map(|_| rng.random_range(-1e4..1e4)).collect();
            let (n, r) = real_remainder(&v, &m, &psi).unwrap();
            let b = m.mul_int(&psi);
            let back: Vec<f64> = b
                .mul_int_vec(n.entries())
                .iter()
                .zip(&r)
                .map(|(a, b)| a + b)
                .collect();
            for (a, b) in back.iter().zip(&v) {
                assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
            }
            let x = b.inverse().unwrap().mul_vec(&r);
            assert!(x.iter().all(|&c| c > -1e-9 && c < 1.0 + 1e-9));
        }
    }

    #[test]
    fn singular_is_rejected() {
        let psi = IntMatrix::from_rows(&[[1, 0], [0, 1]]);
        let m = RealMatrix::from_rows(&[[1.0, 2.0], [0.5, 1.0]]);
        assert_eq!(real_remainder(&[1.0, 1.0], &m, &psi), Err(Error::Singular));
    }
}
