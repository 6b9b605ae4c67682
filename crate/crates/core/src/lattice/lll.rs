//! LLL basis reduction with a tracked unimodular transform.
//!
//! Bases coming out of the Smith route are often badly skewed (entries in the
//! millions spanning a lattice whose minimum is a few hundred), and
//! enumeration over such a basis explores enormous coefficient ranges. Running
//! LLL first keeps the enumeration tree tiny. Integer bases are reduced in
//! exact rationals, real bases in `f64`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

pub(crate) trait Scalar: Clone + PartialOrd + Num + Signed {
    fn from_int(x: &BigInt) -> Self;
    fn round_int(&self) -> BigInt;
    fn delta() -> Self;
}

impl Scalar for f64 {
    fn from_int(x: &BigInt) -> Self {
        x.to_f64().unwrap_or(f64::NAN)
    }
    fn round_int(&self) -> BigInt {
        BigInt::from_f64(self.round()).unwrap_or_default()
    }
    fn delta() -> Self {
        0.99
    }
}

impl Scalar for BigRational {
    fn from_int(x: &BigInt) -> Self {
        BigRational::from_integer(x.clone())
    }
    fn round_int(&self) -> BigInt {
        // floor(x + 1/2)
        let two = BigInt::from(2);
        (self.numer() * &two + self.denom()).div_floor(&(self.denom() * &two))
    }
    fn delta() -> Self {
        BigRational::new(BigInt::from(99), BigInt::from(100))
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// Squared Gram-Schmidt norms and coefficients `μ[i][j]` (j < i).
pub(crate) fn gram_schmidt<T: Scalar>(b: &[Vec<T>]) -> (Vec<T>, Vec<Vec<T>>) {
    let n = b.len();
    let mut star: Vec<Vec<T>> = Vec::with_capacity(n);
    let mut norms: Vec<T> = Vec::with_capacity(n);
    let mut mu = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        let mut v = b[i].clone();
        for j in 0..i {
            let m = dot(&b[i], &star[j]) / norms[j].clone();
            for (x, s) in v.iter_mut().zip(&star[j]) {
                *x = x.clone() - m.clone() * s.clone();
            }
            mu[i][j] = m;
        }
        norms.push(dot(&v, &v));
        star.push(v);
    }
    (norms, mu)
}

/// Reduces the columns `b` in place and returns the transform columns, so that
/// `original · T = reduced` with `T` unimodular.
pub(crate) fn reduce<T: Scalar>(b: &mut [Vec<T>]) -> Vec<Vec<BigInt>> {
    let n = b.len();
    let mut t: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| BigInt::from((i == j) as u8)).collect())
        .collect();
    if n < 2 {
        return t;
    }
    let half = T::one() / (T::one() + T::one());
    let mut k = 1;
    // Hard stop against float stagnation; exact bases always terminate.
    let mut budget = 100_000usize;
    while k < n && budget > 0 {
        budget -= 1;
        for j in (0..k).rev() {
            let (_, mu) = gram_schmidt(b);
            if mu[k][j].abs() <= half {
                continue;
            }
            let q = mu[k][j].round_int();
            let qs = T::from_int(&q);
            let bj = b[j].clone();
            for (x, y) in b[k].iter_mut().zip(&bj) {
                *x = x.clone() - qs.clone() * y.clone();
            }
            let tj = t[j].clone();
            for (x, y) in t[k].iter_mut().zip(&tj) {
                *x -= &q * y;
            }
        }
        let (norms, mu) = gram_schmidt(b);
        let m = mu[k][k - 1].clone();
        if norms[k] >= (T::delta() - m.clone() * m) * norms[k - 1].clone() {
            k += 1;
        } else {
            b.swap(k, k - 1);
            t.swap(k, k - 1);
            k = (k - 1).max(1);
        }
    }
    t
}
