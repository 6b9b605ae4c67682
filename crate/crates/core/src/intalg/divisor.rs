//! Greatest common divisors and least common multiples of nonsingular integer
//! matrices, computed through Smith forms.
//!
//! Left divisors and right multiples describe lattice containment:
//! `L(gcld(M, N)) = L(M) + L(N)` and `L(lcrm(M, N)) = L(M) ∩ L(N)`. Both are
//! unique only up to a right unimodular factor; callers that compare results
//! should use [`IntMatrix::lattice_equal`].

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::matrix::IntMatrix;
use super::smith::smith_normal_form;
use crate::error::{Error, Result};

/// A gcld `L` together with Bezout matrices satisfying `M·P + N·Q = L`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BezoutCertificate {
    pub gcld: IntMatrix,
    pub p: IntMatrix,
    pub q: IntMatrix,
}

fn require_pair(m: &IntMatrix, n: &IntMatrix) -> Result<()> {
    if !m.is_square() || !n.is_square() || m.rows() != n.rows() {
        return Err(Error::DimensionMismatch(format!(
            "expected two square matrices of equal size, got {}x{} and {}x{}",
            m.rows(),
            m.cols(),
            n.rows(),
            n.cols()
        )));
    }
    if m.determinant()?.is_zero() || n.determinant()?.is_zero() {
        return Err(Error::Singular);
    }
    Ok(())
}

/// Greatest common left divisor via the Smith form of `(M N)`.
///
/// With `U (M N) V = (Λ 0)` we get `L = U⁻¹Λ`, and the left column blocks of
/// `V` are the Bezout matrices.
pub fn gcld(m: &IntMatrix, n: &IntMatrix) -> Result<BezoutCertificate> {
    require_pair(m, n)?;
    let d = m.rows();
    let h = m.hstack(n)?;
    let s = smith_normal_form(&h);
    let lambda = s.form.block(0, 0, d, d);
    let gcld = &s.u.unimodular_inverse()? * &lambda;
    let p = s.v.block(0, 0, d, d);
    let q = s.v.block(d, 0, d, d);
    debug_assert_eq!(&(m * &p) + &(n * &q), gcld);
    Ok(BezoutCertificate { gcld, p, q })
}

/// Greatest common right divisor, by transposing the left computation.
pub fn gcrd(m: &IntMatrix, n: &IntMatrix) -> Result<IntMatrix> {
    Ok(gcld(&m.transpose(), &n.transpose())?.gcld.transpose())
}

/// Least common right multiple `R = M·P = N·Q`.
///
/// `M⁻¹N` is brought to integers by the lcm `d` of its denominators, reduced to
/// Smith form `U·dH·V = Λ`, and each `δ_i/d` is split into coprime `α_i/β_i`;
/// then `P = U⁻¹Λ_α` and `R = M·P`.
pub fn lcrm(m: &IntMatrix, n: &IntMatrix) -> Result<IntMatrix> {
    require_pair(m, n)?;
    let dim = m.rows();
    let det = m.determinant()?;
    let numer = &m.adjugate()? * n;

    // d = lcm of reduced denominators of adj(M)·N / det(M)
    let mut d = BigInt::one();
    for x in numer.entries() {
        let g = x.gcd(&det);
        let den = (&det / &g).abs();
        d = d.lcm(&den);
    }
    let dh = IntMatrix::new(
        dim,
        dim,
        numer.entries().iter().map(|x| x * &d / &det).collect(),
    )?;
    let s = smith_normal_form(&dh);

    let alphas: Vec<BigInt> = s
        .invariant_factors
        .iter()
        .map(|delta| delta / delta.gcd(&d))
        .collect();
    let p = &s.u.unimodular_inverse()? * &IntMatrix::diag(&alphas);
    let r = m * &p;
    debug_assert!({
        let betas: Vec<BigInt> = s
            .invariant_factors
            .iter()
            .map(|delta| &d / delta.gcd(&d))
            .collect();
        let q = &s.v * &IntMatrix::diag(&betas);
        n * &q == r
    });
    Ok(r)
}

/// Least common left multiple, by transposing the right computation.
pub fn lclm(m: &IntMatrix, n: &IntMatrix) -> Result<IntMatrix> {
    Ok(lcrm(&m.transpose(), &n.transpose())?.transpose())
}

/// Iterated `lcrm(lcrm(M_1, …, M_{L-1}), M_L)`.
pub fn lcrm_many(ms: &[IntMatrix]) -> Result<IntMatrix> {
    if ms.len() < 2 {
        return Err(Error::TooFewModuli {
            needed: 2,
            got: ms.len(),
        });
    }
    let mut acc = lcrm(&ms[0], &ms[1])?;
    for m in &ms[2..] {
        acc = lcrm(&acc, m)?;
    }
    Ok(acc)
}
