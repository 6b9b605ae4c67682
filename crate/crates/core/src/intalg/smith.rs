//! Smith normal form of integer matrices of any shape.
//!
//! The reduction is the textbook one: bring the smallest nonzero entry of the
//! trailing submatrix to the pivot, clear its row and column with elementary
//! unimodular operations, and fold any entry not divisible by the pivot back
//! into the pivot row so the next round produces a smaller pivot. Every pivot
//! divides the whole trailing submatrix once it is accepted, which gives the
//! divisibility chain without a separate fix-up pass.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::matrix::IntMatrix;

/// `U · M · V = Λ` with unimodular `U` (D×D) and `V` (K×K).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithDecomposition {
    pub u: IntMatrix,
    pub v: IntMatrix,
    /// The D×K block form `(Λ 0)`, `Λ`, or `(Λ; 0)`.
    pub form: IntMatrix,
    /// `δ_1 … δ_min(D,K)`, nonnegative, zeros after the rank.
    pub invariant_factors: Vec<BigInt>,
}

impl SmithDecomposition {
    pub fn rank(&self) -> usize {
        self.invariant_factors
            .iter()
            .take_while(|d| !d.is_zero())
            .count()
    }
}

struct Work {
    a: IntMatrix,
    u: IntMatrix,
    v: IntMatrix,
}

impl Work {
    fn swap_rows(&mut self, i: usize, k: usize) {
        if i == k {
            return;
        }
        for m in [&mut self.a, &mut self.u] {
            for j in 0..m.cols() {
                let x = m.get(i, j).clone();
                let y = m.get(k, j).clone();
                m.set(i, j, y);
                m.set(k, j, x);
            }
        }
    }

    fn swap_cols(&mut self, j: usize, k: usize) {
        if j == k {
            return;
        }
        for m in [&mut self.a, &mut self.v] {
            for i in 0..m.rows() {
                let x = m.get(i, j).clone();
                let y = m.get(i, k).clone();
                m.set(i, j, y);
                m.set(i, k, x);
            }
        }
    }

    /// row_i += q · row_k
    fn add_row(&mut self, i: usize, k: usize, q: &BigInt) {
        for m in [&mut self.a, &mut self.u] {
            for j in 0..m.cols() {
                let v = m.get(i, j) + q * m.get(k, j);
                m.set(i, j, v);
            }
        }
    }

    /// col_j += q · col_k
    fn add_col(&mut self, j: usize, k: usize, q: &BigInt) {
        for m in [&mut self.a, &mut self.v] {
            for i in 0..m.rows() {
                let v = m.get(i, j) + q * m.get(i, k);
                m.set(i, j, v);
            }
        }
    }

    fn negate_row(&mut self, i: usize) {
        for m in [&mut self.a, &mut self.u] {
            for j in 0..m.cols() {
                let v = -m.get(i, j);
                m.set(i, j, v);
            }
        }
    }

    /// Position of the smallest nonzero entry in the trailing block, preferring
    /// the current pivot on ties.
    fn smallest_entry(&self, t: usize) -> Option<(usize, usize)> {
        let (rows, cols) = (self.a.rows(), self.a.cols());
        let mut best: Option<((usize, usize), BigInt)> = None;
        if !self.a.get(t, t).is_zero() {
            best = Some(((t, t), self.a.get(t, t).abs()));
        }
        for i in t..rows {
            for j in t..cols {
                let x = self.a.get(i, j);
                if x.is_zero() {
                    continue;
                }
                let ax = x.abs();
                if best.as_ref().is_none_or(|(_, b)| ax < *b) {
                    best = Some(((i, j), ax));
                }
            }
        }
        best.map(|(p, _)| p)
    }
}

/// Nearest-integer quotient `round(a / p)`.
fn nearest_quotient(a: &BigInt, p: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    (a * &two + p).div_floor(&(p * &two))
}

pub fn smith_normal_form(m: &IntMatrix) -> SmithDecomposition {
    let (rows, cols) = (m.rows(), m.cols());
    let mut w = Work {
        a: m.clone(),
        u: IntMatrix::identity(rows),
        v: IntMatrix::identity(cols),
    };
    let steps = rows.min(cols);

    'pivots: for t in 0..steps {
        loop {
            let Some((pi, pj)) = w.smallest_entry(t) else {
                break 'pivots;
            };
            w.swap_rows(t, pi);
            w.swap_cols(t, pj);
            let p = w.a.get(t, t).clone();

            let mut clean = true;
            for i in t + 1..rows {
                if w.a.get(i, t).is_zero() {
                    continue;
                }
                let q = nearest_quotient(w.a.get(i, t), &p);
                w.add_row(i, t, &-q);
                clean &= w.a.get(i, t).is_zero();
            }
            for j in t + 1..cols {
                if w.a.get(t, j).is_zero() {
                    continue;
                }
                let q = nearest_quotient(w.a.get(t, j), &p);
                w.add_col(j, t, &-q);
                clean &= w.a.get(t, j).is_zero();
            }
            if !clean {
                continue;
            }

            let offender =
                (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !w.a.get(i, j).is_multiple_of(&p)));
            match offender {
                Some(i) => w.add_row(t, i, &BigInt::from(1)),
                None => break,
            }
        }
        if w.a.get(t, t).is_negative() {
            w.negate_row(t);
        }
    }

    let invariant_factors = (0..steps).map(|i| w.a.get(i, i).clone()).collect();
    SmithDecomposition {
        u: w.u,
        v: w.v,
        form: w.a,
        invariant_factors,
    }
}
