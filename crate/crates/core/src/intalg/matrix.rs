use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Dense integer matrix with arbitrary-precision entries, stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

/// Integer column vector with arbitrary-precision entries.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntVector(Vec<BigInt>);

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<BigInt>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(IntMatrix { rows, cols, data })
    }

    /// Builds a matrix from row slices. Panics on ragged input; intended for
    /// literals in code and tests.
    pub fn from_rows<T, R>(rows: &[R]) -> Self
    where
        T: Into<BigInt> + Clone,
        R: AsRef<[T]>,
    {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), ncols, "ragged rows");
            data.extend(r.iter().cloned().map(Into::into));
        }
        IntMatrix {
            rows: nrows,
            cols: ncols,
            data,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn diag<T: Into<BigInt> + Clone>(entries: &[T]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, e) in entries.iter().enumerate() {
            m.data[i * n + i] = e.clone().into();
        }
        m
    }

    /// Square matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[IntVector]) -> Result<Self> {
        let n = columns.len();
        let d = columns.first().map_or(0, IntVector::dim);
        let mut m = Self::zeros(d, n);
        for (j, c) in columns.iter().enumerate() {
            if c.dim() != d {
                return Err(Error::DimensionMismatch("ragged columns".into()));
            }
            for i in 0..d {
                m.data[i * n + j] = c[i].clone();
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> IntVector {
        IntVector((0..self.rows).map(|i| self.get(i, j).clone()).collect())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        t
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * k).collect(),
        }
    }

    /// Horizontal concatenation `(self other)`.
    pub fn hstack(&self, other: &IntMatrix) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "hstack of {} and {} rows",
                self.rows, other.rows
            )));
        }
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for i in 0..self.rows {
            data.extend_from_slice(self.row(i));
            data.extend_from_slice(other.row(i));
        }
        Ok(IntMatrix {
            rows: self.rows,
            cols,
            data,
        })
    }

    /// Sub-block starting at `(r0, c0)` with the given shape.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols);
        let mut data = Vec::with_capacity(rows * cols);
        for i in r0..r0 + rows {
            data.extend_from_slice(&self.row(i)[c0..c0 + cols]);
        }
        IntMatrix { rows, cols, data }
    }

    pub fn try_mul(&self, rhs: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn try_mul_vec(&self, v: &IntVector) -> Result<IntVector> {
        if self.cols != v.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times vector of length {}",
                self.rows,
                self.cols,
                v.dim()
            )));
        }
        Ok(IntVector(
            (0..self.rows)
                .map(|i| self.row(i).iter().zip(v.iter()).map(|(a, b)| a * b).sum())
                .collect(),
        ))
    }

    fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "square matrix required, got {}x{}",
                self.rows, self.cols
            )))
        }
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Result<BigInt> {
        self.require_square()?;
        let n = self.rows;
        if n == 0 {
            return Ok(BigInt::one());
        }
        let mut a = self.data.clone();
        let mut sign = false;
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k * n + k].is_zero() {
                let Some(p) = (k + 1..n).find(|&i| !a[i * n + k].is_zero()) else {
                    return Ok(BigInt::zero());
                };
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                sign = !sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i * n + j] * &a[k * n + k] - &a[i * n + k] * &a[k * n + j];
                    a[i * n + j] = v / &prev;
                }
            }
            prev = a[k * n + k].clone();
        }
        let d = a[n * n - 1].clone();
        Ok(if sign { -d } else { d })
    }

    /// Matrix with row `i` and column `j` removed.
    fn minor_matrix(&self, i: usize, j: usize) -> IntMatrix {
        let n = self.rows;
        let mut data = Vec::with_capacity((n - 1) * (n - 1));
        for r in (0..n).filter(|&r| r != i) {
            for c in (0..n).filter(|&c| c != j) {
                data.push(self.get(r, c).clone());
            }
        }
        IntMatrix {
            rows: n - 1,
            cols: n - 1,
            data,
        }
    }

    /// Classical adjugate (transposed cofactor matrix).
    pub fn adjugate(&self) -> Result<IntMatrix> {
        self.require_square()?;
        let n = self.rows;
        if n == 1 {
            return Ok(Self::identity(1));
        }
        let mut adj = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let c = self.minor_matrix(i, j).determinant()?;
                adj.data[j * n + i] = if (i + j) % 2 == 0 { c } else { -c };
            }
        }
        Ok(adj)
    }

    pub fn is_unimodular(&self) -> bool {
        self.is_square()
            && self
                .determinant()
                .map(|d| d.abs().is_one())
                .unwrap_or(false)
    }

    /// Inverse of a unimodular matrix, which is again an integer matrix.
    pub fn unimodular_inverse(&self) -> Result<IntMatrix> {
        let det = self.determinant()?;
        if !det.abs().is_one() {
            return Err(Error::Invalid("matrix is not unimodular".into()));
        }
        let adj = self.adjugate()?;
        Ok(if det.is_negative() { -adj } else { adj })
    }

    /// `self⁻¹ · other` when it is an integer matrix, i.e. when `self` is a
    /// left divisor of `other`. `None` when the quotient is not integral.
    pub fn left_quotient(&self, other: &IntMatrix) -> Result<Option<IntMatrix>> {
        let det = self.determinant()?;
        if det.is_zero() {
            return Err(Error::Singular);
        }
        let scaled = self.adjugate()?.try_mul(other)?;
        let mut data = Vec::with_capacity(scaled.data.len());
        for x in scaled.data {
            let (q, r) = x.div_rem(&det);
            if !r.is_zero() {
                return Ok(None);
            }
            data.push(q);
        }
        Ok(Some(IntMatrix {
            rows: scaled.rows,
            cols: scaled.cols,
            data,
        }))
    }

    /// `self⁻¹ · v` when it is an integer vector.
    pub fn left_solve_vec(&self, v: &IntVector) -> Result<Option<IntVector>> {
        let det = self.determinant()?;
        if det.is_zero() {
            return Err(Error::Singular);
        }
        let scaled = self.adjugate()?.try_mul_vec(v)?;
        let mut out = Vec::with_capacity(scaled.dim());
        for x in scaled.0 {
            let (q, r) = x.div_rem(&det);
            if !r.is_zero() {
                return Ok(None);
            }
            out.push(q);
        }
        Ok(Some(IntVector(out)))
    }

    /// True when `self` is a left divisor of `other` (`self⁻¹ · other` integral).
    pub fn left_divides(&self, other: &IntMatrix) -> Result<bool> {
        Ok(self.left_quotient(other)?.is_some())
    }

    /// Two nonsingular matrices generate the same lattice iff each left-divides
    /// the other, i.e. they differ by a right unimodular factor.
    pub fn lattice_equal(&self, other: &IntMatrix) -> Result<bool> {
        Ok(self.left_divides(other)? && other.left_divides(self)?)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.data
            .iter()
            .map(|x| x.to_f64().unwrap_or(f64::NAN))
            .collect()
    }
}

impl Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        self.get(i, j)
    }
}

impl Mul for &IntMatrix {
    type Output = IntMatrix;
    fn mul(self, rhs: &IntMatrix) -> IntMatrix {
        self.try_mul(rhs).expect("matrix product shape mismatch")
    }
}

impl Mul<&IntVector> for &IntMatrix {
    type Output = IntVector;
    fn mul(self, rhs: &IntVector) -> IntVector {
        self.try_mul_vec(rhs).expect("matrix-vector shape mismatch")
    }
}

impl Add for &IntMatrix {
    type Output = IntMatrix;
    fn add(self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &IntMatrix {
    type Output = IntMatrix;
    fn sub(self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for IntMatrix {
    type Output = IntMatrix;
    fn neg(self) -> IntMatrix {
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.into_iter().map(|x| -x).collect(),
        }
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for (j, x) in self.row(i).iter().enumerate() {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{x}")?;
            }
        }
        write!(f, "]")
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl IntVector {
    pub fn new(entries: Vec<BigInt>) -> Self {
        IntVector(entries)
    }

    pub fn from_i64s(entries: &[i64]) -> Self {
        IntVector(entries.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        IntVector(vec![BigInt::zero(); dim])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, BigInt> {
        self.0.iter()
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<BigInt> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0
            .iter()
            .map(|x| x.to_f64().unwrap_or(f64::NAN))
            .collect()
    }

    pub fn to_i64(&self) -> Option<Vec<i64>> {
        self.0.iter().map(ToPrimitive::to_i64).collect()
    }

    pub fn norm_sq(&self) -> BigInt {
        self.0.iter().map(|x| x * x).sum()
    }
}

impl Index<usize> for IntVector {
    type Output = BigInt;
    fn index(&self, i: usize) -> &BigInt {
        &self.0[i]
    }
}

impl Add for &IntVector {
    type Output = IntVector;
    fn add(self, rhs: &IntVector) -> IntVector {
        assert_eq!(self.dim(), rhs.dim());
        IntVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &IntVector {
    type Output = IntVector;
    fn sub(self, rhs: &IntVector) -> IntVector {
        assert_eq!(self.dim(), rhs.dim());
        IntVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for IntVector {
    type Output = IntVector;
    fn neg(self) -> IntVector {
        IntVector(self.0.into_iter().map(|x| -x).collect())
    }
}

impl From<Vec<BigInt>> for IntVector {
    fn from(v: Vec<BigInt>) -> Self {
        IntVector(v)
    }
}

impl fmt::Debug for IntVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for IntVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Laplace expansion along the first row; independent of Bareiss.
    fn cofactor_det(m: &IntMatrix) -> BigInt {
        let n = m.rows();
        if n == 1 {
            return m[(0, 0)].clone();
        }
        let mut acc = BigInt::zero();
        for j in 0..n {
            let term = &m[(0, j)] * cofactor_det(&m.minor_matrix(0, j));
            if j % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }

    #[test]
    fn determinant_small_cases() {
        assert_eq!(IntMatrix::identity(2).determinant().unwrap(), BigInt::one());
        assert_eq!(
            IntMatrix::diag(&[2, 3]).determinant().unwrap(),
            BigInt::from(6)
        );
        let m = IntMatrix::from_rows(&[[1360, 1788], [960, 1728]]);
        let d = m.determinant().unwrap();
        assert_eq!(d, cofactor_det(&m));
        assert_eq!(d, BigInt::from(1360 * 1728 - 1788 * 960));
    }

    #[test]
    fn determinant_needs_pivoting() {
        let m = IntMatrix::from_rows(&[[0, 2, 1], [3, 0, 4], [5, 6, 0]]);
        assert_eq!(m.determinant().unwrap(), cofactor_det(&m));
        let s = IntMatrix::from_rows(&[[1, 2], [2, 4]]);
        assert!(s.determinant().unwrap().is_zero());
    }

    #[test]
    fn determinant_rejects_rectangular() {
        let m = IntMatrix::zeros(2, 3);
        assert!(matches!(m.determinant(), Err(Error::DimensionMismatch(_))));
        assert!(m.adjugate().is_err());
    }

    #[test]
    fn adjugate_small_cases() {
        assert_eq!(
            IntMatrix::identity(2).adjugate().unwrap(),
            IntMatrix::identity(2)
        );
        assert_eq!(
            IntMatrix::diag(&[2, 3]).adjugate().unwrap(),
            IntMatrix::diag(&[3, 2])
        );
    }

    #[test]
    fn unimodular_examples() {
        assert!(IntMatrix::identity(2).is_unimodular());
        assert!(IntMatrix::diag(&[1, -1]).is_unimodular());
        assert!(!IntMatrix::diag(&[2, 1]).is_unimodular());
        assert!(!IntMatrix::zeros(2, 3).is_unimodular());
    }

    #[test]
    fn left_quotient_detects_divisibility() {
        let a = IntMatrix::diag(&[2, 3]);
        let b = IntMatrix::diag(&[4, 9]);
        assert_eq!(a.left_quotient(&b).unwrap(), Some(IntMatrix::diag(&[2, 3])));
        assert_eq!(b.left_quotient(&a).unwrap(), None);
        assert!(IntMatrix::zeros(2, 2).left_quotient(&a).is_err());
    }

    proptest::proptest! {
        #[test]
        fn adjugate_identity(entries in proptest::collection::vec(-9i64..=9, 4..=4)) {
            let m = IntMatrix::new(2, 2, entries.into_iter().map(BigInt::from).collect()).unwrap();
            let det = cofactor_det(&m);
            proptest::prop_assert_eq!(m.determinant().unwrap(), det.clone());
            let lhs = &m * &m.adjugate().unwrap();
            proptest::prop_assert_eq!(lhs, IntMatrix::identity(2).scale(&det));
        }

        #[test]
        fn bareiss_matches_cofactor_3x3(entries in proptest::collection::vec(-20i64..=20, 9..=9)) {
            let m = IntMatrix::new(3, 3, entries.into_iter().map(BigInt::from).collect()).unwrap();
            proptest::prop_assert_eq!(m.determinant().unwrap(), cofactor_det(&m));
        }
    }
}
