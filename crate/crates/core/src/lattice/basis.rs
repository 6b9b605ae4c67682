use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::lll;
use super::real::RealMatrix;
use crate::error::{Error, Result};
use crate::intalg::{in_parallelepiped, IntMatrix, IntVector};

/// Vector norm used for distances.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    L1,
    #[default]
    L2,
    Linf,
}

impl Norm {
    pub fn of(self, v: &[f64]) -> f64 {
        match self {
            Norm::L1 => v.iter().map(|x| x.abs()).sum(),
            Norm::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            Norm::Linf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }

    /// Exact comparison key for integer vectors: squared length under ℓ2, the
    /// norm itself otherwise.
    pub fn exact_key(self, v: &[BigInt]) -> BigInt {
        match self {
            Norm::L1 => v.iter().map(|x| x.abs()).sum(),
            Norm::L2 => v.iter().map(|x| x * x).sum(),
            Norm::Linf => v.iter().map(|x| x.abs()).max().unwrap_or_default(),
        }
    }

    fn key_to_distance(self, key: &BigInt) -> f64 {
        let k = key.to_f64().unwrap_or(f64::INFINITY);
        match self {
            Norm::L2 => k.sqrt(),
            _ => k,
        }
    }

    /// Radius of an ℓ2 ball containing the ball of radius `r` in this norm.
    fn l2_cover(self, r: f64, dim: usize) -> f64 {
        match self {
            Norm::L1 | Norm::L2 => r,
            Norm::Linf => r * (dim as f64).sqrt(),
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Norm::L1 => "l1",
            Norm::L2 => "l2",
            Norm::Linf => "linf",
        })
    }
}

impl FromStr for Norm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Norm::L1),
            "l2" => Ok(Norm::L2),
            "linf" | "l_inf" | "inf" => Ok(Norm::Linf),
            other => Err(Error::Invalid(format!("unknown norm {other:?}"))),
        }
    }
}

/// Numerical tolerances for float lattices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeConfig {
    /// Relative distance tolerance under which two CVP candidates tie.
    pub tie_tolerance: f64,
    /// Slack on parallelepiped coordinates near 0 and 1.
    pub boundary_tolerance: f64,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        LatticeConfig {
            tie_tolerance: 1e-9,
            boundary_tolerance: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CvpResult {
    pub point: Vec<f64>,
    /// Exact lattice point, available when basis and target are integral.
    pub exact_point: Option<IntVector>,
    /// Coefficients with respect to the basis as given (not the reduced one).
    pub coefficients: IntVector,
    pub distance: f64,
    pub unique: bool,
}

/// A full-rank lattice `L(B)` with a chosen norm.
///
/// The basis is LLL-reduced once at construction; all enumeration happens over
/// the reduced basis and coefficients are mapped back through the unimodular
/// transform.
#[derive(Clone, Debug)]
pub struct LatticeBasis {
    basis: RealMatrix,
    exact: Option<IntMatrix>,
    norm: Norm,
    config: LatticeConfig,
    reduced: RealMatrix,
    reduced_exact: Option<IntMatrix>,
    transform: IntMatrix,
    reduced_inv: RealMatrix,
    basis_inv: RealMatrix,
    gs_norms: Vec<f64>,
    mu: Vec<Vec<f64>>,
}

/// LLL-reduces an integer basis: returns `(B·T, T)` with `T` unimodular.
pub fn lll_reduce(m: &IntMatrix) -> Result<(IntMatrix, IntMatrix)> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(
            "lattice basis must be square".into(),
        ));
    }
    if m.determinant()?.is_zero() {
        return Err(Error::Singular);
    }
    let mut cols: Vec<Vec<BigRational>> = (0..m.cols())
        .map(|j| {
            m.column(j)
                .iter()
                .map(|x| BigRational::from_integer(x.clone()))
                .collect()
        })
        .collect();
    let t = lll::reduce(&mut cols);
    let t = IntMatrix::from_columns(&t.into_iter().map(IntVector::new).collect::<Vec<_>>())?;
    let reduced = m * &t;
    Ok((reduced, t))
}

impl LatticeBasis {
    pub fn from_int(m: &IntMatrix) -> Result<Self> {
        let (reduced_exact, transform) = lll_reduce(m)?;
        Self::assemble(
            RealMatrix::from_int(m),
            Some(m.clone()),
            RealMatrix::from_int(&reduced_exact),
            Some(reduced_exact),
            transform,
        )
    }

    pub fn from_real(b: RealMatrix) -> Result<Self> {
        if b.rows() != b.cols() {
            return Err(Error::DimensionMismatch(
                "lattice basis must be square".into(),
            ));
        }
        let n = b.cols();
        let mut cols: Vec<Vec<f64>> = (0..n).map(|j| b.column(j)).collect();
        if cols.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Invalid("non-finite basis entry".into()));
        }
        let t = lll::reduce(&mut cols);
        let transform =
            IntMatrix::from_columns(&t.into_iter().map(IntVector::new).collect::<Vec<_>>())?;
        // recompute from the transform so the reduced basis is exactly B·T
        let reduced = b.mul_int(&transform);
        Self::assemble(b, None, reduced, None, transform)
    }

    fn assemble(
        basis: RealMatrix,
        exact: Option<IntMatrix>,
        reduced: RealMatrix,
        reduced_exact: Option<IntMatrix>,
        transform: IntMatrix,
    ) -> Result<Self> {
        let basis_inv = basis.inverse()?;
        let reduced_inv = reduced.inverse()?;
        let cols: Vec<Vec<f64>> = (0..reduced.cols()).map(|j| reduced.column(j)).collect();
        let (gs_norms, mu) = lll::gram_schmidt(&cols);
        if gs_norms.iter().any(|x| *x <= 0.0 || !x.is_finite()) {
            return Err(Error::Singular);
        }
        Ok(LatticeBasis {
            basis,
            exact,
            norm: Norm::default(),
            config: LatticeConfig::default(),
            reduced,
            reduced_exact,
            transform,
            reduced_inv,
            basis_inv,
            gs_norms,
            mu,
        })
    }

    pub fn with_norm(mut self, norm: Norm) -> Self {
        self.norm = norm;
        self
    }

    pub fn with_config(mut self, config: LatticeConfig) -> Self {
        self.config = config;
        self
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn basis(&self) -> &RealMatrix {
        &self.basis
    }

    pub fn exact_basis(&self) -> Option<&IntMatrix> {
        self.exact.as_ref()
    }

    /// The LLL-reduced basis `B·T`.
    pub fn reduced_basis(&self) -> &RealMatrix {
        &self.reduced
    }

    pub fn transform(&self) -> &IntMatrix {
        &self.transform
    }

    /// All reduced-basis coefficient vectors `y` with
    /// `‖reduced·(y − x)‖₂ ≤ radius`, where `x = reduced⁻¹·t`.
    fn enumerate(&self, x: &[f64], radius: f64) -> Vec<Vec<i64>> {
        let n = self.dim();
        let r2 = radius * radius;
        let mut out = Vec::new();
        let mut y = vec![0i64; n];
        self.search(n, 0.0, x, r2, &mut y, &mut out);
        out
    }

    fn search(
        &self,
        level: usize,
        partial: f64,
        x: &[f64],
        r2: f64,
        y: &mut Vec<i64>,
        out: &mut Vec<Vec<i64>>,
    ) {
        if level == 0 {
            out.push(y.clone());
            return;
        }
        let i = level - 1;
        let shift: f64 = (i + 1..self.dim())
            .map(|j| self.mu[j][i] * (y[j] as f64 - x[j]))
            .sum();
        let c = x[i] - shift;
        let rem = r2 - partial;
        if rem < 0.0 {
            return;
        }
        let w = (rem / self.gs_norms[i]).sqrt();
        let lo = (c - w).ceil() as i64;
        let hi = (c + w).floor() as i64;
        for v in lo..=hi {
            let d = v as f64 - c;
            let p = partial + self.gs_norms[i] * d * d;
            if p <= r2 {
                y[i] = v;
                self.search(i, p, x, r2, y, out);
            }
        }
        y[i] = 0;
    }

    fn inflate(&self, r: f64) -> f64 {
        let r2 = self.norm.l2_cover(r, self.dim());
        r2 * (1.0 + 1e-9) + 1e-9
    }

    fn original_coefficients(&self, reduced_coeffs: &[BigInt]) -> IntVector {
        &self.transform * &IntVector::new(reduced_coeffs.to_vec())
    }

    /// λ: length of the shortest nonzero lattice vector under the chosen norm.
    pub fn minimum_distance(&self) -> f64 {
        self.shortest_vector().1
    }

    /// A shortest nonzero vector (coefficients in the given basis) and its
    /// length. Among equally short vectors the lexicographically smallest
    /// coefficient vector is returned.
    pub fn shortest_vector(&self) -> (IntVector, f64) {
        let n = self.dim();
        let seed = (0..n)
            .map(|j| self.norm.of(&self.reduced.column(j)))
            .fold(f64::INFINITY, f64::min);
        let zero = vec![0.0; n];
        let cands = self.enumerate(&zero, self.inflate(seed));
        let mut best: Option<(IntVector, f64, Option<BigInt>)> = None;
        for y in cands.into_iter().filter(|y| y.iter().any(|&v| v != 0)) {
            let yb: Vec<BigInt> = y.iter().map(|&v| BigInt::from(v)).collect();
            let coeffs = self.original_coefficients(&yb);
            let (dist, key) = match &self.reduced_exact {
                Some(re) => {
                    let p = re * &IntVector::new(yb);
                    let key = self.norm.exact_key(p.entries());
                    (self.norm.key_to_distance(&key), Some(key))
                }
                None => {
                    let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
                    (self.norm.of(&self.reduced.mul_vec(&yf)), None)
                }
            };
            let better = match &best {
                None => true,
                Some((bc, bd, bk)) => match (&key, bk) {
                    (Some(k), Some(bk)) => k < bk || (k == bk && coeffs < *bc),
                    _ => {
                        let tol = self.config.tie_tolerance * bd.max(dist);
                        dist < bd - tol || ((dist - bd).abs() <= tol && coeffs < *bc)
                    }
                },
            };
            if better {
                best = Some((coeffs, dist, key));
            }
        }
        let (c, d, _) = best.expect("the seed vector is always a candidate");
        (c, d)
    }

    /// Closest lattice point to a real target.
    pub fn closest_point(&self, w: &[f64]) -> Result<CvpResult> {
        self.check_dim(w.len())?;
        let x0: Vec<i64> = self
            .reduced_inv
            .mul_vec(w)
            .iter()
            .map(|c| c.round() as i64)
            .collect();
        let x0f: Vec<f64> = x0.iter().map(|&v| v as f64).collect();
        let base = self.reduced.mul_vec(&x0f);
        let residual: Vec<f64> = w.iter().zip(&base).map(|(a, b)| a - b).collect();
        let xr = self.reduced_inv.mul_vec(&residual);

        let seed = self
            .norm
            .of(&residual.iter().map(|v| -v).collect::<Vec<_>>());
        let cands = self.enumerate(&xr, self.inflate(seed));
        let mut scored: Vec<(f64, Vec<i64>)> = cands
            .into_iter()
            .map(|y| {
                let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
                let p = self.reduced.mul_vec(&yf);
                let diff: Vec<f64> = p.iter().zip(&residual).map(|(a, b)| a - b).collect();
                (self.norm.of(&diff), y)
            })
            .collect();
        if scored.is_empty() {
            scored.push((seed, vec![0; self.dim()]));
        }
        let best = scored.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
        let tol = self.config.tie_tolerance * best.max(f64::MIN_POSITIVE);
        let ties: Vec<(IntVector, Vec<f64>)> = scored
            .iter()
            .filter(|(d, _)| *d - best <= tol)
            .map(|(_, y)| {
                let full: Vec<BigInt> = y
                    .iter()
                    .zip(&x0)
                    .map(|(a, b)| BigInt::from(*a) + BigInt::from(*b))
                    .collect();
                let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
                let p = self.reduced.mul_vec(&yf);
                let point = p.iter().zip(&base).map(|(a, b)| a + b).collect();
                (self.original_coefficients(&full), point)
            })
            .collect();
        let (coefficients, point) = ties
            .iter()
            .min_by(|a, b| a.0.cmp(&b.0))
            .cloned()
            .expect("nonempty");
        let exact_point = self.exact.as_ref().map(|e| e * &coefficients);
        Ok(CvpResult {
            point,
            exact_point,
            coefficients,
            distance: best,
            unique: ties.len() == 1,
        })
    }

    /// Closest lattice point to an integer target, with exact distance
    /// comparisons. Requires an integer basis.
    pub fn closest_point_exact(&self, w: &IntVector) -> Result<CvpResult> {
        self.check_dim(w.dim())?;
        let (Some(exact), Some(re)) = (&self.exact, &self.reduced_exact) else {
            return self.closest_point(&w.to_f64());
        };
        let wf = w.to_f64();
        let x0: Vec<BigInt> = self
            .reduced_inv
            .mul_vec(&wf)
            .iter()
            .map(lll::Scalar::round_int)
            .collect();
        let x0v = IntVector::new(x0.clone());
        let residual = w - &(re * &x0v);
        let xr = self.reduced_inv.mul_vec(&residual.to_f64());
        let seed_key = self.norm.exact_key(residual.entries());
        let seed = self.norm.key_to_distance(&seed_key);

        let cands = self.enumerate(&xr, self.inflate(seed));
        let mut best_key: Option<BigInt> = None;
        let mut ties: Vec<IntVector> = Vec::new();
        for y in cands {
            let yv = IntVector::from_i64s(&y);
            let diff = &(re * &yv) - &residual;
            let key = self.norm.exact_key(diff.entries());
            let full = &yv + &x0v;
            match &best_key {
                Some(b) if key > *b => {}
                Some(b) if key == *b => ties.push(self.original_coefficients(full.entries())),
                _ => {
                    best_key = Some(key);
                    ties = vec![self.original_coefficients(full.entries())];
                }
            }
        }
        if ties.is_empty() {
            best_key = Some(seed_key);
            ties.push(self.original_coefficients(x0v.entries()));
        }
        let coefficients = ties.iter().min().cloned().expect("nonempty");
        let exact_point = exact * &coefficients;
        Ok(CvpResult {
            point: exact_point.to_f64(),
            exact_point: Some(exact_point),
            coefficients,
            distance: self.norm.key_to_distance(best_key.as_ref().unwrap()),
            unique: ties.len() == 1,
        })
    }

    /// `B⁻¹w ∈ [0, 1)^D` within the boundary tolerance.
    pub fn fp_contains(&self, w: &[f64]) -> Result<bool> {
        self.check_dim(w.len())?;
        let tol = self.config.boundary_tolerance;
        Ok(self
            .basis_inv
            .mul_vec(w)
            .iter()
            .all(|&c| c > -tol && c < 1.0 - tol))
    }

    /// Exact membership for integer bases and targets.
    pub fn fp_contains_exact(&self, w: &IntVector) -> Result<bool> {
        match &self.exact {
            Some(e) => in_parallelepiped(w, e),
            None => self.fp_contains(&w.to_f64()),
        }
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "vector of dimension {d} for a {}-dimensional lattice",
                self.dim()
            )));
        }
        Ok(())
    }
}
