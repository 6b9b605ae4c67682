use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::intalg::{smith_normal_form, IntMatrix, IntVector};
use crate::lattice::{coset_representatives, DEFAULT_COSET_CAP};

/// The MD DFT with respect to `Mᵀ`: samples on `N(Mᵀ)`, bins on `N(M)`,
/// `X[k] = Σ_n x[n]·exp(−j2π kᵀM⁻ᵀn)`.
///
/// With `U·M·V = Λ` the phase is `(Uk)ᵀΛ⁻¹(Vᵀn)`, so after relabelling
/// samples by `Vᵀn mod δ` and bins by `Uk mod δ` the transform is an ordinary
/// separable DFT of shape `(δ_1, …, δ_D)`.
pub struct MdDft {
    modulus: IntMatrix,
    sample_points: Vec<IntVector>,
    bin_points: Vec<IntVector>,
    /// Grid slot of each sample and of each bin.
    sample_slot: Vec<usize>,
    bin_slot: Vec<usize>,
    shape: Vec<usize>,
    ffts: Vec<Arc<dyn Fft<f64>>>,
}

impl std::fmt::Debug for MdDft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MdDft")
            .field("modulus", &self.modulus)
            .field("shape", &self.shape)
            .finish()
    }
}

fn slot(coords: &IntVector, shape: &[usize]) -> usize {
    // row-major over the Smith grid
    coords.iter().zip(shape).fold(0usize, |acc, (c, &n)| {
        let r = c.mod_floor(&BigInt::from(n)).to_usize().expect("reduced");
        acc * n + r
    })
}

impl MdDft {
    pub fn new(modulus: &IntMatrix) -> Result<Self> {
        let sample_points = coset_representatives(&modulus.transpose(), DEFAULT_COSET_CAP)?;
        let bin_points = coset_representatives(modulus, DEFAULT_COSET_CAP)?;
        let s = smith_normal_form(modulus);
        let shape: Vec<usize> = s
            .invariant_factors
            .iter()
            .map(|d| d.abs().to_usize().expect("bounded by the coset cap"))
            .collect();
        let vt = s.v.transpose();
        let sample_slot = sample_points
            .iter()
            .map(|n| slot(&(&vt * n), &shape))
            .collect();
        let bin_slot = bin_points
            .iter()
            .map(|k| slot(&(&s.u * k), &shape))
            .collect();
        let mut planner = FftPlanner::new();
        let ffts = shape.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        Ok(MdDft {
            modulus: modulus.clone(),
            sample_points,
            bin_points,
            sample_slot,
            bin_slot,
            shape,
            ffts,
        })
    }

    pub fn modulus(&self) -> &IntMatrix {
        &self.modulus
    }

    /// `N(Mᵀ)`, sorted; sample `i` sits at `sample_points()[i]`.
    pub fn sample_points(&self) -> &[IntVector] {
        &self.sample_points
    }

    /// `N(M)`, sorted; bin `i` sits at `bin_points()[i]`.
    pub fn bin_points(&self) -> &[IntVector] {
        &self.bin_points
    }

    pub fn len(&self) -> usize {
        self.sample_points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sample_points.is_empty()
    }

    fn check(&self, samples: &[Complex64]) -> Result<()> {
        if samples.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} samples for a transform of size {}",
                samples.len(),
                self.len()
            )));
        }
        Ok(())
    }

    pub fn transform(&self, samples: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check(samples)?;
        let mut grid = vec![Complex64::default(); self.len()];
        for (x, &s) in samples.iter().zip(&self.sample_slot) {
            grid[s] = *x;
        }
        // one axis at a time: `stride` is the product of the trailing sizes
        let mut stride = 1;
        let mut line = Vec::new();
        for axis in (0..self.shape.len()).rev() {
            let n = self.shape[axis];
            if n > 1 {
                line.resize(n, Complex64::default());
                let block = n * stride;
                for base in (0..grid.len()).step_by(block) {
                    for off in 0..stride {
                        for t in 0..n {
                            line[t] = grid[base + off + t * stride];
                        }
                        self.ffts[axis].process(&mut line);
                        for t in 0..n {
                            grid[base + off + t * stride] = line[t];
                        }
                    }
                }
            }
            stride *= n;
        }
        Ok(self.bin_slot.iter().map(|&s| grid[s]).collect())
    }

    /// Direct `O(|det M|²)` evaluation with exact integer phases.
    pub fn transform_direct(&self, samples: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check(samples)?;
        // kᵀM⁻ᵀn = kᵀ·adj(M)ᵀ·n / det(M)
        let det = self.modulus.determinant()?;
        let adj_t = self.modulus.adjugate()?.transpose();
        let size = det.abs();
        let sign = if det.is_negative() { -1.0 } else { 1.0 };
        let sizef = size.to_f64().expect("bounded");
        let projected: Vec<IntVector> = self.sample_points.iter().map(|n| &adj_t * n).collect();
        Ok(self
            .bin_points
            .iter()
            .map(|k| {
                projected
                    .iter()
                    .zip(samples)
                    .map(|(an, x)| {
                        let num: BigInt = k.iter().zip(an.iter()).map(|(a, b)| a * b).sum();
                        let frac = num.mod_floor(&size).to_f64().expect("reduced") / sizef;
                        x * Complex64::from_polar(1.0, -sign * std::f64::consts::TAU * frac)
                    })
                    .sum()
            })
            .collect())
    }
}

pub fn md_dft(samples: &[Complex64], modulus: &IntMatrix) -> Result<Vec<Complex64>> {
    MdDft::new(modulus)?.transform(samples)
}

pub fn md_dft_direct(samples: &[Complex64], modulus: &IntMatrix) -> Result<Vec<Complex64>> {
    MdDft::new(modulus)?.transform_direct(samples)
}

/// The bin of largest magnitude; the first (lexicographically smallest) wins
/// ties.
pub fn detect_remainder(spectrum: &[Complex64], bins: &[IntVector]) -> Result<IntVector> {
    if spectrum.len() != bins.len() || bins.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "{} spectrum values for {} bins",
            spectrum.len(),
            bins.len()
        )));
    }
    let mut best = 0;
    let mut best_mag = spectrum[0].norm_sqr();
    for (i, x) in spectrum.iter().enumerate().skip(1) {
        let m = x.norm_sqr();
        if m > best_mag {
            best = i;
            best_mag = m;
        }
    }
    Ok(bins[best].clone())
}

/// `exp(j2π fᵀM⁻ᵀn)` on the sample points of `dft`.
pub fn sinusoid(dft: &MdDft, frequency: &IntVector) -> Result<Vec<Complex64>> {
    let m = dft.modulus();
    let det = m.determinant()?;
    let size = det.abs();
    let sign = if det.is_negative() { -1.0 } else { 1.0 };
    let sizef = size.to_f64().expect("bounded");
    // fᵀ·adj(M)ᵀ, reduced once
    let row = &m.adjugate()? * frequency;
    let row: Vec<BigInt> = row.iter().map(|x| x.mod_floor(&size)).collect();
    Ok(dft
        .sample_points()
        .iter()
        .map(|n| {
            let num: BigInt = row.iter().zip(n.iter()).map(|(a, b)| a * b).sum();
            let frac = num.mod_floor(&size).to_f64().expect("reduced") / sizef;
            Complex64::from_polar(1.0, sign * std::f64::consts::TAU * frac)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intalg::remainder;
    use rand::{Rng, SeedableRng};

    fn im(rows: &[[i64; 2]]) -> IntMatrix {
        IntMatrix::from_rows(rows)
    }

    fn random_samples(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    #[test]
    fn fast_matches_direct() {
        for (i, m) in [
            im(&[[3, 1], [1, 2]]),
            im(&[[4, 0], [0, 6]]),
            im(&[[6, 2], [-2, 4]]),
            im(&[[2, 5], [7, -3]]),
            im(&[[48, 20], [8, 40]]),
        ]
        .iter()
        .enumerate()
        {
            let dft = MdDft::new(m).unwrap();
            let x = random_samples(dft.len(), i as u64);
            let a = dft.transform(&x).unwrap();
            let b = dft.transform_direct(&x).unwrap();
            let scale = dft.len() as f64;
            for (p, q) in a.iter().zip(&b) {
                assert!((p - q).norm() <= 1e-9 * scale, "{m:?}: {p} vs {q}");
            }
        }
    }

    #[test]
    fn three_dimensional_fast_matches_direct() {
        let m = IntMatrix::from_rows(&[[2, 1, 0], [0, 3, 1], [1, 0, 2]]);
        let dft = MdDft::new(&m).unwrap();
        let x = random_samples(dft.len(), 9);
        let a = dft.transform(&x).unwrap();
        let b = dft.transform_direct(&x).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).norm() <= 1e-9);
        }
    }

    #[test]
    fn noiseless_sinusoid_peaks_at_remainder() {
        let m = &im(&[[48, 20], [8, 40]]) * &im(&[[2, 1], [1, 2]]);
        let f = IntVector::from_i64s(&[443, 388]);
        let dft = MdDft::new(&m).unwrap();
        let spectrum = dft.transform(&sinusoid(&dft, &f).unwrap()).unwrap();
        let r = remainder(&f, &m).unwrap();
        let det = dft.len() as f64;
        for (k, x) in dft.bin_points().iter().zip(&spectrum) {
            if *k == r {
                assert!((x.norm() - det).abs() <= 1e-6 * det);
            } else {
                assert!(x.norm() <= 1e-6 * det);
            }
        }
        assert_eq!(detect_remainder(&spectrum, dft.bin_points()).unwrap(), r);
    }

    #[test]
    fn constant_signal_peaks_at_zero() {
        let m = im(&[[6, 2], [-2, 4]]);
        let dft = MdDft::new(&m).unwrap();
        let spectrum = dft
            .transform(&vec![Complex64::new(1.0, 0.0); dft.len()])
            .unwrap();
        let r = detect_remainder(&spectrum, dft.bin_points()).unwrap();
        assert!(r.is_zero());
        assert!((spectrum[0].norm() - dft.len() as f64).abs() < 1e-9);
    }

    #[test]
    fn parseval() {
        let m = im(&[[28, 10], [4, 20]]);
        let dft = MdDft::new(&m).unwrap();
        let x = random_samples(dft.len(), 3);
        let spectrum = dft.transform(&x).unwrap();
        let ex: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        let es: f64 = spectrum.iter().map(|v| v.norm_sqr()).sum::<f64>() / dft.len() as f64;
        assert!((ex - es).abs() <= 1e-6 * ex);
    }

    #[test]
    fn size_mismatch_is_an_error() {
        let dft = MdDft::new(&im(&[[3, 1], [1, 2]])).unwrap();
        assert!(matches!(
            dft.transform(&[Complex64::default()]),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
