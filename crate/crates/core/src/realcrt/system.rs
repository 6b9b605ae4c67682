use num_bigint::BigInt;

use super::remainder::real_remainder;
use crate::error::{Error, Result};
use crate::intalg::{in_parallelepiped, IntMatrix, IntVector};
use crate::lattice::{lll_reduce, LatticeBasis, Norm, RealMatrix};
use crate::mdcrt::{CongruenceSystem, RobustOptions, SystemOptions};

/// Largest accepted distance of `M⁻¹v_j` from an integer vector, relative to
/// `max(1, ‖M⁻¹v_j‖∞)`.
pub const INTEGER_SNAP_TOLERANCE: f64 = 1e-6;

/// One entry of the real pairwise table: `Ψ_ij = gcld(Ψ_i, Ψ_j)` and the
/// minimum distance of `L(MΨ_ij)`.
#[derive(Clone, Debug)]
pub struct RealPairInfo {
    pub i: usize,
    pub j: usize,
    pub gcld: IntMatrix,
    pub lambda: f64,
    lattice: LatticeBasis,
}

/// Congruences `m = MΨ_i n_i + r_i` with integer `Ψ_i` and a real `M`.
#[derive(Clone, Debug)]
pub struct RealCongruenceSystem {
    real: RealMatrix,
    real_inv: RealMatrix,
    pairs: Vec<RealPairInfo>,
    reference: usize,
    bound: f64,
    integer: CongruenceSystem,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RealRobustResult {
    /// `m̃ = (1/L)·Σ(MΨ_i ñ_i + r̃_i)`.
    pub estimate: Vec<f64>,
    /// `Ψ_i ñ_i` per modulus.
    pub folded: Vec<IntVector>,
    /// `ñ_i` per modulus.
    pub folding_vectors: Vec<IntVector>,
    /// Closest points `v_j ∈ L(MΨ_{l0 j})` (zero at the reference).
    pub cvp_points: Vec<Vec<f64>>,
    /// The snapped integer vectors `M⁻¹v_j`.
    pub integer_differences: Vec<IntVector>,
    pub cvp_unique: Vec<bool>,
    /// `Ψ_{l0} ñ_{l0}`.
    pub zeta: IntVector,
    /// Largest snapping deviation seen, before scaling.
    pub max_snap_deviation: f64,
    pub within_range: bool,
}

impl RealCongruenceSystem {
    /// `options.reference` forces the reference; the representative overrides
    /// and lattice settings apply as for the integer system.
    pub fn new(psi: &[IntMatrix], real: RealMatrix, options: SystemOptions) -> Result<Self> {
        let integer = CongruenceSystem::new(
            psi,
            SystemOptions {
                reference: None,
                ..options.clone()
            },
        )?;
        let d = integer.dim();
        if real.rows() != d || real.cols() != d {
            return Err(Error::DimensionMismatch(format!(
                "real matrix is {}×{}, moduli are {d}×{d}",
                real.rows(),
                real.cols()
            )));
        }
        let real_inv = real.inverse()?;

        let mut pairs = Vec::new();
        for p in integer.pairs() {
            // reduce exactly first; float LLL on a skewed M·Ψ_ij loses accuracy
            let (reduced, _) = lll_reduce(&p.gcld)?;
            let lattice = LatticeBasis::from_real(real.mul_int(&reduced))?
                .with_norm(options.norm)
                .with_config(options.lattice);
            pairs.push(RealPairInfo {
                i: p.i,
                j: p.j,
                gcld: p.gcld.clone(),
                lambda: lattice.minimum_distance(),
                lattice,
            });
        }

        let worst = |i: usize| {
            pairs
                .iter()
                .filter(|p| p.i == i || p.j == i)
                .map(|p| p.lambda)
                .fold(f64::INFINITY, f64::min)
        };
        let reference = match options.reference {
            Some(r) if r < psi.len() => r,
            Some(r) => {
                return Err(Error::Invalid(format!(
                    "reference index {r} out of range for {} moduli",
                    psi.len()
                )))
            }
            None => {
                let mut best = 0;
                let mut best_val = worst(0);
                for i in 1..psi.len() {
                    let v = worst(i);
                    if v > best_val * (1.0 + 1e-12) {
                        best = i;
                        best_val = v;
                    }
                }
                best
            }
        };
        let bound = worst(reference) / 4.0;
        let integer = if integer.reference() == reference {
            integer
        } else {
            CongruenceSystem::new(
                psi,
                SystemOptions {
                    reference: Some(reference),
                    ..options
                },
            )?
        };
        Ok(RealCongruenceSystem {
            real,
            real_inv,
            pairs,
            reference,
            bound,
            integer,
        })
    }

    pub fn psi(&self) -> &[IntMatrix] {
        self.integer.moduli()
    }

    pub fn real_matrix(&self) -> &RealMatrix {
        &self.real
    }

    pub fn len(&self) -> usize {
        self.integer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.integer.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.integer.dim()
    }

    pub fn norm(&self) -> Norm {
        self.integer.norm()
    }

    pub fn pairs(&self) -> &[RealPairInfo] {
        &self.pairs
    }

    pub fn pair(&self, i: usize, j: usize) -> &RealPairInfo {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.pairs
            .iter()
            .find(|p| p.i == a && p.j == b)
            .expect("pair indices in range and distinct")
    }

    /// `λ` of `L(MΨ_ij)`.
    pub fn lambda(&self, i: usize, j: usize) -> f64 {
        self.pair(i, j).lambda
    }

    pub fn reference(&self) -> usize {
        self.reference
    }

    pub fn robustness_bound(&self) -> f64 {
        self.bound
    }

    pub fn lcrm(&self) -> &IntMatrix {
        self.integer.lcrm()
    }

    /// The integer system over `Ψ_1, …, Ψ_L` sharing this reference.
    pub fn integer_system(&self) -> &CongruenceSystem {
        &self.integer
    }

    /// `⌊Ψ_{l0}⁻¹M⁻¹m⌋ ∈ N(Ψ_{l0}⁻¹R)`.
    pub fn range_check(&self, m: &[f64]) -> Result<bool> {
        let (n, _) = real_remainder(m, &self.real, &self.psi()[self.reference])?;
        in_parallelepiped(&n, self.integer.range_basis())
    }

    /// `r_i` with `m = MΨ_i n_i + r_i`, for every modulus.
    pub fn remainders(&self, m: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.psi()
            .iter()
            .map(|p| Ok(real_remainder(m, &self.real, p)?.1))
            .collect()
    }

    /// Whether the origin is the unique closest point of `L(MΨ_{l0 j})` to
    /// `Δr_j − Δr_{l0}` for every `j`.
    pub fn check_condition(&self, errors: &[Vec<f64>]) -> Result<bool> {
        let l0 = self.reference;
        for j in (0..self.len()).filter(|&j| j != l0) {
            let diff: Vec<f64> = errors[j]
                .iter()
                .zip(&errors[l0])
                .map(|(a, b)| a - b)
                .collect();
            let cvp = self.pair(l0, j).lattice.closest_point(&diff)?;
            if !cvp.unique || !cvp.coefficients.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Robust reconstruction from erroneous real remainders.
    ///
    /// Closest points are found in the real lattices `L(MΨ_{l0 j})`. Each
    /// `M⁻¹v_j` must be integral within [`INTEGER_SNAP_TOLERANCE`]; from there
    /// on the congruences are solved exactly over the integers.
    pub fn robust_reconstruct_real(
        &self,
        remainders: &[Vec<f64>],
        options: RobustOptions,
    ) -> Result<RealRobustResult> {
        let n = self.len();
        let d = self.dim();
        if remainders.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} remainders for {n} moduli",
                remainders.len()
            )));
        }
        if let Some((i, r)) = remainders.iter().enumerate().find(|(_, r)| r.len() != d) {
            return Err(Error::DimensionMismatch(format!(
                "remainder {i} has dimension {}",
                r.len()
            )));
        }
        let l0 = self.reference;

        let mut cvp_points = vec![vec![0.0; d]; n];
        let mut integer_differences = vec![IntVector::zeros(d); n];
        let mut cvp_unique = vec![true; n];
        let mut max_dev: f64 = 0.0;
        for j in (0..n).filter(|&j| j != l0) {
            let target: Vec<f64> = remainders[j]
                .iter()
                .zip(&remainders[l0])
                .map(|(a, b)| a - b)
                .collect();
            let cvp = self.pair(l0, j).lattice.closest_point(&target)?;
            if !cvp.unique && !options.allow_ties {
                return Err(Error::CvpTie {
                    reference: l0,
                    other: j,
                });
            }
            let u = self.real_inv.mul_vec(&cvp.point);
            let scale = u.iter().fold(1.0f64, |a, x| a.max(x.abs()));
            let mut snapped = Vec::with_capacity(d);
            for x in &u {
                let r = x.round();
                let dev = (x - r).abs();
                if dev.is_nan() || dev > INTEGER_SNAP_TOLERANCE * scale {
                    return Err(Error::NotIntegral { deviation: dev });
                }
                max_dev = max_dev.max(dev);
                snapped.push(BigInt::from(r as i128));
            }
            integer_differences[j] = IntVector::new(snapped);
            cvp_points[j] = cvp.point;
            cvp_unique[j] = cvp.unique;
        }

        let zeta = self.integer.plan().reconstruct(&integer_differences)?;
        let folded: Vec<IntVector> = integer_differences.iter().map(|v| &zeta - v).collect();
        let folding_vectors = folded
            .iter()
            .zip(self.psi())
            .map(|(f, p)| p.left_solve_vec(f)?.ok_or(Error::Inconsistent { stage: 0 }))
            .collect::<Result<Vec<_>>>()?;

        let mut estimate = vec![0.0; d];
        for (f, r) in folded.iter().zip(remainders) {
            let mf = self.real.mul_int_vec(f.entries());
            for k in 0..d {
                estimate[k] += mf[k] + r[k];
            }
        }
        for e in &mut estimate {
            *e /= n as f64;
        }
        let within_range = self.range_check(&estimate)?;
        Ok(RealRobustResult {
            estimate,
            folded,
            folding_vectors,
            cvp_points,
            integer_differences,
            cvp_unique,
            zeta,
            max_snap_deviation: max_dev,
            within_range,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    fn worked() -> Vec<IntMatrix> {
        vec![
            IntMatrix::from_rows(&[[5850, 9000], [2580, 2940]]),
            IntMatrix::from_rows(&[[28950, 24150], [14140, 11680]]),
            IntMatrix::from_rows(&[[3440, 3460], [1540, 1160]]),
        ]
    }

    fn options() -> SystemOptions {
        SystemOptions {
            partial_lcrms: Some(vec![IntMatrix::from_rows(&[
                [86850, -101250],
                [42420, -49800],
            ])]),
            lcrm: Some(IntMatrix::from_rows(&[
                [774000, -6133500],
                [346500, -2746200],
            ])),
            ..Default::default()
        }
    }

    fn noisy() -> Vec<Vec<f64>> {
        vec![
            vec![52.0, 36.0],
            vec![37673.0, 18243.0],
            vec![4446.0, 1610.0],
        ]
    }

    #[test]
    fn identity_agrees_with_integer_path() {
        let s = RealCongruenceSystem::new(&worked(), RealMatrix::identity(2), options()).unwrap();
        let int = s.integer_system();
        for p in s.pairs() {
            assert!((p.lambda - int.lambda(p.i, p.j)).abs() < 1e-9);
        }
        assert_eq!(s.reference(), int.reference());
        assert!((s.robustness_bound() - int.robustness_bound()).abs() < 1e-9);

        let res = s
            .robust_reconstruct_real(&noisy(), RobustOptions::default())
            .unwrap();
        let ints: Vec<IntVector> = noisy()
            .iter()
            .map(|r| IntVector::from_i64s(&[r[0] as i64, r[1] as i64]))
            .collect();
        let ires = int
            .robust_reconstruct(&ints, RobustOptions::default())
            .unwrap();
        assert_eq!(res.folding_vectors, ires.folding_vectors);
        assert_eq!(res.zeta, ires.zeta);
        for (a, b) in res.estimate.iter().zip(&ires.estimate) {
            assert!((a - b).abs() < 1e-6);
        }
        assert_eq!(res.max_snap_deviation, 0.0);
    }

    #[test]
    fn half_scaling_halves_the_estimate() {
        let s =
            RealCongruenceSystem::new(&worked(), RealMatrix::scaled_identity(2, 0.5), options())
                .unwrap();
        assert!((s.robustness_bound() - 88.07 / 2.0).abs() < 0.01);
        let half: Vec<Vec<f64>> = noisy()
            .iter()
            .map(|r| r.iter().map(|x| x / 2.0).collect())
            .collect();
        let res = s
            .robust_reconstruct_real(&half, RobustOptions::default())
            .unwrap();
        assert_eq!(
            res.folding_vectors,
            vec![
                IntVector::from_i64s(&[-971, 35]),
                IntVector::from_i64s(&[1390, -1890]),
                IntVector::from_i64s(&[-1561, 0]),
            ]
        );
        assert!((res.estimate[0] - -5365339.67 / 2.0).abs() < 0.01);
        assert!((res.estimate[1] - -2402310.33 / 2.0).abs() < 0.01);
    }

    #[test]
    fn condition_check_matches_example() {
        let s = RealCongruenceSystem::new(&worked(), RealMatrix::identity(2), options()).unwrap();
        let errs = vec![vec![52.0, 36.0], vec![23.0, -77.0], vec![-44.0, -50.0]];
        assert!(s.check_condition(&errs).unwrap());
        let big = vec![vec![0.0, 0.0], vec![400.0, 0.0], vec![0.0, 0.0]];
        let res = s.check_condition(&big).unwrap();
        assert_eq!(
            res,
            s.integer_system()
                .check_condition_sn(&[
                    IntVector::from_i64s(&[0, 0]),
                    IntVector::from_i64s(&[400, 0]),
                    IntVector::from_i64s(&[0, 0]),
                ])
                .unwrap()
        );
    }

    #[test]
    fn skewed_real_matrix_round_trips() {
        let m = RealMatrix::from_rows(&[[1.3, 0.4], [-0.2, 0.9]]);
        let s = RealCongruenceSystem::new(&worked(), m, SystemOptions::default()).unwrap();
        let l0 = s.reference();
        let n = crate::intalg::remainder(
            &IntVector::from_i64s(&[-500, 20]),
            s.integer_system().range_basis(),
        )
        .unwrap();
        let mut x = n.to_f64();
        x[0] += 0.25;
        x[1] += 0.625;
        let truth = s.real_matrix().mul_int(&s.psi()[l0]).mul_vec(&x);
        assert!(s.range_check(&truth).unwrap());
        let rems = s.remainders(&truth).unwrap();
        let res = s
            .robust_reconstruct_real(&rems, RobustOptions::default())
            .unwrap();
        for (a, b) in res.estimate.iter().zip(&truth) {
            assert!((a - b).abs() < 1e-6 * b.abs());
        }
    }

    #[test]
    fn wrong_dimension_is_rejected() {
        let r =
            RealCongruenceSystem::new(&worked(), RealMatrix::identity(3), SystemOptions::default());
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
    }
}
