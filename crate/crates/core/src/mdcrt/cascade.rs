use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::intalg::{gcld, lcrm, remainder, IntMatrix, IntVector};

#[derive(Clone, Debug)]
struct Stage {
    modulus: IntMatrix,
    /// `R_i P_i` from `R_i P_i + M_i Q_i = G_i`.
    rp: IntMatrix,
    g_adj: IntMatrix,
    g_det: BigInt,
    /// `R_{i+1}`, the modulus the partial solution is reduced by.
    next: IntMatrix,
}

/// Precomputed matrices of the cascaded reconstruction: merges two
/// congruences at a time, `x ← ⟨x + R_i P_i G_i⁻¹(r_i − x)⟩_{R_{i+1}}`.
#[derive(Clone, Debug)]
pub struct CascadePlan {
    first: IntMatrix,
    stages: Vec<Stage>,
}

impl CascadePlan {
    pub fn new(moduli: &[IntMatrix]) -> Result<Self> {
        Self::with_lcrms(moduli, &[])
    }

    /// Like [`CascadePlan::new`] but with caller-chosen representatives for
    /// the partial lcrms `R_3, …, R_{L+1}` (in that order, a prefix may be
    /// given as `None`). Every representative must be lattice-equal to the
    /// computed one; the Bezout data of later stages is derived from it.
    pub fn with_lcrms(moduli: &[IntMatrix], overrides: &[Option<IntMatrix>]) -> Result<Self> {
        let Some(first) = moduli.first() else {
            return Err(Error::TooFewModuli { needed: 1, got: 0 });
        };
        if overrides.len() > moduli.len().saturating_sub(1) {
            return Err(Error::Invalid(format!(
                "{} lcrm representatives given for {} moduli",
                overrides.len(),
                moduli.len()
            )));
        }
        let d = first.rows();
        for m in moduli {
            if !m.is_square() || m.rows() != d {
                return Err(Error::DimensionMismatch(
                    "moduli must be square and of equal size".into(),
                ));
            }
            if m.determinant()?.is_zero() {
                return Err(Error::Singular);
            }
        }

        let mut acc = first.clone();
        let mut stages = Vec::with_capacity(moduli.len() - 1);
        for (k, m) in moduli.iter().enumerate().skip(1) {
            let cert = gcld(&acc, m)?;
            let computed = lcrm(&acc, m)?;
            let next = match overrides.get(k - 1).cloned().flatten() {
                Some(r) => {
                    if !r.lattice_equal(&computed)? {
                        return Err(Error::Invalid(format!(
                            "lcrm representative {} does not span lcrm(M_1..M_{})",
                            k - 1,
                            k + 1
                        )));
                    }
                    r
                }
                None => computed,
            };
            stages.push(Stage {
                modulus: m.clone(),
                rp: &acc * &cert.p,
                g_adj: cert.gcld.adjugate()?,
                g_det: cert.gcld.determinant()?,
                next: next.clone(),
            });
            acc = next;
        }
        Ok(CascadePlan {
            first: first.clone(),
            stages,
        })
    }

    pub fn len(&self) -> usize {
        self.stages.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The lcrm `R` of all moduli, in the representative used for the final
    /// reduction.
    pub fn lcrm(&self) -> &IntMatrix {
        self.stages.last().map_or(&self.first, |s| &s.next)
    }

    /// The partial lcrms `R_3, …, R_{L+1}`.
    pub fn partial_lcrms(&self) -> Vec<&IntMatrix> {
        self.stages.iter().map(|s| &s.next).collect()
    }

    /// The unique solution in `N(R)`, together with the partial solutions
    /// after each merge.
    pub fn reconstruct_with_trace(
        &self,
        remainders: &[IntVector],
    ) -> Result<(IntVector, Vec<IntVector>)> {
        if remainders.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} remainders for {} moduli",
                remainders.len(),
                self.len()
            )));
        }
        let d = self.first.rows();
        if let Some(bad) = remainders.iter().find(|r| r.dim() != d) {
            return Err(Error::DimensionMismatch(format!(
                "remainder of dimension {} for {d}x{d} moduli",
                bad.dim()
            )));
        }
        let mut x = remainders[0].clone();
        let mut trace = Vec::with_capacity(self.stages.len());
        if self.stages.is_empty() {
            x = remainder(&x, &self.first)?;
        }
        for (k, (stage, r)) in self.stages.iter().zip(&remainders[1..]).enumerate() {
            let diff = r - &x;
            let scaled = &stage.g_adj * &diff;
            let mut y = Vec::with_capacity(d);
            for v in scaled.iter() {
                let (q, rem) = v.div_rem(&stage.g_det);
                if !rem.is_zero() {
                    // reported as the 0-based index of the modulus being merged
                    return Err(Error::Inconsistent { stage: k + 1 });
                }
                y.push(q);
            }
            let step = &stage.rp * &IntVector::new(y);
            x = remainder(&(&x + &step), &stage.next)?;
            debug_assert!(stage
                .modulus
                .left_solve_vec(&(r - &x))
                .ok()
                .flatten()
                .is_some());
            trace.push(x.clone());
        }
        Ok((x, trace))
    }

    pub fn reconstruct(&self, remainders: &[IntVector]) -> Result<IntVector> {
        Ok(self.reconstruct_with_trace(remainders)?.0)
    }
}

/// Closed-form solution for pairwise commutative and coprime moduli,
/// `m = ⟨Σ W_i Ŵ_i r_i⟩_R` with `R = M_1⋯M_L` and `W_i` the product of the
/// other moduli. Returns the solution and `R`.
pub fn crt_closed_form_coprime(
    moduli: &[IntMatrix],
    remainders: &[IntVector],
) -> Result<(IntVector, IntMatrix)> {
    if moduli.is_empty() {
        return Err(Error::TooFewModuli { needed: 1, got: 0 });
    }
    if remainders.len() != moduli.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} remainders for {} moduli",
            remainders.len(),
            moduli.len()
        )));
    }
    for (i, a) in moduli.iter().enumerate() {
        for (j, b) in moduli.iter().enumerate().skip(i + 1) {
            if a.try_mul(b)? != b.try_mul(a)? {
                return Err(Error::NotCommutativeCoprime(format!(
                    "moduli {i} and {j} do not commute"
                )));
            }
            if !gcld(a, b)?.gcld.is_unimodular() {
                return Err(Error::NotCommutativeCoprime(format!(
                    "moduli {i} and {j} are not coprime"
                )));
            }
        }
    }
    let d = moduli[0].rows();
    let product = |skip: Option<usize>| {
        moduli
            .iter()
            .enumerate()
            .filter(|(k, _)| Some(*k) != skip)
            .fold(IntMatrix::identity(d), |acc, (_, m)| &acc * m)
    };
    let r = product(None);
    let mut sum = IntVector::zeros(d);
    for (i, (m, rem)) in moduli.iter().zip(remainders).enumerate() {
        let w = product(Some(i));
        let cert = gcld(&w, m)?;
        if !cert.gcld.is_unimodular() {
            return Err(Error::NotCommutativeCoprime(format!(
                "modulus {i} is not coprime to the product of the others"
            )));
        }
        // W·P + M·Q = L unimodular  ⇒  Ŵ = P·L⁻¹
        let w_hat = &cert.p * &cert.gcld.unimodular_inverse()?;
        sum = &sum + &(&(&w * &w_hat) * rem);
    }
    debug_assert!(r.determinant().map(|x| !x.abs().is_zero()).unwrap_or(false));
    Ok((remainder(&sum, &r)?, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intalg::{in_parallelepiped, mod_reduce};

    fn im(rows: &[[i64; 2]]) -> IntMatrix {
        IntMatrix::from_rows(rows)
    }

    fn scalar(x: i64) -> IntMatrix {
        IntMatrix::from_rows(&[[x]])
    }

    fn v(x: &[i64]) -> IntVector {
        IntVector::from_i64s(x)
    }

    #[test]
    fn single_modulus_returns_remainder() {
        let m = im(&[[3, 1], [1, 2]]);
        let plan = CascadePlan::new(std::slice::from_ref(&m)).unwrap();
        assert_eq!(plan.reconstruct(&[v(&[2, 1])]).unwrap(), v(&[2, 1]));
        assert_eq!(plan.lcrm(), &m);
    }

    #[test]
    fn one_dimensional_pair() {
        // brute force: the unique x in 0..15 with x ≡ 2 (3), x ≡ 3 (5)
        let expected = (0..15).find(|x| x % 3 == 2 && x % 5 == 3).unwrap();
        let plan = CascadePlan::new(&[scalar(3), scalar(5)]).unwrap();
        let got = plan.reconstruct(&[v(&[2]), v(&[3])]).unwrap();
        assert_eq!(got, v(&[expected]));
        assert_eq!(got, v(&[8]));
    }

    #[test]
    fn non_coprime_scalar_moduli_and_inconsistency() {
        let plan = CascadePlan::new(&[scalar(4), scalar(6)]).unwrap();
        assert_eq!(plan.lcrm().get(0, 0).abs(), BigInt::from(12));
        let got = plan.reconstruct(&[v(&[1]), v(&[3])]).unwrap();
        let x = got.entries()[0].clone();
        assert_eq!(x.mod_floor(&BigInt::from(4)), BigInt::from(1));
        assert_eq!(x.mod_floor(&BigInt::from(6)), BigInt::from(3));
        assert_eq!(
            plan.reconstruct(&[v(&[1]), v(&[2])]),
            Err(Error::Inconsistent { stage: 1 })
        );
    }

    #[test]
    fn cascade_with_printed_representatives() {
        let ms = [
            im(&[[5850, 9000], [2580, 2940]]),
            im(&[[28950, 24150], [14140, 11680]]),
            im(&[[3440, 3460], [1540, 1160]]),
        ];
        let r3 = im(&[[86850, -101250], [42420, -49800]]);
        let r = im(&[[774000, -6133500], [346500, -2746200]]);
        let plan = CascadePlan::with_lcrms(&ms, &[Some(r3), Some(r)]).unwrap();
        let (zeta, trace) = plan
            .reconstruct_with_trace(&[v(&[0, 0]), v(&[37650, 18320]), v(&[4490, 1660])])
            .unwrap();
        assert_eq!(trace[0], v(&[-20250, -9960]));
        assert_eq!(zeta, v(&[-5365350, -2402280]));
    }

    #[test]
    fn wrong_representative_rejected() {
        let ms = [im(&[[3, 1], [1, 2]]), im(&[[2, 0], [0, 2]])];
        assert!(matches!(
            CascadePlan::with_lcrms(&ms, &[Some(IntMatrix::identity(2))]),
            Err(Error::Invalid(_))
        ));
    }

    #[test]
    fn round_trip_small_systems() {
        let ms = [
            im(&[[3, 1], [1, 2]]),
            im(&[[2, 2], [1, 3]]),
            im(&[[4, -1], [1, 1]]),
        ];
        let plan = CascadePlan::new(&ms).unwrap();
        let r = plan.lcrm().clone();
        for m in crate::lattice::coset_representatives(&r, 100_000).unwrap() {
            let rems: Vec<IntVector> = ms.iter().map(|mi| mod_reduce(&m, mi).unwrap().1).collect();
            assert_eq!(plan.reconstruct(&rems).unwrap(), m);
            assert!(in_parallelepiped(&m, &r).unwrap());
        }
    }

    #[test]
    fn closed_form_scalars() {
        let expected = (0..105)
            .find(|x| x % 3 == 2 && x % 5 == 3 && x % 7 == 2)
            .unwrap();
        let (m, r) = crt_closed_form_coprime(
            &[scalar(3), scalar(5), scalar(7)],
            &[v(&[2]), v(&[3]), v(&[2])],
        )
        .unwrap();
        assert_eq!(m, v(&[expected]));
        assert_eq!(m, v(&[23]));
        assert_eq!(r, scalar(105));
    }

    #[test]
    fn closed_form_diagonal() {
        let a = IntMatrix::diag(&[2, 3]);
        let b = IntMatrix::diag(&[3, 2]);
        let target = v(&[5, 5]);
        let rems = [
            mod_reduce(&target, &a).unwrap().1,
            mod_reduce(&target, &b).unwrap().1,
        ];
        // brute force over N(diag(6, 6))
        let hits: Vec<IntVector> = (0..6)
            .flat_map(|x| (0..6).map(move |y| v(&[x, y])))
            .filter(|c| {
                mod_reduce(c, &a).unwrap().1 == rems[0] && mod_reduce(c, &b).unwrap().1 == rems[1]
            })
            .collect();
        assert_eq!(hits, vec![target.clone()]);
        let (m, _) = crt_closed_form_coprime(&[a, b], &rems).unwrap();
        assert_eq!(m, target);
    }

    #[test]
    fn closed_form_zero_and_preconditions() {
        let a = IntMatrix::diag(&[2, 3]);
        let b = IntMatrix::diag(&[3, 5]);
        let (m, _) = crt_closed_form_coprime(&[a.clone(), b], &[v(&[0, 0]), v(&[0, 0])]).unwrap();
        assert!(m.is_zero());
        let c = im(&[[1, 3], [3, 1]]);
        let d = im(&[[1, 2], [0, 1]]);
        assert!(matches!(
            crt_closed_form_coprime(&[c, d], &[v(&[0, 0]), v(&[0, 0])]),
            Err(Error::NotCommutativeCoprime(_))
        ));
        assert!(matches!(
            crt_closed_form_coprime(&[a.clone(), a], &[v(&[0, 0]), v(&[0, 0])]),
            Err(Error::NotCommutativeCoprime(_))
        ));
    }

    #[test]
    fn closed_form_agrees_with_cascade() {
        // commuting coprime pair: polynomials in the same matrix
        let base = im(&[[1, 3], [3, 1]]);
        let a = &base + &IntMatrix::identity(2);
        let b = &base + &IntMatrix::identity(2).scale(&BigInt::from(3));
        assert_eq!(&a * &b, &b * &a);
        let prod = &a * &b;
        let plan = CascadePlan::with_lcrms(&[a.clone(), b.clone()], &[Some(prod.clone())]).unwrap();
        for m in crate::lattice::coset_representatives(&prod, 100_000)
            .unwrap()
            .iter()
        {
            let rems = [mod_reduce(m, &a).unwrap().1, mod_reduce(m, &b).unwrap().1];
            let (closed, _) = crt_closed_form_coprime(&[a.clone(), b.clone()], &rems).unwrap();
            assert_eq!(&closed, m);
            assert_eq!(plan.reconstruct(&rems).unwrap(), closed);
        }
    }
}
