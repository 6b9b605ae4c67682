use num_traits::Zero;

use super::cascade::CascadePlan;
use crate::error::{Error, Result};
use crate::intalg::{gcld, in_parallelepiped, mod_reduce, IntMatrix, IntVector};
use crate::lattice::{LatticeBasis, LatticeConfig, Norm};

/// Build-time choices for a [`CongruenceSystem`].
#[derive(Clone, Debug, Default)]
pub struct SystemOptions {
    pub norm: Norm,
    /// Force the reference modulus instead of maximizing the worst pairwise
    /// minimum distance.
    pub reference: Option<usize>,
    /// Representatives for the partial lcrms `R_3, …, R_L` (the final `R`
    /// goes in `lcrm`).
    pub partial_lcrms: Option<Vec<IntMatrix>>,
    /// Representative for `R = lcrm(M_1, …, M_L)`.
    pub lcrm: Option<IntMatrix>,
    pub lattice: LatticeConfig,
}

/// One entry of the pairwise gcld table.
#[derive(Clone, Debug)]
pub struct PairInfo {
    pub i: usize,
    pub j: usize,
    pub gcld: IntMatrix,
    pub lambda: f64,
    pub(crate) lattice: LatticeBasis,
}

/// Moduli with everything the exact and robust reconstructions need:
/// pairwise gclds and their minimum distances, the reference modulus, the
/// robustness bound and the cascade plan.
#[derive(Clone, Debug)]
pub struct CongruenceSystem {
    moduli: Vec<IntMatrix>,
    norm: Norm,
    pairs: Vec<PairInfo>,
    reference: usize,
    bound: f64,
    plan: CascadePlan,
    /// `M_{l0}⁻¹·R`, integral.
    range_basis: IntMatrix,
}

pub fn build_system(moduli: &[IntMatrix]) -> Result<CongruenceSystem> {
    CongruenceSystem::new(moduli, SystemOptions::default())
}

impl CongruenceSystem {
    pub fn new(moduli: &[IntMatrix], options: SystemOptions) -> Result<Self> {
        if moduli.len() < 2 {
            return Err(Error::TooFewModuli {
                needed: 2,
                got: moduli.len(),
            });
        }
        let d = moduli[0].rows();
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
        for i in 0..moduli.len() {
            for j in i + 1..moduli.len() {
                if moduli[i] == moduli[j] {
                    return Err(Error::DuplicateModuli(i, j));
                }
            }
        }

        let mut pairs = Vec::new();
        for i in 0..moduli.len() {
            for j in i + 1..moduli.len() {
                let g = gcld(&moduli[i], &moduli[j])?.gcld;
                let lattice = LatticeBasis::from_int(&g)?
                    .with_norm(options.norm)
                    .with_config(options.lattice);
                pairs.push(PairInfo {
                    i,
                    j,
                    lambda: lattice.minimum_distance(),
                    gcld: g,
                    lattice,
                });
            }
        }

        let worst = |i: usize| {
            pairs
                .iter()
                .filter(|p| p.i == i || p.j == i)
                .map(|p| p.lambda)
                .fold(f64::INFINITY, f64::min)
        };
        let reference = match options.reference {
            Some(r) if r < moduli.len() => r,
            Some(r) => {
                return Err(Error::Invalid(format!(
                    "reference index {r} out of range for {} moduli",
                    moduli.len()
                )))
            }
            None => {
                // smallest index among maximizers
                let mut best = 0;
                let mut best_val = worst(0);
                for i in 1..moduli.len() {
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

        let mut overrides: Vec<Option<IntMatrix>> = vec![None; moduli.len() - 1];
        if let Some(partials) = &options.partial_lcrms {
            if partials.len() + 2 != moduli.len() {
                return Err(Error::Invalid(format!(
                    "{} partial lcrms given, {} expected",
                    partials.len(),
                    moduli.len() - 2
                )));
            }
            for (slot, r) in overrides.iter_mut().zip(partials) {
                *slot = Some(r.clone());
            }
        }
        if let Some(r) = &options.lcrm {
            *overrides.last_mut().expect("L >= 2") = Some(r.clone());
        }
        let plan = CascadePlan::with_lcrms(moduli, &overrides)?;
        let range_basis = moduli[reference]
            .left_quotient(plan.lcrm())?
            .expect("the lcrm is a right multiple of every modulus");

        Ok(CongruenceSystem {
            moduli: moduli.to_vec(),
            norm: options.norm,
            pairs,
            reference,
            bound,
            plan,
            range_basis,
        })
    }

    pub fn moduli(&self) -> &[IntMatrix] {
        &self.moduli
    }

    pub fn len(&self) -> usize {
        self.moduli.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moduli.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.moduli[0].rows()
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    /// Pairwise table in order (0,1), (0,2), …, (1,2), ….
    pub fn pairs(&self) -> &[PairInfo] {
        &self.pairs
    }

    pub fn pair(&self, i: usize, j: usize) -> &PairInfo {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.pairs
            .iter()
            .find(|p| p.i == a && p.j == b)
            .expect("pair indices in range and distinct")
    }

    pub fn lambda(&self, i: usize, j: usize) -> f64 {
        self.pair(i, j).lambda
    }

    pub fn reference(&self) -> usize {
        self.reference
    }

    /// `min_{j≠l0} λ(M_{l0 j}) / 4`.
    pub fn robustness_bound(&self) -> f64 {
        self.bound
    }

    pub fn lcrm(&self) -> &IntMatrix {
        self.plan.lcrm()
    }

    pub fn plan(&self) -> &CascadePlan {
        &self.plan
    }

    /// `M_{l0}⁻¹·R`, whose parallelepiped bounds the folding vector of the
    /// reference modulus.
    pub fn range_basis(&self) -> &IntMatrix {
        &self.range_basis
    }

    /// Exact reconstruction from error-free remainders.
    pub fn crt_reconstruct(&self, remainders: &[IntVector]) -> Result<IntVector> {
        self.plan.reconstruct(remainders)
    }

    /// `⌊M_{l0}⁻¹m⌋ ∈ N(M_{l0}⁻¹R)`, evaluated exactly.
    pub fn range_check(&self, m: &IntVector) -> Result<bool> {
        let (n, _) = mod_reduce(m, &self.moduli[self.reference])?;
        in_parallelepiped(&n, &self.range_basis)
    }

    /// True iff 0 is the unique closest point of `L(M_{l0 j})` to
    /// `Δr_j − Δr_{l0}` for every `j ≠ l0`.
    pub fn check_condition_sn(&self, errors: &[IntVector]) -> Result<bool> {
        self.check_len(errors.len())?;
        let l0 = self.reference;
        for j in (0..self.len()).filter(|&j| j != l0) {
            let diff = &errors[j] - &errors[l0];
            let cvp = self.pair(l0, j).lattice.closest_point_exact(&diff)?;
            if !cvp.coefficients.is_zero() || !cvp.unique {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Individual remainder error bounds: the reference gets a strict bound
    /// `min_j λ(M_{l0 j})/4`, every other modulus `λ(M_{l0 i})/2 − min_j λ/4`.
    pub fn per_modulus_bounds(&self) -> Vec<ModulusBound> {
        (0..self.len())
            .map(|i| {
                if i == self.reference {
                    ModulusBound {
                        index: i,
                        bound: self.bound,
                        strict: true,
                    }
                } else {
                    ModulusBound {
                        index: i,
                        bound: self.lambda(self.reference, i) / 2.0 - self.bound,
                        strict: false,
                    }
                }
            })
            .collect()
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if n != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "{n} vectors for {} moduli",
                self.len()
            )));
        }
        Ok(())
    }
}

/// Allowed error for one remainder; `strict` means the bound itself is
/// excluded.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModulusBound {
    pub index: usize,
    pub bound: f64,
    pub strict: bool,
}

/// A modulus that can be dropped because another one is a right multiple of
/// it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Redundancy {
    pub redundant: usize,
    pub witness: usize,
}

/// Flags every `M_{i2}` that left-divides some other modulus `M_{i1}`.
/// When two moduli span the same lattice only the later one is flagged, so
/// one of them always survives.
pub fn detect_redundant(moduli: &[IntMatrix]) -> Result<Vec<Redundancy>> {
    let mut out = Vec::new();
    for (i2, m2) in moduli.iter().enumerate() {
        for (i1, m1) in moduli.iter().enumerate() {
            if i1 == i2 || !m2.left_divides(m1)? {
                continue;
            }
            let mutual = m1.left_divides(m2)?;
            if mutual && i2 < i1 {
                continue;
            }
            out.push(Redundancy {
                redundant: i2,
                witness: i1,
            });
            break;
        }
    }
    Ok(out)
}
