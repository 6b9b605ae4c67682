//! Input schemas and the library call behind each subcommand.

use mdcrt::freqsim::ExperimentConfig;
use mdcrt::intalg::{gcld as lib_gcld, lcrm_many, smith_normal_form};
use mdcrt::lattice::LatticeBasis;
use mdcrt::mdcrt::{detect_redundant, CascadePlan, CongruenceSystem, RobustOptions, SystemOptions};
use mdcrt::realcrt::RealCongruenceSystem;
use mdcrt::wire::{reals, unreal, Real};
use mdcrt::{IntMatrix, IntVector, Norm, RealMatrix};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::{Failure, Format};

type Out = Result<String, Failure>;

pub fn json_only(format: Format, f: impl FnOnce() -> Out) -> Out {
    if format == Format::Csv {
        return Err(Failure::Malformed(
            "csv output is only available for simulate".into(),
        ));
    }
    f()
}

fn parse<T: DeserializeOwned>(text: &str) -> Result<T, Failure> {
    Ok(serde_json::from_str(text)?)
}

fn emit<T: Serialize>(value: &T) -> Out {
    let mut s = serde_json::to_string_pretty(value).expect("results serialize");
    s.push('\n');
    Ok(s)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixInput {
    matrix: IntMatrix,
}

#[derive(Serialize)]
struct SmithOutput {
    u: IntMatrix,
    v: IntMatrix,
    form: IntMatrix,
    invariant_factors: IntVector,
    rank: usize,
}

pub fn smith(text: &str) -> Out {
    let input: MatrixInput = parse(text)?;
    let s = smith_normal_form(&input.matrix);
    let rank = s.rank();
    emit(&SmithOutput {
        u: s.u,
        v: s.v,
        form: s.form,
        invariant_factors: IntVector::new(s.invariant_factors),
        rank,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PairInput {
    a: IntMatrix,
    b: IntMatrix,
}

#[derive(Serialize)]
struct GcldOutput {
    gcld: IntMatrix,
    p: IntMatrix,
    q: IntMatrix,
}

pub fn gcld(text: &str) -> Out {
    let input: PairInput = parse(text)?;
    let c = lib_gcld(&input.a, &input.b)?;
    emit(&GcldOutput {
        gcld: c.gcld,
        p: c.p,
        q: c.q,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModuliInput {
    moduli: Vec<IntMatrix>,
}

#[derive(Serialize)]
struct LcrmOutput {
    lcrm: IntMatrix,
    abs_det: String,
}

pub fn lcrm(text: &str) -> Out {
    let input: ModuliInput = parse(text)?;
    let r = lcrm_many(&input.moduli)?;
    let abs_det = num_abs(&r)?;
    emit(&LcrmOutput { lcrm: r, abs_det })
}

fn num_abs(m: &IntMatrix) -> Result<String, Failure> {
    Ok(m.determinant()?.magnitude().to_string())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LatticeInput {
    #[serde(default)]
    basis: Option<IntMatrix>,
    #[serde(default)]
    real_basis: Option<RealMatrix>,
    #[serde(default)]
    norm: Option<Norm>,
    #[serde(default)]
    target: Option<Vec<Real>>,
}

impl LatticeInput {
    fn lattice(&self, norm: Option<Norm>) -> Result<LatticeBasis, Failure> {
        let lat = match (&self.basis, &self.real_basis) {
            (Some(b), None) => LatticeBasis::from_int(b)?,
            (None, Some(b)) => LatticeBasis::from_real(b.clone())?,
            _ => {
                return Err(Failure::Malformed(
                    "give exactly one of basis, real_basis".into(),
                ))
            }
        };
        Ok(lat.with_norm(norm.or(self.norm).unwrap_or_default()))
    }
}

#[derive(Serialize)]
struct SvpOutput {
    norm: Norm,
    coefficients: IntVector,
    vector: Vec<Real>,
    length: Real,
}

pub fn svp(text: &str, norm: Option<Norm>) -> Out {
    let input: LatticeInput = parse(text)?;
    if input.target.is_some() {
        return Err(Failure::Malformed("svp takes no target".into()));
    }
    let lat = input.lattice(norm)?;
    let (coefficients, length) = lat.shortest_vector();
    let vector = lat.basis().mul_int_vec(coefficients.entries());
    emit(&SvpOutput {
        norm: lat.norm(),
        coefficients,
        vector: reals(&vector),
        length: Real(length),
    })
}

#[derive(Serialize)]
struct CvpOutput {
    norm: Norm,
    coefficients: IntVector,
    point: Vec<Real>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_point: Option<IntVector>,
    distance: Real,
    unique: bool,
}

pub fn cvp(text: &str, norm: Option<Norm>) -> Out {
    let input: LatticeInput = parse(text)?;
    let Some(target) = &input.target else {
        return Err(Failure::Malformed("missing field `target`".into()));
    };
    let lat = input.lattice(norm)?;
    let target = unreal(target);
    if target.iter().any(|x| !x.is_finite()) {
        return Err(Failure::Malformed("target entries must be finite".into()));
    }
    // integral targets on an integer basis go through the exact search
    let exact =
        input.basis.is_some() && target.iter().all(|x| x.fract() == 0.0 && x.abs() < 9.0e15);
    let r = if exact {
        let w = IntVector::from_i64s(&target.iter().map(|&x| x as i64).collect::<Vec<_>>());
        lat.closest_point_exact(&w)?
    } else {
        lat.closest_point(&target)?
    };
    emit(&CvpOutput {
        norm: lat.norm(),
        coefficients: r.coefficients,
        point: reals(&r.point),
        exact_point: r.exact_point,
        distance: Real(r.distance),
        unique: r.unique,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CrtInput {
    moduli: Vec<IntMatrix>,
    remainders: Vec<IntVector>,
    #[serde(default)]
    partial_lcrms: Vec<IntMatrix>,
    #[serde(default)]
    lcrm: Option<IntMatrix>,
}

#[derive(Serialize)]
struct CrtOutput {
    m: IntVector,
    lcrm: IntMatrix,
    partial_solutions: Vec<IntVector>,
}

pub fn crt(text: &str) -> Out {
    let input: CrtInput = parse(text)?;
    let mut overrides: Vec<Option<IntMatrix>> = input.partial_lcrms.into_iter().map(Some).collect();
    if let Some(r) = input.lcrm {
        let stages = input.moduli.len().saturating_sub(1);
        if overrides.len() + 1 != stages {
            return Err(Failure::Malformed(format!(
                "lcrm override needs all {} partial lcrms before it",
                stages.saturating_sub(1)
            )));
        }
        overrides.push(Some(r));
    }
    let plan = CascadePlan::with_lcrms(&input.moduli, &overrides)?;
    let (m, partial_solutions) = plan.reconstruct_with_trace(&input.remainders)?;
    emit(&CrtOutput {
        m,
        lcrm: plan.lcrm().clone(),
        partial_solutions,
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(deserialize = "R: Deserialize<'de>"))]
struct SystemInput<R> {
    #[serde(alias = "psi")]
    moduli: Vec<IntMatrix>,
    #[serde(default)]
    real_matrix: Option<RealMatrix>,
    #[serde(default)]
    remainders: Option<Vec<R>>,
    #[serde(default)]
    norm: Option<Norm>,
    #[serde(default)]
    reference: Option<usize>,
    #[serde(default)]
    partial_lcrms: Option<Vec<IntMatrix>>,
    #[serde(default)]
    lcrm: Option<IntMatrix>,
    #[serde(default)]
    allow_ties: bool,
}

impl<R> SystemInput<R> {
    fn options(&self, norm: Option<Norm>) -> SystemOptions {
        SystemOptions {
            norm: norm.or(self.norm).unwrap_or_default(),
            reference: self.reference,
            partial_lcrms: self.partial_lcrms.clone(),
            lcrm: self.lcrm.clone(),
            ..Default::default()
        }
    }

    fn remainders(&self) -> Result<&[R], Failure> {
        self.remainders
            .as_deref()
            .ok_or_else(|| Failure::Malformed("missing field `remainders`".into()))
    }
}

#[derive(Serialize)]
struct PairOutput {
    i: usize,
    j: usize,
    gcld: IntMatrix,
    lambda: Real,
}

#[derive(Serialize)]
struct ModulusBoundOutput {
    index: usize,
    bound: Real,
    strict: bool,
}

#[derive(Serialize)]
struct BoundsOutput {
    norm: Norm,
    pairs: Vec<PairOutput>,
    reference: usize,
    robustness_bound: Real,
    per_modulus: Vec<ModulusBoundOutput>,
    lcrm: IntMatrix,
}

fn pair_table(s: &CongruenceSystem) -> Vec<PairOutput> {
    s.pairs()
        .iter()
        .map(|p| PairOutput {
            i: p.i,
            j: p.j,
            gcld: p.gcld.clone(),
            lambda: Real(p.lambda),
        })
        .collect()
}

pub fn bounds(text: &str, norm: Option<Norm>) -> Out {
    let input: SystemInput<IntVector> = parse(text)?;
    // remainders, if present, are ignored so a robust-crt input can be reused
    if input.real_matrix.is_some() {
        return Err(Failure::Malformed(
            "real_matrix belongs to robust-crt-real".into(),
        ));
    }
    let s = CongruenceSystem::new(&input.moduli, input.options(norm))?;
    emit(&BoundsOutput {
        norm: s.norm(),
        pairs: pair_table(&s),
        reference: s.reference(),
        robustness_bound: Real(s.robustness_bound()),
        per_modulus: s
            .per_modulus_bounds()
            .into_iter()
            .map(|b| ModulusBoundOutput {
                index: b.index,
                bound: Real(b.bound),
                strict: b.strict,
            })
            .collect(),
        lcrm: s.lcrm().clone(),
    })
}

#[derive(Serialize)]
struct RobustOutput {
    norm: Norm,
    reference: usize,
    robustness_bound: Real,
    pairs: Vec<PairOutput>,
    cvp_points: Vec<IntVector>,
    cvp_unique: Vec<bool>,
    folding_vectors: Vec<IntVector>,
    folded: Vec<IntVector>,
    estimate: Vec<Real>,
    rounded_estimate: IntVector,
    within_range: bool,
}

pub fn robust_crt(text: &str, norm: Option<Norm>) -> Out {
    let input: SystemInput<IntVector> = parse(text)?;
    if input.real_matrix.is_some() {
        return Err(Failure::Malformed(
            "real_matrix belongs to robust-crt-real".into(),
        ));
    }
    let s = CongruenceSystem::new(&input.moduli, input.options(norm))?;
    let r = s.robust_reconstruct(
        input.remainders()?,
        RobustOptions {
            allow_ties: input.allow_ties,
        },
    )?;
    let rounded_estimate = r.rounded_estimate();
    emit(&RobustOutput {
        norm: s.norm(),
        reference: s.reference(),
        robustness_bound: Real(s.robustness_bound()),
        pairs: pair_table(&s),
        cvp_points: r.cvp_points,
        cvp_unique: r.cvp_unique,
        folding_vectors: r.folding_vectors,
        folded: r.folded,
        estimate: reals(&r.estimate),
        rounded_estimate,
        within_range: r.within_range,
    })
}

#[derive(Serialize)]
struct RealRobustOutput {
    norm: Norm,
    reference: usize,
    robustness_bound: Real,
    cvp_points: Vec<Vec<Real>>,
    cvp_unique: Vec<bool>,
    integer_differences: Vec<IntVector>,
    folding_vectors: Vec<IntVector>,
    folded: Vec<IntVector>,
    estimate: Vec<Real>,
    max_snap_deviation: Real,
    within_range: bool,
}

pub fn robust_crt_real(text: &str, norm: Option<Norm>) -> Out {
    let input: SystemInput<Vec<Real>> = parse(text)?;
    let Some(real) = input.real_matrix.clone() else {
        return Err(Failure::Malformed("missing field `real_matrix`".into()));
    };
    let s = RealCongruenceSystem::new(&input.moduli, real, input.options(norm))?;
    let rems: Vec<Vec<f64>> = input.remainders()?.iter().map(|r| unreal(r)).collect();
    if rems.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Failure::Malformed("remainders must be finite".into()));
    }
    let r = s.robust_reconstruct_real(
        &rems,
        RobustOptions {
            allow_ties: input.allow_ties,
        },
    )?;
    emit(&RealRobustOutput {
        norm: s.norm(),
        reference: s.reference(),
        robustness_bound: Real(s.robustness_bound()),
        cvp_points: r.cvp_points.iter().map(|v| reals(v)).collect(),
        cvp_unique: r.cvp_unique,
        integer_differences: r.integer_differences,
        folding_vectors: r.folding_vectors,
        folded: r.folded,
        estimate: reals(&r.estimate),
        max_snap_deviation: Real(r.max_snap_deviation),
        within_range: r.within_range,
    })
}

#[derive(Serialize)]
struct RedundancyOutput {
    redundant: usize,
    witness: usize,
}

pub fn redundant(text: &str) -> Out {
    let input: ModuliInput = parse(text)?;
    let found: Vec<RedundancyOutput> = detect_redundant(&input.moduli)?
        .into_iter()
        .map(|r| RedundancyOutput {
            redundant: r.redundant,
            witness: r.witness,
        })
        .collect();
    emit(&found)
}

pub struct SimOverrides {
    pub norm: Option<Norm>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
}

#[derive(Serialize)]
struct PointOutput {
    grid_value: Real,
    mean_error: Real,
    mean_relative_error: Real,
    detection_probability: Real,
    trials: usize,
    failures: usize,
    max_remainder_error: Real,
}

#[derive(Serialize)]
struct SweepOutput {
    kind: mdcrt::freqsim::GridKind,
    reference: usize,
    robustness_bound: Real,
    points: Vec<PointOutput>,
}

pub fn simulate(text: &str, overrides: SimOverrides, csv: bool) -> Out {
    let mut config = ExperimentConfig::from_json(text)?;
    if let Some(n) = overrides.norm {
        config.norm = n;
    }
    if let Some(s) = overrides.seed {
        config.rng_seed = s;
    }
    if let Some(t) = overrides.trials {
        config.trials = t;
    }
    let exp = config.validate()?;
    let sweep = exp.run_sweep();
    if csv {
        return Ok(sweep.to_csv());
    }
    emit(&SweepOutput {
        kind: sweep.kind,
        reference: exp.system().reference(),
        robustness_bound: Real(exp.system().robustness_bound()),
        points: sweep
            .points
            .iter()
            .map(|p| PointOutput {
                grid_value: Real(p.grid_value),
                mean_error: Real(p.mean_error),
                mean_relative_error: Real(p.mean_relative_error),
                detection_probability: Real(p.detection_probability),
                trials: p.trials,
                failures: p.failures,
                max_remainder_error: Real(p.max_remainder_error),
            })
            .collect(),
    })
}
