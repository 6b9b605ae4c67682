use mdcrt::intalg::{mod_reduce, remainder};
use mdcrt::mdcrt::{build_system, RobustOptions, SystemOptions};
use mdcrt::realcrt::{real_remainder, RealCongruenceSystem};
use mdcrt::{IntMatrix, IntVector, Norm, RealMatrix};
use num_traits::Zero;
use proptest::prelude::*;

fn mat(v: &[i64]) -> IntMatrix {
    IntMatrix::from_rows(&[[v[0], v[1]], [v[2], v[3]]])
}

fn nonsingular(range: i64) -> impl Strategy<Value = IntMatrix> {
    proptest::collection::vec(-range..=range, 4)
        .prop_map(|v| mat(&v))
        .prop_filter("nonsingular", |m| !m.determinant().unwrap().is_zero())
}

fn shared_factor_moduli(max_len: usize) -> impl Strategy<Value = Vec<IntMatrix>> {
    (
        nonsingular(6).prop_map(|a| &a * &IntMatrix::diag(&[3, 3])),
        (2usize..=max_len).prop_flat_map(|l| proptest::collection::vec(nonsingular(5), l)),
    )
        .prop_map(|(a, bs)| bs.iter().map(|b| &a * b).collect::<Vec<_>>())
        .prop_filter("distinct", |ms| {
            (0..ms.len()).all(|i| (i + 1..ms.len()).all(|j| ms[i] != ms[j]))
        })
}

fn real_matrix() -> impl Strategy<Value = RealMatrix> {
    proptest::collection::vec(-2.0f64..2.0, 4)
        .prop_map(|e| RealMatrix::from_rows(&[[e[0], e[1]], [e[2], e[3]]]))
        .prop_filter("well conditioned", |m| m.determinant().abs() > 0.25)
}

/// Point of the disk of radius `radius` from polar fractions.
fn in_disk(radius: f64, (rho, theta): (f64, f64)) -> Vec<f64> {
    let r = radius * rho.sqrt();
    let a = theta * std::f64::consts::TAU;
    vec![r * a.cos(), r * a.sin()]
}

fn integer_in_disk(radius: f64, polar: (f64, f64)) -> IntVector {
    let p = in_disk(radius, polar);
    let v = IntVector::from_i64s(&[p[0].trunc() as i64, p[1].trunc() as i64]);
    debug_assert!(Norm::L2.of(&v.to_f64()) <= radius);
    v
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// An integer instance with errors inside the bound, plus the integer result.
fn integer_instance(
    ms: &[IntMatrix],
    pick: &[i64],
    polars: &[(f64, f64)],
) -> Option<(IntVector, Vec<IntVector>)> {
    let s = build_system(ms).ok()?;
    let l0 = s.reference();
    let n = remainder(&IntVector::from_i64s(&pick[..2]), s.range_basis()).ok()?;
    let r = remainder(&IntVector::from_i64s(&pick[2..]), &ms[l0]).ok()?;
    let m = &(&ms[l0] * &n) + &r;
    let tau = 0.9 * s.robustness_bound();
    let noisy = ms
        .iter()
        .zip(polars)
        .map(|(mi, &p)| &mod_reduce(&m, mi).unwrap().1 + &integer_in_disk(tau, p))
        .collect();
    Some((m, noisy))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn scalar_scaling_equivariance(
        ms in shared_factor_moduli(3),
        pick in proptest::collection::vec(any::<i64>(), 4),
        polars in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0), 3),
        c in 0.05f64..20.0,
    ) {
        let (_, noisy) = integer_instance(&ms, &pick, &polars).unwrap();
        let int = build_system(&ms).unwrap();
        let ires = int.robust_reconstruct(&noisy, RobustOptions::default());
        prop_assume!(ires.is_ok());
        let ires = ires.unwrap();

        let s = RealCongruenceSystem::new(&ms, RealMatrix::scaled_identity(2, c), SystemOptions::default()).unwrap();
        prop_assert_eq!(s.reference(), int.reference());
        prop_assert!(close(s.robustness_bound(), c * int.robustness_bound()));
        let scaled: Vec<Vec<f64>> = noisy.iter().map(|r| r.to_f64().iter().map(|x| c * x).collect()).collect();
        let res = s.robust_reconstruct_real(&scaled, RobustOptions::default()).unwrap();
        prop_assert_eq!(&res.folding_vectors, &ires.folding_vectors);
        for (a, b) in res.estimate.iter().zip(&ires.estimate) {
            prop_assert!(close(*a, c * b), "{} vs {}", a, c * b);
        }
    }

    #[test]
    fn identity_agrees_with_integer_path(
        ms in shared_factor_moduli(3),
        pick in proptest::collection::vec(any::<i64>(), 4),
        polars in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0), 3),
    ) {
        let (_, noisy) = integer_instance(&ms, &pick, &polars).unwrap();
        let int = build_system(&ms).unwrap();
        let ires = int.robust_reconstruct(&noisy, RobustOptions::default());
        prop_assume!(ires.is_ok());
        let ires = ires.unwrap();
        let s = RealCongruenceSystem::new(&ms, RealMatrix::identity(2), SystemOptions::default()).unwrap();
        for p in s.pairs() {
            prop_assert!(close(p.lambda, int.lambda(p.i, p.j)));
        }
        let real: Vec<Vec<f64>> = noisy.iter().map(|r| r.to_f64()).collect();
        let res = s.robust_reconstruct_real(&real, RobustOptions::default()).unwrap();
        prop_assert_eq!(&res.folded, &ires.folded);
        prop_assert_eq!(&res.zeta, &ires.zeta);
        for (a, b) in res.estimate.iter().zip(&ires.estimate) {
            prop_assert!(close(*a, *b));
        }
    }

    #[test]
    fn real_errors_within_bound_are_absorbed(
        ms in shared_factor_moduli(2),
        real in real_matrix(),
        pick in proptest::collection::vec(any::<i64>(), 2),
        frac in proptest::collection::vec(0.0f64..1.0, 2),
        polars in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0), 2),
    ) {
        let s = RealCongruenceSystem::new(&ms, real.clone(), SystemOptions::default()).unwrap();
        let l0 = s.reference();
        let n = remainder(&IntVector::from_i64s(&pick), s.integer_system().range_basis()).unwrap();
        let x: Vec<f64> = n.to_f64().iter().zip(&frac).map(|(a, b)| a + b).collect();
        let m = real.mul_int(&ms[l0]).mul_vec(&x);

        let tau = 0.9 * s.robustness_bound();
        let errors: Vec<Vec<f64>> = polars.iter().map(|&p| in_disk(tau, p)).collect();
        let mut truth = Vec::new();
        let mut noisy = Vec::new();
        for (psi, e) in ms.iter().zip(&errors) {
            let (ni, ri) = real_remainder(&m, &real, psi).unwrap();
            truth.push(psi * &ni);
            noisy.push(ri.iter().zip(e).map(|(a, b)| a + b).collect::<Vec<f64>>());
        }
        let res = s.robust_reconstruct_real(&noisy, RobustOptions::default()).unwrap();
        prop_assert_eq!(&res.folded, &truth);
        let diff: Vec<f64> = res.estimate.iter().zip(&m).map(|(a, b)| a - b).collect();
        let max_err = errors.iter().map(|e| Norm::L2.of(e)).fold(0.0, f64::max);
        let scale = Norm::L2.of(&m).max(1.0);
        prop_assert!(Norm::L2.of(&diff) <= max_err + 1e-9 * scale);
    }
}
