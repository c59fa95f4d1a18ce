use std::sync::OnceLock;

use proptest::prelude::*;

use minrep_core::bessel;
use minrep_core::catalog::{Family, Multiplicities};
use minrep_core::liealg::{build_model, GradedModel};
use minrep_core::montecarlo::Accumulator;
use minrep_core::orbit;
use minrep_core::poly::Poly;
use minrep_core::rational::{q, qr, HalfInt};
use minrep_core::sphver;
use minrep_core::tensor;

fn models() -> &'static [GradedModel] {
    static MODELS: OnceLock<Vec<GradedModel>> = OnceLock::new();
    MODELS.get_or_init(|| {
        vec![
            build_model(Family::OSplit, 2).unwrap(),
            build_model(Family::OSplit, 3).unwrap(),
            build_model(Family::GlReal, 2).unwrap(),
            build_model(Family::GlReal, 3).unwrap(),
        ]
    })
}

fn poly(vars: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec((prop::collection::vec(0u32..3, vars), -5i64..=5, 1i64..4), 0..6).prop_map(
        move |terms| {
            let mut p = Poly::zero(vars);
            for (m, n, d) in terms {
                p.add_term(m, qr(n, d));
            }
            p
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn k_prime_holds_for_any_seed(idx in 0usize..4, seed in any::<u64>()) {
        let m = &models()[idx];
        let rep = sphver::verify_kprime(m, 4, seed);
        prop_assert!(rep.passed(), "{:?}", rep.failures().collect::<Vec<_>>());
    }

    #[test]
    fn stabilizer_dimension_constant_on_orbit(idx in 0usize..4, seed in any::<u64>()) {
        let m = &models()[idx];
        let s1 = m.stabilizer_algebra(m.y(0)).unwrap().len();
        let orbit_dim = m.l_range().len() - s1;
        prop_assert_eq!(Some(orbit_dim), tensor::expected_orbit_dim(m, 1));
        for p in orbit::sample_orbit_rational(m, 3, seed) {
            prop_assert_eq!(m.stabilizer_algebra(&p.y).unwrap().len(), s1);
        }
    }
}

proptest! {
    #[test]
    fn crown_matches_d_for_true_constants(d in 1u32..12, e in 0u32..4) {
        let mult = Multiplicities { d, e };
        let asm = sphver::crown_from_constants(mult, q(1), q(2), q(2) - q(2) * q(e as i64));
        prop_assert!(asm.matches());
    }

    #[test]
    fn crown_rejects_wrong_constants(d in 1u32..12, e in 0u32..4, dk in -3i64..=3, dkp in -3i64..=3) {
        prop_assume!(dk != 0 || dkp != 0);
        let mult = Multiplicities { d, e };
        let asm = sphver::crown_from_constants(
            mult,
            q(1) + qr(dk, 2 * d as i64),
            q(2) + q(dkp),
            q(2) - q(2) * q(e as i64),
        );
        prop_assert!(!asm.matches());
    }

    #[test]
    fn bessel_recurrence(nu in 1i32..4, z in 0.2f64..30.0) {
        let k = |t: i32| bessel::bessel_k(HalfInt::from_int(t), z).unwrap();
        let lhs = k(nu + 1) - k(nu - 1);
        let rhs = 2.0 * nu as f64 / z * k(nu);
        prop_assert!((lhs - rhs).abs() <= 1e-8 * rhs.abs(), "{lhs} vs {rhs}");
    }

    #[test]
    fn bessel_even_in_order(twice in -7i32..=7, z in 0.1f64..40.0) {
        let t = HalfInt::from_twice(twice);
        let a = bessel::bessel_k(t, z).unwrap();
        let b = bessel::bessel_k(-t, z).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs());
    }

    #[test]
    fn phi_solves_d(twice in -1i32..=3, z in 0.1f64..50.0) {
        let t = HalfInt::from_twice(twice);
        let (phi, d1, d2) = bessel::phi_tau(t, z).unwrap();
        let terms = [4.0 * z * d2, 4.0 * (t.to_f64() + 1.0) * d1, -phi];
        let scale: f64 = terms.iter().map(|v| v.abs()).sum();
        prop_assert!((terms[0] + terms[1] + terms[2]).abs() <= 1e-9 * scale);
    }

    #[test]
    fn poly_product_rule(a in poly(3), b in poly(3), i in 0usize..3) {
        let lhs = (&a * &b).derivative(i);
        let rhs = &(&a.derivative(i) * &b) + &(&a * &b.derivative(i));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn accumulator_merge_matches_single_pass(xs in prop::collection::vec(-1e3f64..1e3, 2..200), cut in 0usize..200) {
        let cut = cut.min(xs.len());
        let mut whole = Accumulator::default();
        xs.iter().for_each(|&x| whole.push(x));
        let (mut left, mut right) = (Accumulator::default(), Accumulator::default());
        xs[..cut].iter().for_each(|&x| left.push(x));
        xs[cut..].iter().for_each(|&x| right.push(x));
        left.merge(&right);
        prop_assert_eq!(left.n, whole.n);
        prop_assert!((left.mean() - whole.mean()).abs() <= 1e-9 * (1.0 + whole.mean().abs()));
        prop_assert!((left.variance() - whole.variance()).abs() <= 1e-8 * (1.0 + whole.variance()));
    }

    #[test]
    fn half_int_round_trip(twice in -10_000i32..10_000) {
        let h = HalfInt::from_twice(twice);
        prop_assert_eq!(HalfInt::parse(&h.to_string()).unwrap(), h);
        prop_assert_eq!(HalfInt::parse(&format!("{}", h.to_f64())).unwrap(), h);
    }
}
