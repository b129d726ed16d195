//! Property tests of the algebraic layer: combination monotonicity and
//! normalization, the dilation and compactness exponent identities.

use proptest::prelude::*;

use pqlab::calculus::{combine, first_eigenvalue_union, Selection};
use pqlab::domain::{
    compactness_exponent, dilation_exponent, scale_eigenvalue_with, ComponentDomain, Exponents,
    TailRule,
};

fn exponent_pair() -> impl Strategy<Value = (f64, f64)> {
    (1.2f64..6.0).prop_flat_map(|p| (Just(p), 1.01f64..(p - 0.1).max(1.02)))
        .prop_filter("q < p", |(p, q)| q < p)
}

fn lambda_vec() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.1f64..1e4, 1..6)
}

proptest! {
    #[test]
    fn combination_is_monotone_in_components((p, q) in exponent_pair(), lambdas in lambda_vec(), extra in 0.1f64..1e4) {
        let e = Exponents::strict(p, q).unwrap();
        let without = first_eigenvalue_union(&e, &lambdas).unwrap();
        let mut bigger = lambdas.clone();
        bigger.push(extra);
        let with = first_eigenvalue_union(&e, &bigger).unwrap();
        // Adding a component strictly lowers the first eigenvalue, up to
        // rounding when the new summand underflows against the sum.
        prop_assert!(with <= without);
        prop_assert!(with <= extra);
    }

    #[test]
    fn combination_is_monotone_in_each_entry((p, q) in exponent_pair(), lambdas in lambda_vec(), idx in any::<prop::sample::Index>(), shrink in 0.05f64..0.95) {
        let e = Exponents::strict(p, q).unwrap();
        let before = first_eigenvalue_union(&e, &lambdas).unwrap();
        let mut lowered = lambdas.clone();
        let i = idx.index(lowered.len());
        lowered[i] *= shrink;
        let after = first_eigenvalue_union(&e, &lowered).unwrap();
        prop_assert!(after <= before);
    }

    #[test]
    fn coefficients_stay_normalized((p, q) in exponent_pair(), lambdas in lambda_vec()) {
        let e = Exponents::strict(p, q).unwrap();
        let selection = Selection::new(lambdas.iter().map(|l| Some(*l)).collect());
        let pair = combine(&e, &selection).unwrap();
        let norm: f64 = pair.coefficients.iter().map(|a| a.abs().powf(q)).sum();
        prop_assert!((norm - 1.0).abs() < 1e-9, "norm = {}", norm);
    }

    #[test]
    fn singleton_collapse_is_exact((p, q) in exponent_pair(), lambda in 1e-6f64..1e6) {
        let e = Exponents::strict(p, q).unwrap();
        let pair = combine(&e, &Selection::new(vec![None, Some(lambda), None])).unwrap();
        prop_assert_eq!(pair.value, lambda);
    }

    #[test]
    fn compactness_and_dilation_exponents_agree((p, q) in exponent_pair(), dim in 1u32..6) {
        let e = Exponents::strict(p, q).unwrap();
        // lambda(r B)^{-q/(p-q)} = lambda(B)^{-q/(p-q)} r^{pq/(p-q)+N}: the
        // compactness summand exponent is the dilation exponent times the
        // combination exponent, negated.
        let lhs = compactness_exponent(&e, dim);
        let rhs = -dilation_exponent(&e, dim) * e.combination_exponent();
        prop_assert!((lhs - rhs).abs() < 1e-9 * lhs.abs(), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn summand_ratio_matches_closed_form((p, q) in exponent_pair(), dim in 1u32..6, rho in 0.05f64..0.95) {
        let e = Exponents::strict(p, q).unwrap();
        let tail = TailRule::new(1.0, rho, dim).unwrap();
        let want = rho.powf(p * q / (p - q) + dim as f64);
        let got = tail.summand_ratio(&e);
        prop_assert!((got - want).abs() <= 1e-12 * want.max(1.0), "{} vs {}", got, want);
    }

    #[test]
    fn dilations_compose((p, q) in exponent_pair(), dim in 1u32..4, lambda in 0.1f64..1e4, s in 0.2f64..4.0, t in 0.2f64..4.0) {
        let e = Exponents::strict(p, q).unwrap();
        let domain = ComponentDomain::ball(1.0, dim).unwrap();
        let step = scale_eigenvalue_with(&e, scale_eigenvalue_with(&e, lambda, &domain, s).unwrap(), &domain, t).unwrap();
        let joint = scale_eigenvalue_with(&e, lambda, &domain, s * t).unwrap();
        prop_assert!((step - joint).abs() < 1e-9 * joint.abs(), "{} vs {}", step, joint);
    }
}
