//! Property tests for the seminorm, the quotient projection and the
//! canonical-form algebra.

use proptest::prelude::*;

use diampreserve_core::{
    achieving_pairs, compose, decompose, diam_squared, rat, sample, CanonicalForm, FieldTag,
    FunctionVector, LinearMap, Permutation, Rational, Scalar,
};

fn rational() -> impl Strategy<Value = Rational> {
    (-20i64..=20, 1i64..=20).prop_map(|(n, d)| rat(n, d))
}

fn scalar(field: FieldTag) -> BoxedStrategy<Scalar> {
    match field {
        FieldTag::Real => rational().prop_map(Scalar::from_rational).boxed(),
        FieldTag::Complex => (rational(), rational())
            .prop_map(|(re, im)| Scalar::new(re, im))
            .boxed(),
    }
}

fn vector(field: FieldTag, n: std::ops::RangeInclusive<usize>) -> BoxedStrategy<FunctionVector> {
    n.prop_flat_map(move |len| {
        proptest::collection::vec(scalar(field), len)
            .prop_map(move |entries| FunctionVector::new(field, entries).unwrap())
    })
    .boxed()
}

fn pair_of_vectors(field: FieldTag) -> impl Strategy<Value = (FunctionVector, FunctionVector)> {
    (2usize..=6).prop_flat_map(move |len| {
        (
            proptest::collection::vec(scalar(field), len)
                .prop_map(move |e| FunctionVector::new(field, e).unwrap()),
            proptest::collection::vec(scalar(field), len)
                .prop_map(move |e| FunctionVector::new(field, e).unwrap()),
        )
    })
}

fn unimodular(field: FieldTag) -> BoxedStrategy<Scalar> {
    match field {
        FieldTag::Real => prop_oneof![Just(Scalar::one()), Just(-Scalar::one())].boxed(),
        FieldTag::Complex => rational()
            .prop_map(|s| sample::unit_circle_point(&s))
            .boxed(),
    }
}

fn permutation(n: usize) -> impl Strategy<Value = Permutation> {
    Just((0..n).collect::<Vec<usize>>())
        .prop_shuffle()
        .prop_map(|map| Permutation::new(map).unwrap())
}

fn form(field: FieldTag, n: usize) -> impl Strategy<Value = CanonicalForm> {
    (
        unimodular(field),
        permutation(n),
        proptest::collection::vec(scalar(field), n),
    )
        .prop_map(move |(rotation, relabel, shift)| {
            CanonicalForm::new(
                field,
                rotation,
                relabel,
                FunctionVector::new(field, shift).unwrap(),
            )
            .unwrap()
        })
}

fn matrix(field: FieldTag, n: usize) -> impl Strategy<Value = LinearMap> {
    proptest::collection::vec(proptest::collection::vec(scalar(field), n), n)
        .prop_map(move |rows| LinearMap::new(field, rows).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn diam_is_translation_invariant(
        f in vector(FieldTag::Complex, 1..=6),
        c in scalar(FieldTag::Complex),
    ) {
        let shifted = f.translate(&c).unwrap();
        prop_assert_eq!(diam_squared(&shifted), diam_squared(&f));
    }

    #[test]
    fn diam_is_absolutely_homogeneous(
        f in vector(FieldTag::Complex, 1..=6),
        mu in scalar(FieldTag::Complex),
    ) {
        let scaled = f.scale(&mu).unwrap();
        prop_assert_eq!(diam_squared(&scaled), mu.modulus_sq() * diam_squared(&f));
    }

    #[test]
    fn diam_satisfies_the_triangle_inequality(
        (f, g) in pair_of_vectors(FieldTag::Complex),
    ) {
        let sum = f.add(&g).unwrap();
        prop_assert!(diampreserve_core::diam::sqrt_le_sum_of_sqrts(
            &diam_squared(&sum),
            &diam_squared(&f),
            &diam_squared(&g),
        ));
    }

    #[test]
    fn achieving_pairs_nonempty_iff_nonconstant(f in vector(FieldTag::Complex, 1..=6)) {
        prop_assert_eq!(achieving_pairs(&f).is_empty(), f.is_constant());
    }

    #[test]
    fn projected_columns_vanish_and_projection_is_idempotent(
        a in matrix(FieldTag::Complex, 4),
    ) {
        let m = a.quotient_project();
        for j in 0..4 {
            let mut acc = Scalar::zero();
            for i in 0..4 {
                acc = &acc + m.entry(i, j);
            }
            prop_assert!(acc.is_zero());
        }
        prop_assert_eq!(m.quotient_project(), m);
    }

    #[test]
    fn assemble_is_a_homomorphism(
        f in form(FieldTag::Complex, 4),
        g in form(FieldTag::Complex, 4),
    ) {
        let lhs = compose(&f, &g).unwrap().assemble();
        let rhs = f.assemble().matmul(&g.assemble()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn compose_is_associative(
        f in form(FieldTag::Complex, 4),
        g in form(FieldTag::Complex, 4),
        h in form(FieldTag::Complex, 4),
    ) {
        let left = compose(&compose(&f, &g).unwrap(), &h).unwrap();
        let right = compose(&f, &compose(&g, &h).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn inverse_is_two_sided(f in form(FieldTag::Complex, 4)) {
        prop_assume!(f.is_bijective().invertible);
        let inv = f.invert().unwrap();
        let id = CanonicalForm::identity(FieldTag::Complex, 4).unwrap();
        prop_assert_eq!(compose(&f, &inv).unwrap(), id.clone());
        prop_assert_eq!(compose(&inv, &f).unwrap(), id);
    }

    #[test]
    fn round_trip_from_three_up(
        n in 3usize..=7,
        seed in any::<u32>(),
    ) {
        for field in [FieldTag::Real, FieldTag::Complex] {
            let f = diampreserve_core::canonical::random_form(
                n,
                field,
                seed as u64,
                &diampreserve_core::FormOptions::default(),
            );
            prop_assert_eq!(decompose(&f.assemble()).unwrap(), f);
        }
    }

    #[test]
    fn assemble_is_injective_from_three_up(
        f in form(FieldTag::Complex, 4),
        g in form(FieldTag::Complex, 4),
    ) {
        prop_assume!(f != g);
        prop_assert_ne!(f.assemble(), g.assemble());
    }

    #[test]
    fn two_point_assembly_is_two_to_one(f in form(FieldTag::Complex, 2)) {
        // The partner triple with the swapped relabeling and negated factor
        // assembles identically; decompose picks the identity relabeling.
        let tau = f.rotation().clone();
        let partner_shift = f.shift().translate(&tau).unwrap();
        let partner = CanonicalForm::new(
            FieldTag::Complex,
            -tau,
            f.relabel().then(&Permutation::transposition(2, 0, 1)),
            partner_shift,
        )
        .unwrap();
        prop_assert_ne!(&partner, &f);
        prop_assert_eq!(partner.assemble(), f.assemble());
        let recovered = decompose(&f.assemble()).unwrap();
        prop_assert!(recovered.relabel().is_identity());
        prop_assert_eq!(recovered.assemble(), f.assemble());
    }

    #[test]
    fn preservation_of_diam_squared_is_exact(
        f in form(FieldTag::Complex, 5),
        v in vector(FieldTag::Complex, 5..=5),
    ) {
        let a = f.assemble();
        prop_assert_eq!(diam_squared(&a.apply(&v).unwrap()), diam_squared(&v));
    }
}
