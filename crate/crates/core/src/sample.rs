//! Seeded random generation of exact scalars, vectors and matrices.
//!
//! Everything routes through `ChaCha8Rng` from an explicit `u64` seed, so
//! any generated object is reproducible from its seed alone.

use alloc::vec::Vec;

use num_bigint::BigInt;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::matrix::LinearMap;
use crate::scalar::{FieldTag, Rational, Scalar};
use crate::vector::FunctionVector;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A rational with numerator in `[-bound, bound]` and denominator in `[1, bound]`.
pub fn random_rational(rng: &mut ChaCha8Rng, bound: i64) -> Rational {
    let bound = bound.max(1);
    let numer = rng.random_range(-bound..=bound);
    let denom = rng.random_range(1..=bound);
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn random_scalar(rng: &mut ChaCha8Rng, field: FieldTag, bound: i64) -> Scalar {
    match field {
        FieldTag::Real => Scalar::from_rational(random_rational(rng, bound)),
        FieldTag::Complex => Scalar::new(random_rational(rng, bound), random_rational(rng, bound)),
    }
}

/// A random point on the unit circle with exact rational coordinates,
/// via the parametrization `((1−s²) + 2si)/(1+s²)` with rational `s`.
/// Always has `|τ|² = 1` exactly; only `((−1, 0))` is unreachable.
pub fn random_unit_circle(rng: &mut ChaCha8Rng, bound: i64) -> Scalar {
    let s = random_rational(rng, bound);
    unit_circle_point(&s)
}

/// The rational circle point for parameter `s`.
pub fn unit_circle_point(s: &Rational) -> Scalar {
    let one = Rational::from_integer(1.into());
    let two = Rational::from_integer(2.into());
    let s_sq = s * s;
    let denom = &one + &s_sq;
    Scalar::new((&one - &s_sq) / &denom, (two * s) / denom)
}

/// Either `+1` or `−1`.
pub fn random_sign(rng: &mut ChaCha8Rng) -> Scalar {
    if rng.random_bool(0.5) {
        Scalar::one()
    } else {
        -Scalar::one()
    }
}

/// A unimodular scalar appropriate for the field: `±1` over the reals,
/// a rational circle point over the complexes.
pub fn random_unimodular(rng: &mut ChaCha8Rng, field: FieldTag, bound: i64) -> Scalar {
    match field {
        FieldTag::Real => random_sign(rng),
        FieldTag::Complex => random_unit_circle(rng, bound),
    }
}

pub fn random_vector(
    rng: &mut ChaCha8Rng,
    field: FieldTag,
    n: usize,
    bound: i64,
) -> FunctionVector {
    let entries: Vec<Scalar> = (0..n).map(|_| random_scalar(rng, field, bound)).collect();
    FunctionVector::new(field, entries).expect("n >= 1")
}

/// A random matrix with small rational entries. Not guaranteed invertible.
pub fn random_matrix(rng: &mut ChaCha8Rng, field: FieldTag, n: usize, bound: i64) -> LinearMap {
    let rows: Vec<Vec<Scalar>> = (0..n)
        .map(|_| (0..n).map(|_| random_scalar(rng, field, bound)).collect())
        .collect();
    LinearMap::new(field, rows).expect("square by construction")
}

/// A random invertible matrix, resampling until the determinant is nonzero.
pub fn random_invertible(rng: &mut ChaCha8Rng, field: FieldTag, n: usize, bound: i64) -> LinearMap {
    loop {
        let a = random_matrix(rng, field, n, bound);
        if a.is_invertible() {
            return a;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn circle_points_are_unimodular() {
        let mut rng = rng_from_seed(11);
        for _ in 0..200 {
            let z = random_unit_circle(&mut rng, 30);
            assert!(z.is_unimodular());
        }
        assert_eq!(unit_circle_point(&rat(0, 1)), Scalar::one());
        assert_eq!(unit_circle_point(&rat(1, 1)), Scalar::i());
        // s = 4/7 is a 60°-ish circle point: (33 + 56i)/65.
        assert_eq!(
            unit_circle_point(&rat(4, 7)),
            Scalar::complex(33, 65, 56, 65)
        );
    }

    #[test]
    fn seeded_generation_is_deterministic() {
        let a = random_matrix(&mut rng_from_seed(7), FieldTag::Complex, 4, 9);
        let b = random_matrix(&mut rng_from_seed(7), FieldTag::Complex, 4, 9);
        assert_eq!(a, b);
    }
}
