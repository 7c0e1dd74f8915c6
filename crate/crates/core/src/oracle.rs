//! Independent checkers that never consult the canonical form.
//!
//! Over the reals the set `{f : diam(f) ≤ 1}` is the unit cube plus
//! constants, so after modding out constants the unit ball is the
//! projected cube and operator norms are decided at projected vertices.
//! That gives [`real_exact_check`]: a sound *and* complete decision for
//! real invertible maps using only `2·(2ⁿ−2)` exact probes. No finite
//! vertex family exists over the complexes (the planar diameter body is
//! not polytopal), so complex inputs get refutation probes only.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use thiserror::Error;

use crate::diam::{all_pairs, diam_squared, Pair, PairSet};
use crate::error::CoreError;
use crate::matrix::LinearMap;
use crate::replay::{pair_image, ReplayError, StabilizeConfig};
use crate::sample::{random_vector, rng_from_seed};
use crate::scalar::{rat, FieldTag, Rational, Scalar};
use crate::vector::FunctionVector;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("this check is only defined over the real field")]
    FieldMismatch,
    #[error("dimension {n} exceeds the probe cap {cap}")]
    DimensionCap { n: usize, cap: usize },
    #[error("the map must be invertible for a two-sided check")]
    Singular,
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// How a probe family was built.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbeKind {
    ZeroOne,
    RationalCircle,
    Random,
}

/// A finite family of probe vectors used for one-sided refutation.
#[derive(Clone, Debug)]
pub struct ProbeFamily {
    pub kind: ProbeKind,
    pub probes: Vec<FunctionVector>,
    pub seed: Option<u64>,
}

/// The nonconstant 0/1 vector for bitmask `mask`, coordinate 0 being the
/// most significant bit: mask 1 is `(0, …, 0, 1)`.
pub fn zero_one_vector(field: FieldTag, n: usize, mask: u64) -> FunctionVector {
    let entries: Vec<Scalar> = (0..n)
        .map(|i| {
            if (mask >> (n - 1 - i)) & 1 == 1 {
                Scalar::one()
            } else {
                Scalar::zero()
            }
        })
        .collect();
    FunctionVector::new(field, entries).expect("n >= 1")
}

impl ProbeFamily {
    /// Exactly the `2ⁿ − 2` nonconstant 0/1 vectors, in mask order.
    pub fn zero_one(field: FieldTag, n: usize) -> Self {
        let probes = (1..((1u64 << n) - 1))
            .map(|mask| zero_one_vector(field, n, mask))
            .collect();
        ProbeFamily {
            kind: ProbeKind::ZeroOne,
            probes,
            seed: None,
        }
    }

    /// All nonconstant vectors with entries in `{0, 1, ω}`, where ω is a
    /// rational point on the unit circle near 60°. Complex-field analogue
    /// of the 0/1 family; size `3ⁿ − 3`, so keep `n` small.
    pub fn rational_circle(n: usize) -> Self {
        let omega = Scalar::complex(33, 65, 56, 65);
        let values = [Scalar::zero(), Scalar::one(), omega];
        let total = 3u64.pow(n as u32);
        let mut probes = Vec::new();
        for code in 0..total {
            let mut c = code;
            let mut entries = Vec::with_capacity(n);
            for _ in 0..n {
                entries.push(values[(c % 3) as usize].clone());
                c /= 3;
            }
            let f = FunctionVector::new(FieldTag::Complex, entries).expect("n >= 1");
            if !f.is_constant() {
                probes.push(f);
            }
        }
        ProbeFamily {
            kind: ProbeKind::RationalCircle,
            probes,
            seed: None,
        }
    }

    /// `count` seeded random vectors with small rational entries.
    pub fn random(field: FieldTag, n: usize, count: usize, seed: u64) -> Self {
        let mut rng = rng_from_seed(seed);
        let probes = (0..count)
            .map(|_| random_vector(&mut rng, field, n, 9))
            .collect();
        ProbeFamily {
            kind: ProbeKind::Random,
            probes,
            seed: Some(seed),
        }
    }
}

/// The first probe whose diameter changes under `a`, with both exact
/// squared diameters. One-sided: `None` proves nothing.
pub fn probe_check(
    a: &LinearMap,
    family: &ProbeFamily,
) -> Result<Option<(FunctionVector, Rational, Rational)>, CoreError> {
    for f in &family.probes {
        let before = diam_squared(f);
        let after = diam_squared(&a.apply(f)?);
        if before != after {
            return Ok(Some((f.clone(), before, after)));
        }
    }
    Ok(None)
}

pub const DEFAULT_VERTEX_CAP: usize = 16;

/// Sound and complete diameter-preservation decision for real invertible
/// maps: `a` preserves the diameter of every real vector iff
///
/// 1. `a · 1` is constant (constants go to constants),
/// 2. `diam²(a·v) ≤ 1` for every nonconstant `v ∈ {0,1}ⁿ`, and
/// 3. both conditions hold for `a⁻¹` as well.
///
/// (1) bounds nothing by itself but makes the quotient map well defined;
/// (2) bounds its operator norm by 1 on the projected cube vertices; (3)
/// does the same for the inverse, forcing equality everywhere.
pub fn real_exact_check(a: &LinearMap) -> Result<bool, OracleError> {
    real_exact_check_with_cap(a, DEFAULT_VERTEX_CAP)
}

pub fn real_exact_check_with_cap(a: &LinearMap, cap: usize) -> Result<bool, OracleError> {
    if a.field() != FieldTag::Real {
        return Err(OracleError::FieldMismatch);
    }
    let n = a.n();
    if n > cap {
        return Err(OracleError::DimensionCap { n, cap });
    }
    let Some(inverse) = a.inverse() else {
        return Err(OracleError::Singular);
    };
    Ok(one_sided_contraction(a)? && one_sided_contraction(&inverse)?)
}

fn one_sided_contraction(a: &LinearMap) -> Result<bool, OracleError> {
    let n = a.n();
    let ones = FunctionVector::ones(FieldTag::Real, n)?;
    if !a.apply(&ones)?.is_constant() {
        return Ok(false);
    }
    let one = rat(1, 1);
    for mask in 1..((1u64 << n) - 1) {
        let v = zero_one_vector(FieldTag::Real, n, mask);
        if diam_squared(&a.apply(&v)?) > one {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The stabilized pair image for every pair at once: the finite picture
/// of how `a` transports diameter-achieving pairs. For a canonical map
/// every value is the singleton of the relabeled pair; for other maps
/// empty or larger values are returned as observed.
pub fn brute_force_pair_map(
    a: &LinearMap,
    cfg: &StabilizeConfig,
) -> Result<BTreeMap<Pair, PairSet>, ReplayError> {
    let n = a.n();
    if n < 2 {
        return Err(ReplayError::DimensionTooSmall { n, min: 2 });
    }
    let mut out = BTreeMap::new();
    for p in all_pairs(n) {
        out.insert(p, pair_image(a, p, cfg)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::{random_form, CanonicalForm, FormOptions, Permutation};

    #[test]
    fn permutation_matrices_pass_the_vertex_check() {
        for (n, seed) in [(3usize, 1u64), (4, 2), (5, 3)] {
            let mut rng = rng_from_seed(seed);
            let p = Permutation::random(n, &mut rng).matrix(FieldTag::Real);
            assert!(real_exact_check(&p).unwrap());
        }
    }

    #[test]
    fn shear_fails_fast() {
        // a·1 = (2, 1) is nonconstant.
        let a = LinearMap::from_int_rows(&[&[1, 1], &[0, 1]]).unwrap();
        assert!(!real_exact_check(&a).unwrap());
    }

    #[test]
    fn assembled_real_forms_pass() {
        for seed in 0..25u64 {
            let form = random_form(4, FieldTag::Real, 600 + seed, &FormOptions::default());
            assert!(real_exact_check(&form.assemble()).unwrap());
        }
    }

    #[test]
    fn guards_fire() {
        let c = LinearMap::identity(FieldTag::Complex, 3).unwrap();
        assert_eq!(real_exact_check(&c), Err(OracleError::FieldMismatch));
        let big = LinearMap::identity(FieldTag::Real, 5).unwrap();
        assert!(matches!(
            real_exact_check_with_cap(&big, 4),
            Err(OracleError::DimensionCap { n: 5, cap: 4 })
        ));
        let sing = LinearMap::from_int_rows(&[&[1, 1], &[1, 1]]).unwrap();
        assert_eq!(real_exact_check(&sing), Err(OracleError::Singular));
    }

    #[test]
    fn zero_one_family_has_exact_size_and_order() {
        let fam = ProbeFamily::zero_one(FieldTag::Real, 4);
        assert_eq!(fam.probes.len(), (1 << 4) - 2);
        assert!(fam.probes.iter().all(|f| !f.is_constant()));
        assert_eq!(fam.probes[0], FunctionVector::from_ints(&[0, 0, 0, 1]));
    }

    #[test]
    fn probe_check_finds_the_first_witness() {
        let doubled = LinearMap::from_int_rows(&[&[2, 0, 0], &[0, 2, 0], &[0, 0, 2]]).unwrap();
        let fam = ProbeFamily::zero_one(FieldTag::Real, 3);
        let (w, before, after) = probe_check(&doubled, &fam).unwrap().unwrap();
        assert_eq!(w, FunctionVector::from_ints(&[0, 0, 1]));
        assert_eq!(before, rat(1, 1));
        assert_eq!(after, rat(4, 1));
    }

    #[test]
    fn canonical_maps_never_witness() {
        let form = random_form(4, FieldTag::Complex, 808, &FormOptions::default());
        let a = form.assemble();
        for fam in [
            ProbeFamily::zero_one(FieldTag::Complex, 4),
            ProbeFamily::rational_circle(4),
            ProbeFamily::random(FieldTag::Complex, 4, 200, 9),
        ] {
            assert!(probe_check(&a, &fam).unwrap().is_none());
        }
    }

    #[test]
    fn rotation_times_permutation_has_no_circle_witness() {
        let form = CanonicalForm::new(
            FieldTag::Complex,
            Scalar::i(),
            Permutation::cycle(3),
            FunctionVector::new(FieldTag::Complex, alloc::vec![Scalar::zero(); 3]).unwrap(),
        )
        .unwrap();
        let fam = ProbeFamily::rational_circle(3);
        assert!(probe_check(&form.assemble(), &fam).unwrap().is_none());
    }

    #[test]
    fn pair_map_of_identity_is_identity() {
        let a = LinearMap::identity(FieldTag::Real, 4).unwrap();
        let map = brute_force_pair_map(&a, &StabilizeConfig::default()).unwrap();
        for (p, img) in map {
            assert_eq!(img.len(), 1);
            assert!(img.contains(&p));
        }
    }

    #[test]
    fn pair_map_of_permutation_form_relabels() {
        let form = CanonicalForm::new(
            FieldTag::Real,
            Scalar::one(),
            Permutation::cycle(4),
            FunctionVector::from_ints(&[0, 0, 0, 0]),
        )
        .unwrap();
        let a = form.assemble();
        let g = form.relabel().inverse();
        let map = brute_force_pair_map(&a, &StabilizeConfig::default()).unwrap();
        for (p, img) in map {
            assert_eq!(img.len(), 1);
            assert!(img.contains(&p.map(|v| g.image(v))));
        }
    }

    #[test]
    fn pair_map_of_non_preserving_map_is_reported() {
        let a = LinearMap::from_int_rows(&[&[1, 2, 0], &[0, 1, 1], &[3, 0, 1]]).unwrap();
        assert!(a.is_invertible());
        let map = brute_force_pair_map(&a, &StabilizeConfig::default()).unwrap();
        // No claim about the contents, only that each pair reports a
        // stabilized (possibly empty) set.
        assert_eq!(map.len(), 3);
    }
}
