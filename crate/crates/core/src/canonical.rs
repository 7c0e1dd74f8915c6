//! Canonical forms `(τ, σ, t)`: a unimodular scalar, a coordinate
//! permutation and a constant-shift functional. Assembled as a matrix,
//! `(Af)_i = τ·f_{σ(i)} + t(f)` — exactly the diameter-preserving maps,
//! bijective precisely when `t(1) ≠ −τ`.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use thiserror::Error;

use crate::error::CoreError;
use crate::matrix::LinearMap;
use crate::sample::{random_rational, random_unimodular, rng_from_seed};
use crate::scalar::{FieldTag, Scalar};
use crate::vector::FunctionVector;

/// A bijection of `{0, …, n−1}`, stored as the image list `i ↦ map[i]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self, FormError> {
        let n = map.len();
        if n == 0 {
            return Err(FormError::Core(CoreError::EmptyDimension));
        }
        let mut seen = alloc::vec![false; n];
        for &v in &map {
            if v >= n || seen[v] {
                return Err(FormError::InvalidPermutation { image: v });
            }
            seen[v] = true;
        }
        Ok(Permutation { map })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            map: (0..n).collect(),
        }
    }

    /// The transposition of `a` and `b` on `{0, …, n−1}`.
    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut map: Vec<usize> = (0..n).collect();
        map.swap(a, b);
        Permutation { map }
    }

    /// The cycle `0 → 1 → ⋯ → n−1 → 0`, i.e. `σ(i) = i+1 mod n`.
    pub fn cycle(n: usize) -> Self {
        Permutation {
            map: (0..n).map(|i| (i + 1) % n).collect(),
        }
    }

    pub fn random(n: usize, rng: &mut rand_chacha::ChaCha8Rng) -> Self {
        let mut map: Vec<usize> = (0..n).collect();
        map.shuffle(rng);
        Permutation { map }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &v)| i == v)
    }

    /// `σ(i)`.
    pub fn image(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = alloc::vec![0; self.map.len()];
        for (i, &v) in self.map.iter().enumerate() {
            inv[v] = i;
        }
        Permutation { map: inv }
    }

    /// The permutation `i ↦ next(self(i))`: apply `self` first, then `next`.
    pub fn then(&self, next: &Permutation) -> Permutation {
        Permutation {
            map: self.map.iter().map(|&v| next.image(v)).collect(),
        }
    }

    /// Pullback `f ∘ σ`: the vector with `g_i = f_{σ(i)}`.
    pub fn pull(&self, f: &FunctionVector) -> Result<FunctionVector, CoreError> {
        if f.len() != self.map.len() {
            return Err(CoreError::DimensionMismatch {
                expected: self.map.len(),
                found: f.len(),
            });
        }
        let entries = self.map.iter().map(|&v| f.get(v).clone()).collect();
        FunctionVector::new(f.field(), entries)
    }

    /// The permutation matrix with `P_{i,σ(i)} = 1`, so `P·f = f∘σ`.
    pub fn matrix(&self, field: FieldTag) -> LinearMap {
        let n = self.map.len();
        let rows: Vec<Vec<Scalar>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if j == self.map[i] {
                            Scalar::one()
                        } else {
                            Scalar::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        LinearMap::new(field, rows).expect("square by construction")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FormError {
    #[error("the scalar factor must have |τ|² = 1 exactly")]
    RotationNotUnimodular,
    #[error("not a permutation of 0..n-1 (offending image {image})")]
    InvalidPermutation { image: usize },
    #[error("singular form: t(1) = -τ, so the assembled matrix is not invertible")]
    SingularForm,
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// The verdict of the bijectivity criterion `t(1) ≠ −τ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BijectivityVerdict {
    pub invertible: bool,
    /// `t(1) = Σ_k t_k`.
    pub shift_total: Scalar,
    pub rotation: Scalar,
}

/// A canonical triple `(τ, σ, t)` over a fixed field and dimension.
///
/// `rotation` is τ (exactly unimodular), `relabel` is the coordinate
/// permutation σ, and `shift` holds the coefficients of the linear
/// functional `t(f) = Σ_k t_k f_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalForm {
    field: FieldTag,
    rotation: Scalar,
    relabel: Permutation,
    shift: FunctionVector,
}

impl CanonicalForm {
    pub fn new(
        field: FieldTag,
        rotation: Scalar,
        relabel: Permutation,
        shift: FunctionVector,
    ) -> Result<Self, FormError> {
        if !rotation.is_unimodular() {
            return Err(FormError::RotationNotUnimodular);
        }
        if field == FieldTag::Real && !rotation.is_real() {
            return Err(FormError::Core(CoreError::NotReal));
        }
        if shift.field() != field {
            return Err(FormError::Core(CoreError::FieldMismatch));
        }
        if shift.len() != relabel.len() {
            return Err(FormError::Core(CoreError::DimensionMismatch {
                expected: relabel.len(),
                found: shift.len(),
            }));
        }
        Ok(CanonicalForm {
            field,
            rotation,
            relabel,
            shift,
        })
    }

    pub fn identity(field: FieldTag, n: usize) -> Result<Self, FormError> {
        let shift = FunctionVector::constant(field, n, Scalar::zero()).map_err(FormError::Core)?;
        CanonicalForm::new(field, Scalar::one(), Permutation::identity(n), shift)
    }

    pub fn n(&self) -> usize {
        self.relabel.len()
    }

    pub fn field(&self) -> FieldTag {
        self.field
    }

    pub fn rotation(&self) -> &Scalar {
        &self.rotation
    }

    pub fn relabel(&self) -> &Permutation {
        &self.relabel
    }

    pub fn shift(&self) -> &FunctionVector {
        &self.shift
    }

    /// `t(f)`.
    pub fn shift_value(&self, f: &FunctionVector) -> Result<Scalar, CoreError> {
        f.dot(&self.shift)
    }

    /// `t(1) = Σ_k t_k`.
    pub fn shift_total(&self) -> Scalar {
        let mut acc = Scalar::zero();
        for s in self.shift.iter() {
            acc = &acc + s;
        }
        acc
    }

    /// The matrix with `A_{ij} = τ·[j = σ(i)] + t_j`.
    pub fn assemble(&self) -> LinearMap {
        let n = self.n();
        let rows: Vec<Vec<Scalar>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let base = self.shift.get(j).clone();
                        if j == self.relabel.image(i) {
                            &base + &self.rotation
                        } else {
                            base
                        }
                    })
                    .collect()
            })
            .collect();
        LinearMap::new(self.field, rows).expect("square by construction")
    }

    /// Applies the form directly: `(Af)_i = τ·f_{σ(i)} + t(f)`.
    /// Agrees with `assemble().apply(f)` entrywise.
    pub fn apply(&self, f: &FunctionVector) -> Result<FunctionVector, CoreError> {
        let pulled = self.relabel.pull(f)?;
        let shift = self.shift_value(f)?;
        let scaled = pulled.scale(&self.rotation)?;
        scaled.translate(&shift)
    }

    /// The criterion `t(1) ≠ −τ`, equivalent to the assembled matrix
    /// having nonzero determinant.
    pub fn is_bijective(&self) -> BijectivityVerdict {
        let shift_total = self.shift_total();
        let invertible = shift_total != -self.rotation.clone();
        BijectivityVerdict {
            invertible,
            shift_total,
            rotation: self.rotation.clone(),
        }
    }

    /// Inverse form: `τ' = τ⁻¹`, `σ' = σ⁻¹`,
    /// `t'_j = −τ⁻¹·t_{σ(j)} / (τ + t(1))`.
    /// Fails exactly on singular forms.
    pub fn invert(&self) -> Result<CanonicalForm, FormError> {
        let total = self.shift_total();
        let denom = &self.rotation + &total;
        if denom.is_zero() {
            return Err(FormError::SingularForm);
        }
        let rot_inv = self.rotation.inverse().expect("unimodular is nonzero");
        let denom_inv = denom.inverse().expect("checked nonzero");
        let n = self.n();
        let factor = -(&rot_inv * &denom_inv);
        let entries: Vec<Scalar> = (0..n)
            .map(|j| &factor * self.shift.get(self.relabel.image(j)))
            .collect();
        let shift = FunctionVector::new(self.field, entries).map_err(FormError::Core)?;
        CanonicalForm::new(self.field, rot_inv, self.relabel.inverse(), shift)
    }
}

/// The form of `assemble(f) · assemble(g)` (apply `g` first, then `f`):
/// `τ = τ_f·τ_g`, `σ(i) = σ_g(σ_f(i))`, `t(h) = τ_f·t_g(h) + t_f(B_g·h)`.
pub fn compose(f: &CanonicalForm, g: &CanonicalForm) -> Result<CanonicalForm, FormError> {
    if f.field != g.field {
        return Err(FormError::Core(CoreError::FieldMismatch));
    }
    if f.n() != g.n() {
        return Err(FormError::Core(CoreError::DimensionMismatch {
            expected: f.n(),
            found: g.n(),
        }));
    }
    let n = f.n();
    let rotation = &f.rotation * &g.rotation;
    let relabel = f.relabel.then(&g.relabel);
    let b_g = g.assemble();
    // t_j = τ_f·t_g[j] + Σ_k t_f[k]·(B_g)_{kj}
    let entries: Vec<Scalar> = (0..n)
        .map(|j| {
            let mut acc = &f.rotation * g.shift.get(j);
            for k in 0..n {
                let coeff = f.shift.get(k);
                if !coeff.is_zero() {
                    acc = &acc + &(coeff * b_g.entry(k, j));
                }
            }
            acc
        })
        .collect();
    let shift = FunctionVector::new(f.field, entries).map_err(FormError::Core)?;
    CanonicalForm::new(f.field, rotation, relabel, shift)
}

/// Options for [`random_form`].
#[derive(Clone, Copy, Debug, Default)]
pub struct FormOptions {
    /// Force `t(1) = −τ` exactly, producing a singular form.
    pub singular: bool,
    /// Bound for numerators/denominators of the shift coefficients.
    pub shift_bound: Option<i64>,
}

/// A seeded random canonical form: uniform σ, `τ = ±1` over the reals or
/// a rational circle point over the complexes, and bounded rational shift
/// coefficients. Unless `options.singular` is set, the shift is resampled
/// until `t(1) ≠ −τ`.
pub fn random_form(n: usize, field: FieldTag, seed: u64, options: &FormOptions) -> CanonicalForm {
    assert!(n >= 1, "dimension must be at least 1");
    let mut rng = rng_from_seed(seed);
    let bound = options.shift_bound.unwrap_or(9).max(1);
    let rotation = random_unimodular(&mut rng, field, 12);
    let relabel = Permutation::random(n, &mut rng);
    loop {
        let mut entries: Vec<Scalar> = (0..n)
            .map(|_| match field {
                FieldTag::Real => Scalar::from_rational(random_rational(&mut rng, bound)),
                FieldTag::Complex => Scalar::new(
                    random_rational(&mut rng, bound),
                    random_rational(&mut rng, bound),
                ),
            })
            .collect();
        if options.singular {
            // Overwrite the last coefficient so that Σ t_k = −τ exactly.
            let mut partial = Scalar::zero();
            for e in &entries[..n - 1] {
                partial = &partial + e;
            }
            entries[n - 1] = -(&partial + &rotation.clone());
        }
        let shift = FunctionVector::new(field, entries).expect("n >= 1");
        let form = CanonicalForm::new(field, rotation.clone(), relabel.clone(), shift)
            .expect("rotation sampled unimodular");
        let bijective = form.is_bijective().invertible;
        if options.singular || bijective {
            return form;
        }
    }
}
