//! Function vectors: an element of `K^n` stands for a function on the
//! `n`-point space `{0, …, n−1}`, with coordinate `i` the value at point `i`.

use alloc::vec::Vec;

use crate::error::CoreError;
use crate::scalar::{FieldTag, Scalar};

/// A function on `{0, …, n−1}` with values in the tagged field.
///
/// Length is fixed at construction and is always at least 1. In the real
/// field every entry has zero imaginary part; the constructor enforces it.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct FunctionVector {
    field: FieldTag,
    entries: Vec<Scalar>,
}

impl FunctionVector {
    pub fn new(field: FieldTag, entries: Vec<Scalar>) -> Result<Self, CoreError> {
        if entries.is_empty() {
            return Err(CoreError::EmptyDimension);
        }
        if field == FieldTag::Real && entries.iter().any(|e| !e.is_real()) {
            return Err(CoreError::NotReal);
        }
        Ok(FunctionVector { field, entries })
    }

    /// Real vector from integer pairs `(numer, denom)`.
    pub fn from_ratios(pairs: &[(i64, i64)]) -> Self {
        let entries = pairs.iter().map(|&(n, d)| Scalar::real(n, d)).collect();
        FunctionVector::new(FieldTag::Real, entries).expect("nonempty real entries")
    }

    /// Real vector from integers.
    pub fn from_ints(values: &[i64]) -> Self {
        let entries = values.iter().map(|&v| Scalar::from_int(v)).collect();
        FunctionVector::new(FieldTag::Real, entries).expect("nonempty real entries")
    }

    /// The constant function with the given value.
    pub fn constant(field: FieldTag, n: usize, value: Scalar) -> Result<Self, CoreError> {
        FunctionVector::new(field, alloc::vec![value; n])
    }

    /// The constant-one function.
    pub fn ones(field: FieldTag, n: usize) -> Result<Self, CoreError> {
        FunctionVector::constant(field, n, Scalar::one())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn field(&self) -> FieldTag {
        self.field
    }

    pub fn get(&self, i: usize) -> &Scalar {
        &self.entries[i]
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.entries
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Scalar> {
        self.entries.iter()
    }

    pub fn is_constant(&self) -> bool {
        self.entries.iter().all(|e| e == &self.entries[0])
    }

    /// Widens a real vector to the complex tag without changing entries.
    pub fn into_complex(mut self) -> Self {
        self.field = FieldTag::Complex;
        self
    }

    pub fn add(&self, other: &FunctionVector) -> Result<FunctionVector, CoreError> {
        self.zip_check(other)?;
        let entries = self
            .entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| a + b)
            .collect();
        FunctionVector::new(self.field, entries)
    }

    pub fn sub(&self, other: &FunctionVector) -> Result<FunctionVector, CoreError> {
        self.zip_check(other)?;
        let entries = self
            .entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| a - b)
            .collect();
        FunctionVector::new(self.field, entries)
    }

    /// Scales by a scalar of the same field (a real tag rejects non-real factors).
    pub fn scale(&self, factor: &Scalar) -> Result<FunctionVector, CoreError> {
        if self.field == FieldTag::Real && !factor.is_real() {
            return Err(CoreError::NotReal);
        }
        let entries = self.entries.iter().map(|e| e * factor).collect();
        FunctionVector::new(self.field, entries)
    }

    /// Adds `value` to every coordinate.
    pub fn translate(&self, value: &Scalar) -> Result<FunctionVector, CoreError> {
        if self.field == FieldTag::Real && !value.is_real() {
            return Err(CoreError::NotReal);
        }
        let entries = self.entries.iter().map(|e| e + value).collect();
        FunctionVector::new(self.field, entries)
    }

    /// `Σ_k coeff_k · f_k` — the value of the functional with the given
    /// coefficient vector at `self`.
    pub fn dot(&self, coeffs: &FunctionVector) -> Result<Scalar, CoreError> {
        self.zip_check(coeffs)?;
        let mut acc = Scalar::zero();
        for (a, b) in self.entries.iter().zip(coeffs.entries.iter()) {
            acc = &acc + &(a * b);
        }
        Ok(acc)
    }

    fn zip_check(&self, other: &FunctionVector) -> Result<(), CoreError> {
        if self.field != other.field {
            return Err(CoreError::FieldMismatch);
        }
        if self.len() != other.len() {
            return Err(CoreError::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(())
    }
}

/// Sum of a nonempty slice of vectors of equal shape.
pub fn sum_all(vectors: &[FunctionVector]) -> Result<FunctionVector, CoreError> {
    let first = vectors.first().ok_or(CoreError::EmptyDimension)?;
    let mut acc = first.clone();
    for v in &vectors[1..] {
        acc = acc.add(v)?;
    }
    Ok(acc)
}
