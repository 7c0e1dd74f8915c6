//! Square matrices over the exact scalars, acting on function vectors.
//!
//! Everything here is exact: determinants and inverses run Gaussian
//! elimination in `ℚ(i)` with no pivot-size heuristics, so singularity
//! is decided, not estimated.

use alloc::vec::Vec;

use crate::error::CoreError;
use crate::scalar::{FieldTag, Rational, Scalar};
use crate::vector::FunctionVector;

/// An `n×n` linear map on `K^n`, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearMap {
    field: FieldTag,
    n: usize,
    data: Vec<Scalar>,
}

impl LinearMap {
    pub fn new(field: FieldTag, rows: Vec<Vec<Scalar>>) -> Result<Self, CoreError> {
        let n = rows.len();
        if n == 0 {
            return Err(CoreError::EmptyDimension);
        }
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(CoreError::RaggedRows { expected: n });
            }
            data.extend(row);
        }
        if field == FieldTag::Real && data.iter().any(|e| !e.is_real()) {
            return Err(CoreError::NotReal);
        }
        Ok(LinearMap { field, n, data })
    }

    /// Real matrix from integer pairs `(numer, denom)`.
    pub fn from_ratio_rows(rows: &[&[(i64, i64)]]) -> Result<Self, CoreError> {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&(n, d)| Scalar::real(n, d)).collect())
            .collect();
        LinearMap::new(FieldTag::Real, rows)
    }

    pub fn from_int_rows(rows: &[&[i64]]) -> Result<Self, CoreError> {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&v| Scalar::from_int(v)).collect())
            .collect();
        LinearMap::new(FieldTag::Real, rows)
    }

    pub fn identity(field: FieldTag, n: usize) -> Result<Self, CoreError> {
        if n == 0 {
            return Err(CoreError::EmptyDimension);
        }
        let mut data = alloc::vec![Scalar::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = Scalar::one();
        }
        Ok(LinearMap { field, n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> FieldTag {
        self.field
    }

    pub fn entry(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Returns a copy with entry `(i, j)` replaced.
    pub fn with_entry(&self, i: usize, j: usize, value: Scalar) -> Result<Self, CoreError> {
        if self.field == FieldTag::Real && !value.is_real() {
            return Err(CoreError::NotReal);
        }
        let mut out = self.clone();
        out.data[i * self.n + j] = value;
        Ok(out)
    }

    /// Widens a real matrix to the complex tag without changing entries.
    pub fn into_complex(mut self) -> Self {
        self.field = FieldTag::Complex;
        self
    }

    /// Matrix–vector product.
    pub fn apply(&self, f: &FunctionVector) -> Result<FunctionVector, CoreError> {
        if f.field() != self.field {
            return Err(CoreError::FieldMismatch);
        }
        if f.len() != self.n {
            return Err(CoreError::DimensionMismatch {
                expected: self.n,
                found: f.len(),
            });
        }
        let mut out = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let mut acc = Scalar::zero();
            for j in 0..self.n {
                let a = self.entry(i, j);
                if !a.is_zero() {
                    acc = &acc + &(a * f.get(j));
                }
            }
            out.push(acc);
        }
        FunctionVector::new(self.field, out)
    }

    /// Matrix product `self · other`.
    pub fn matmul(&self, other: &LinearMap) -> Result<LinearMap, CoreError> {
        if self.field != other.field {
            return Err(CoreError::FieldMismatch);
        }
        if self.n != other.n {
            return Err(CoreError::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let n = self.n;
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Scalar::zero();
                for k in 0..n {
                    let a = self.entry(i, k);
                    if !a.is_zero() {
                        acc = &acc + &(a * other.entry(k, j));
                    }
                }
                data.push(acc);
            }
        }
        Ok(LinearMap {
            field: self.field,
            n,
            data,
        })
    }

    pub fn add(&self, other: &LinearMap) -> Result<LinearMap, CoreError> {
        if self.field != other.field {
            return Err(CoreError::FieldMismatch);
        }
        if self.n != other.n {
            return Err(CoreError::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let data = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a + b)
            .collect();
        Ok(LinearMap {
            field: self.field,
            n: self.n,
            data,
        })
    }

    pub fn scale(&self, factor: &Scalar) -> Result<LinearMap, CoreError> {
        if self.field == FieldTag::Real && !factor.is_real() {
            return Err(CoreError::NotReal);
        }
        let data = self.data.iter().map(|e| e * factor).collect();
        Ok(LinearMap {
            field: self.field,
            n: self.n,
            data,
        })
    }

    /// Exact determinant by Gaussian elimination over `ℚ(i)`.
    pub fn determinant(&self) -> Scalar {
        let n = self.n;
        let mut m: Vec<Scalar> = self.data.clone();
        let mut det = Scalar::one();
        for col in 0..n {
            let Some(pivot_row) = (col..n).find(|&r| !m[r * n + col].is_zero()) else {
                return Scalar::zero();
            };
            if pivot_row != col {
                for j in 0..n {
                    m.swap(pivot_row * n + j, col * n + j);
                }
                det = -det;
            }
            let pivot = m[col * n + col].clone();
            det = &det * &pivot;
            let inv = pivot.inverse().expect("pivot is nonzero");
            for r in (col + 1)..n {
                let factor = &m[r * n + col] * &inv;
                if factor.is_zero() {
                    continue;
                }
                for j in col..n {
                    let sub = &factor * &m[col * n + j];
                    m[r * n + j] = &m[r * n + j] - &sub;
                }
            }
        }
        det
    }

    pub fn is_invertible(&self) -> bool {
        !self.determinant().is_zero()
    }

    /// Exact inverse by Gauss–Jordan elimination; `None` when singular.
    pub fn inverse(&self) -> Option<LinearMap> {
        let n = self.n;
        let mut m = self.data.clone();
        let mut inv = LinearMap::identity(self.field, n).expect("n >= 1").data;
        for col in 0..n {
            let pivot_row = (col..n).find(|&r| !m[r * n + col].is_zero())?;
            if pivot_row != col {
                for j in 0..n {
                    m.swap(pivot_row * n + j, col * n + j);
                    inv.swap(pivot_row * n + j, col * n + j);
                }
            }
            let pivot_inv = m[col * n + col].inverse().expect("pivot is nonzero");
            for j in 0..n {
                m[col * n + j] = &m[col * n + j] * &pivot_inv;
                inv[col * n + j] = &inv[col * n + j] * &pivot_inv;
            }
            for r in 0..n {
                if r == col || m[r * n + col].is_zero() {
                    continue;
                }
                let factor = m[r * n + col].clone();
                for j in 0..n {
                    let a = &factor * &m[col * n + j];
                    m[r * n + j] = &m[r * n + j] - &a;
                    let b = &factor * &inv[col * n + j];
                    inv[r * n + j] = &inv[r * n + j] - &b;
                }
            }
        }
        Some(LinearMap {
            field: self.field,
            n,
            data: inv,
        })
    }

    /// Subtracts each column's mean from that column: the matrix of the
    /// induced map on `K^n` modulo constants, expressed in mean-centered
    /// coordinates. Every column of the result sums to zero.
    pub fn quotient_project(&self) -> LinearMap {
        let n = self.n;
        let inv_n = Scalar::from_rational(Rational::new(1.into(), (n as i64).into()));
        let mut means = Vec::with_capacity(n);
        for j in 0..n {
            let mut acc = Scalar::zero();
            for i in 0..n {
                acc = &acc + self.entry(i, j);
            }
            means.push(&acc * &inv_n);
        }
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for (j, mean) in means.iter().enumerate() {
                data.push(self.entry(i, j) - mean);
            }
        }
        LinearMap {
            field: self.field,
            n,
            data,
        }
    }
}
