//! Exact scalars: elements of `ℚ` or `ℚ(i)` with decidable equality.
//!
//! Every identity this crate decides is an exact equality of rationals,
//! so the scalar type stores rational real and imaginary parts and never
//! rounds. Squared moduli stay rational, which is why the rest of the
//! crate compares `diam²` instead of `diam`.

use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use alloc::string::String;

/// Ground field selector for vectors, matrices and canonical forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FieldTag {
    Real,
    Complex,
}

impl fmt::Display for FieldTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldTag::Real => f.write_str("real"),
            FieldTag::Complex => f.write_str("complex"),
        }
    }
}

/// Exact rational number.
pub type Rational = BigRational;

/// Shorthand for a rational from an integer pair. Panics on a zero denominator.
pub fn rat(numer: i64, denom: i64) -> Rational {
    assert!(denom != 0, "zero denominator");
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// An exact element of `ℚ(i)`. Real scalars are the ones with zero
/// imaginary part; containers carry the [`FieldTag`] that says whether
/// imaginary parts are allowed at all.
///
/// The derived `Ord` is lexicographic on `(re, im)`. It is a deterministic
/// total order for use in sets and sorts, not a field order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Scalar {
    re: Rational,
    im: Rational,
}

impl Scalar {
    pub fn new(re: Rational, im: Rational) -> Self {
        Scalar { re, im }
    }

    pub fn from_rational(re: Rational) -> Self {
        Scalar {
            re,
            im: Rational::zero(),
        }
    }

    pub fn from_int(v: i64) -> Self {
        Scalar::from_rational(Rational::from_integer(BigInt::from(v)))
    }

    /// Real rational `n/d`.
    pub fn real(numer: i64, denom: i64) -> Self {
        Scalar::from_rational(rat(numer, denom))
    }

    /// Complex rational `a/b + (c/d)i`.
    pub fn complex(re_n: i64, re_d: i64, im_n: i64, im_d: i64) -> Self {
        Scalar::new(rat(re_n, re_d), rat(im_n, im_d))
    }

    pub fn zero() -> Self {
        Scalar::from_int(0)
    }

    pub fn one() -> Self {
        Scalar::from_int(1)
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        Scalar::new(Rational::zero(), Rational::one())
    }

    pub fn re(&self) -> &Rational {
        &self.re
    }

    pub fn im(&self) -> &Rational {
        &self.im
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Scalar::new(self.re.clone(), -self.im.clone())
    }

    /// `|z|²`, always an exact rational.
    pub fn modulus_sq(&self) -> Rational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn is_unimodular(&self) -> bool {
        self.modulus_sq().is_one()
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let m = self.modulus_sq();
        Some(Scalar::new(&self.re / &m, -&self.im / &m))
    }

    /// Exact quotient; `None` when `rhs` is zero.
    pub fn div(&self, rhs: &Scalar) -> Option<Self> {
        rhs.inverse().map(|inv| self * &inv)
    }

    /// `(re, im)` as nearest floats, for reporting only.
    pub fn to_f64_parts(&self) -> (f64, f64) {
        (
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    /// Deterministic total-order comparison (lexicographic on `(re, im)`).
    pub fn lex_cmp(&self, other: &Scalar) -> Ordering {
        self.cmp(other)
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", self.re);
        }
        if self.re.is_zero() {
            return write!(f, "{}i", self.im);
        }
        if self.im.is_negative() {
            write!(f, "{}{}i", self.re, self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        Scalar::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        Scalar::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        Scalar::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::new(-self.re.clone(), -self.im.clone())
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        &self + &rhs
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        &self - &rhs
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        &self * &rhs
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

/// Renders a rational as `p` or `p/q` in lowest terms.
pub fn rational_to_string(r: &Rational) -> String {
    use alloc::string::ToString;
    r.to_string()
}
