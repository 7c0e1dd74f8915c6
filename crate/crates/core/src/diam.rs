//! The diameter seminorm `diam(f) = max_{i,j} |f_i − f_j|` and its
//! diameter-achieving pairs.
//!
//! `diam` itself is usually irrational even for rational data, so all
//! comparisons inside the crate go through `diam²`, which stays rational.
//! [`Diam`] carries the exact square and only approximates the root on
//! request.

use alloc::collections::BTreeSet;

use num_traits::{ToPrimitive, Zero};

use crate::scalar::Rational;
use crate::vector::FunctionVector;

/// An unordered pair of distinct point indices, stored as `lo < hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pair {
    lo: usize,
    hi: usize,
}

impl Pair {
    pub fn new(a: usize, b: usize) -> Self {
        assert!(a != b, "a pair needs two distinct points");
        if a < b {
            Pair { lo: a, hi: b }
        } else {
            Pair { lo: b, hi: a }
        }
    }

    pub fn lo(&self) -> usize {
        self.lo
    }

    pub fn hi(&self) -> usize {
        self.hi
    }

    pub fn contains(&self, x: usize) -> bool {
        self.lo == x || self.hi == x
    }

    pub fn is_disjoint(&self, other: &Pair) -> bool {
        !other.contains(self.lo) && !other.contains(self.hi)
    }

    /// The point shared with `other`, if exactly one is shared.
    pub fn common_point(&self, other: &Pair) -> Option<usize> {
        match (other.contains(self.lo), other.contains(self.hi)) {
            (true, false) => Some(self.lo),
            (false, true) => Some(self.hi),
            _ => None,
        }
    }

    /// Applies an index map to both endpoints.
    pub fn map(&self, f: impl Fn(usize) -> usize) -> Pair {
        Pair::new(f(self.lo), f(self.hi))
    }
}

impl core::fmt::Display for Pair {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{{{}, {}}}", self.lo, self.hi)
    }
}

pub type PairSet = BTreeSet<Pair>;

/// All unordered pairs of `{0, …, n−1}` in lexicographic order.
pub fn all_pairs(n: usize) -> impl Iterator<Item = Pair> {
    (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| Pair::new(i, j)))
}

/// The diameter of a function's range, held as its exact square.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Diam {
    squared: Rational,
}

impl Diam {
    pub fn squared(&self) -> &Rational {
        &self.squared
    }

    pub fn is_zero(&self) -> bool {
        self.squared.is_zero()
    }

    /// Floating approximation of the diameter itself. For reporting only;
    /// nothing in the crate decides anything with this value.
    pub fn approx(&self) -> f64 {
        sqrt_f64(self.squared.to_f64().unwrap_or(f64::NAN))
    }
}

fn sqrt_f64(x: f64) -> f64 {
    if x.is_nan() || x < 0.0 {
        return f64::NAN;
    }
    if x == 0.0 {
        return 0.0;
    }
    let mut guess = x;
    for _ in 0..64 {
        let next = 0.5 * (guess + x / guess);
        if next == guess {
            break;
        }
        guess = next;
    }
    guess
}

/// `diam(f)²` — the exact maximum of `|f_i − f_j|²` over all pairs.
/// A single-point space (and any constant function) gives 0.
pub fn diam_squared(f: &FunctionVector) -> Rational {
    let mut best = Rational::zero();
    for i in 0..f.len() {
        for j in (i + 1)..f.len() {
            let gap = (f.get(i) - f.get(j)).modulus_sq();
            if gap > best {
                best = gap;
            }
        }
    }
    best
}

pub fn diam(f: &FunctionVector) -> Diam {
    Diam {
        squared: diam_squared(f),
    }
}

/// All unordered pairs where `f` attains its diameter. Empty exactly when
/// `f` is constant: the zero-diameter case is treated as having no
/// achieving pairs rather than all of them.
pub fn achieving_pairs(f: &FunctionVector) -> PairSet {
    let d = diam_squared(f);
    let mut out = PairSet::new();
    if d.is_zero() {
        return out;
    }
    for i in 0..f.len() {
        for j in (i + 1)..f.len() {
            if (f.get(i) - f.get(j)).modulus_sq() == d {
                out.insert(Pair::new(i, j));
            }
        }
    }
    out
}

/// Decides `√a ≤ √b + √c` for nonnegative rationals given as squares,
/// without leaving `ℚ`: square both sides and isolate the cross term.
pub fn sqrt_le_sum_of_sqrts(a_sq: &Rational, b_sq: &Rational, c_sq: &Rational) -> bool {
    // √a ≤ √b + √c  ⟺  a − b − c ≤ 2√(bc)
    let lhs = a_sq - b_sq - c_sq;
    if lhs <= Rational::zero() {
        return true;
    }
    &lhs * &lhs <= Rational::from_integer(4.into()) * b_sq * c_sq
}
