//! Recovering a canonical triple from a plain matrix, or refuting
//! diameter preservation with an explicit witness vector.
//!
//! Recovery reads σ and τ off the column-mean-centered matrix
//! `M = quotient_project(A)`: a canonical map's row `i` is
//! `τ·(−1/n, …, 1−1/n at σ(i), …, −1/n)`, and `|1−1/n| > 1/n` for
//! `n ≥ 3`, so the entry of maximal modulus locates σ(i) and the gap to
//! any other entry is τ. Every candidate is then re-verified entrywise
//! against `A`, which turns the readout into a decision: success means
//! `A` is exactly an assembled triple, and any failure names the entries
//! that break the shape.

use alloc::vec::Vec;

use thiserror::Error;

use crate::canonical::{CanonicalForm, Permutation};
use crate::diam::diam_squared;
use crate::error::CoreError;
use crate::matrix::LinearMap;
use crate::oracle::{zero_one_vector, ProbeFamily};
use crate::sample::{random_vector, rng_from_seed};
use crate::scalar::{FieldTag, Rational, Scalar};
use crate::vector::FunctionVector;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DecomposeError {
    #[error("rows {row_a} and {row_b} both point at column {image}; not a permutation")]
    NotAPermutation {
        row_a: usize,
        row_b: usize,
        image: usize,
    },
    #[error("rows {row_a} and {row_b} yield different scalar factors")]
    InconsistentTau { row_a: usize, row_b: usize },
    #[error("the extracted scalar factor {rotation} is not unimodular")]
    TauNotUnimodular { rotation: alloc::boxed::Box<Scalar> },
    #[error("entry ({row}, {col}) breaks the constant-shift structure")]
    RowsNotConstant { row: usize, col: usize },
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// Recovers the unique `(τ, σ, t)` with `assemble = A`, or reports which
/// structural equation fails. Intended for invertible `A` (singularity is
/// the caller's concern: a singular matrix of canonical shape still
/// decomposes here). For `n ≤ 2` the tie-broken representative with
/// `σ = id` is returned; for `n ≥ 3` the triple is unique.
pub fn decompose(a: &LinearMap) -> Result<CanonicalForm, DecomposeError> {
    let n = a.n();
    match n {
        1 => {
            // Everything preserves the zero seminorm; fix τ = 1, σ = id.
            let shift =
                FunctionVector::new(a.field(), alloc::vec![a.entry(0, 0) - &Scalar::one()])?;
            Ok(
                CanonicalForm::new(a.field(), Scalar::one(), Permutation::identity(1), shift)
                    .expect("1 is unimodular"),
            )
        }
        2 => decompose_two(a),
        _ => decompose_general(a),
    }
}

// n = 2: the swap equals −id plus a rank-one shift, so two triples
// assemble to any canonical matrix. The representative with σ = id is
// always among them and is the one returned.
fn decompose_two(a: &LinearMap) -> Result<CanonicalForm, DecomposeError> {
    let d0 = a.entry(0, 0) - a.entry(1, 0);
    let d1 = a.entry(0, 1) - a.entry(1, 1);
    if d0 != -&d1 {
        return Err(DecomposeError::InconsistentTau { row_a: 0, row_b: 1 });
    }
    if !d0.is_unimodular() {
        return Err(DecomposeError::TauNotUnimodular {
            rotation: alloc::boxed::Box::new(d0),
        });
    }
    // With σ = id: t_0 = A_{10}, t_1 = A_{01}; the remaining two entries
    // are then forced by d0 = −d1.
    let shift = FunctionVector::new(
        a.field(),
        alloc::vec![a.entry(1, 0).clone(), a.entry(0, 1).clone()],
    )?;
    let form = CanonicalForm::new(a.field(), d0, Permutation::identity(2), shift)
        .expect("checked unimodular");
    debug_assert_eq!(form.assemble(), *a);
    Ok(form)
}

fn decompose_general(a: &LinearMap) -> Result<CanonicalForm, DecomposeError> {
    let n = a.n();
    let m = a.quotient_project();

    let mut images = Vec::with_capacity(n);
    let mut taus: Vec<Scalar> = Vec::with_capacity(n);
    for i in 0..n {
        let mut best = 0usize;
        let mut best_sq = m.entry(i, 0).modulus_sq();
        for j in 1..n {
            let sq = m.entry(i, j).modulus_sq();
            if sq > best_sq {
                best = j;
                best_sq = sq;
            }
        }
        let other = if best == 0 { 1 } else { 0 };
        taus.push(m.entry(i, best) - m.entry(i, other));
        images.push(best);
    }

    let mut seen: Vec<Option<usize>> = alloc::vec![None; n];
    for (row, &img) in images.iter().enumerate() {
        if let Some(prev) = seen[img] {
            return Err(DecomposeError::NotAPermutation {
                row_a: prev,
                row_b: row,
                image: img,
            });
        }
        seen[img] = Some(row);
    }

    for (row, tau) in taus.iter().enumerate().skip(1) {
        if tau != &taus[0] {
            return Err(DecomposeError::InconsistentTau {
                row_a: 0,
                row_b: row,
            });
        }
    }
    let rotation = taus.into_iter().next().expect("n >= 3");
    if !rotation.is_unimodular() {
        return Err(DecomposeError::TauNotUnimodular {
            rotation: alloc::boxed::Box::new(rotation),
        });
    }

    // t from row 0, then every row of A − τ·P must reproduce it exactly.
    let shift_entries: Vec<Scalar> = (0..n)
        .map(|j| {
            let base = a.entry(0, j).clone();
            if j == images[0] {
                &base - &rotation
            } else {
                base
            }
        })
        .collect();
    for (i, &image) in images.iter().enumerate().skip(1) {
        for (j, expected) in shift_entries.iter().enumerate() {
            let residual = if j == image {
                a.entry(i, j) - &rotation
            } else {
                a.entry(i, j).clone()
            };
            if residual != *expected {
                return Err(DecomposeError::RowsNotConstant { row: i, col: j });
            }
        }
    }

    let relabel = Permutation::new(images).expect("collision-checked above");
    let shift = FunctionVector::new(a.field(), shift_entries)?;
    let form = CanonicalForm::new(a.field(), rotation, relabel, shift)
        .expect("checked unimodular and square");
    debug_assert_eq!(form.assemble(), *a);
    Ok(form)
}

/// A refutation: the diameter of `vector` changes under the map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub vector: FunctionVector,
    pub diam_sq_before: Rational,
    pub diam_sq_after: Rational,
}

/// Search budget for [`find_witness`]; all stages are deterministic under
/// the seed and the first verified witness wins.
#[derive(Clone, Copy, Debug)]
pub struct WitnessBudget {
    /// Enumerate all `2ⁿ − 2` nonconstant 0/1 probes while `n` is at most this.
    pub zero_one_cap: usize,
    /// Enumerate `{0, 1, ω}` probes (complex field) while `n` is at most this.
    pub circle_cap: usize,
    pub random_probes: usize,
    pub ascent_restarts: usize,
    pub seed: u64,
}

impl Default for WitnessBudget {
    fn default() -> Self {
        WitnessBudget {
            zero_one_cap: 12,
            circle_cap: 7,
            random_probes: 10_000,
            ascent_restarts: 100,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("witness search exhausted after {probes_tried} probes")]
pub struct WitnessSearchExhausted {
    pub probes_tried: usize,
}

fn witness_at(a: &LinearMap, f: &FunctionVector) -> Result<Option<Witness>, CoreError> {
    let before = diam_squared(f);
    let after = diam_squared(&a.apply(f)?);
    if before == after {
        return Ok(None);
    }
    Ok(Some(Witness {
        vector: f.clone(),
        diam_sq_before: before,
        diam_sq_after: after,
    }))
}

/// Searches for a vector whose diameter changes under `a`. Stages, in
/// order: nonconstant 0/1 probes, the constant-one probe, 0/1 probes
/// pulled back through `a⁻¹`, `{0, 1, ω}` probes for the complex field,
/// seeded random rational probes, and coordinate ascent on the floating
/// objective `|diam²(Af) − diam²(f)|` with exact re-verification of any
/// candidate. Over the reals the first three stages are already a
/// complete search whenever `n` is within the 0/1 cap, so exhaustion
/// there means the map genuinely preserves the diameter.
pub fn find_witness(
    a: &LinearMap,
    budget: &WitnessBudget,
) -> Result<Witness, WitnessSearchExhausted> {
    find_witness_inner(a, budget).expect("probes are built to match the map's shape")
}

fn find_witness_inner(
    a: &LinearMap,
    budget: &WitnessBudget,
) -> Result<Result<Witness, WitnessSearchExhausted>, CoreError> {
    let n = a.n();
    let field = a.field();
    let mut tried = 0usize;

    if n <= budget.zero_one_cap && n >= 2 {
        for mask in 1..((1u64 << n) - 1) {
            let f = zero_one_vector(field, n, mask);
            tried += 1;
            if let Some(w) = witness_at(a, &f)? {
                return Ok(Ok(w));
            }
        }
    }

    let ones = FunctionVector::ones(field, n)?;
    tried += 1;
    if let Some(w) = witness_at(a, &ones)? {
        return Ok(Ok(w));
    }

    if n <= budget.zero_one_cap && n >= 2 {
        if let Some(inv) = a.inverse() {
            for mask in 1..((1u64 << n) - 1) {
                let f = inv.apply(&zero_one_vector(field, n, mask))?;
                tried += 1;
                if let Some(w) = witness_at(a, &f)? {
                    return Ok(Ok(w));
                }
            }
        }
    }

    if field == FieldTag::Complex && n <= budget.circle_cap && n >= 2 {
        for f in ProbeFamily::rational_circle(n).probes {
            tried += 1;
            if let Some(w) = witness_at(a, &f)? {
                return Ok(Ok(w));
            }
        }
    }

    let mut rng = rng_from_seed(budget.seed ^ 0x7717);
    for _ in 0..budget.random_probes {
        let f = random_vector(&mut rng, field, n, 9);
        tried += 1;
        if let Some(w) = witness_at(a, &f)? {
            return Ok(Ok(w));
        }
    }

    for restart in 0..budget.ascent_restarts {
        tried += 1;
        if let Some(candidate) = ascend(a, budget.seed.wrapping_add(restart as u64)) {
            if let Some(w) = witness_at(a, &candidate)? {
                return Ok(Ok(w));
            }
        }
    }

    Ok(Err(WitnessSearchExhausted {
        probes_tried: tried,
    }))
}

// Minimal complex float arithmetic for the ascent stage; verdicts never
// depend on it because every candidate is re-verified exactly.
#[derive(Clone, Copy)]
struct C64 {
    re: f64,
    im: f64,
}

impl C64 {
    fn sub(self, o: C64) -> C64 {
        C64 {
            re: self.re - o.re,
            im: self.im - o.im,
        }
    }
    fn mul(self, o: C64) -> C64 {
        C64 {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
    fn mod_sq(self) -> f64 {
        self.re * self.re + self.im * self.im
    }
}

fn float_matrix(a: &LinearMap) -> Vec<C64> {
    let n = a.n();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let (re, im) = a.entry(i, j).to_f64_parts();
            out.push(C64 { re, im });
        }
    }
    out
}

fn float_diam_sq(f: &[C64]) -> f64 {
    let mut best = 0.0f64;
    for i in 0..f.len() {
        for j in (i + 1)..f.len() {
            let g = f[i].sub(f[j]).mod_sq();
            if g > best {
                best = g;
            }
        }
    }
    best
}

fn float_objective(a: &[C64], n: usize, f: &[C64]) -> f64 {
    let mut img = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = C64 { re: 0.0, im: 0.0 };
        for j in 0..n {
            let p = a[i * n + j].mul(f[j]);
            acc.re += p.re;
            acc.im += p.im;
        }
        img.push(acc);
    }
    let d = float_diam_sq(&img) - float_diam_sq(f);
    if d < 0.0 {
        -d
    } else {
        d
    }
}

// Greedy coordinate ascent from a random start; returns the best point
// snapped back to exact rationals (float-to-rational is exact).
fn ascend(a: &LinearMap, seed: u64) -> Option<FunctionVector> {
    use num_rational::BigRational;
    use rand::Rng;

    let n = a.n();
    let field = a.field();
    let af = float_matrix(a);
    let mut rng = rng_from_seed(seed ^ 0xA5C3);
    let mut f: Vec<C64> = (0..n)
        .map(|_| C64 {
            re: rng.random_range(-1.0..1.0),
            im: if field == FieldTag::Complex {
                rng.random_range(-1.0..1.0)
            } else {
                0.0
            },
        })
        .collect();
    let mut value = float_objective(&af, n, &f);
    let mut step = 0.5f64;
    // The objective is scale-invariant in no direction (doubling f scales
    // both diameters), so cap passes instead of chasing a maximum: any
    // point with a nonzero gap is enough once it verifies exactly.
    let mut passes = 0usize;
    while step > 1e-6 && passes < 200 {
        passes += 1;
        let mut improved = false;
        for k in 0..n {
            let moves: &[(f64, f64)] = if field == FieldTag::Complex {
                &[(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)]
            } else {
                &[(step, 0.0), (-step, 0.0)]
            };
            for &(dr, di) in moves {
                let mut cand = f.clone();
                cand[k].re = (cand[k].re + dr).clamp(-4.0, 4.0);
                cand[k].im = (cand[k].im + di).clamp(-4.0, 4.0);
                let v = float_objective(&af, n, &cand);
                if v > value {
                    f = cand;
                    value = v;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    if value <= 1e-12 {
        return None;
    }
    let entries: Option<Vec<Scalar>> = f
        .iter()
        .map(|c| {
            let re = BigRational::from_float(c.re)?;
            let im = BigRational::from_float(c.im)?;
            Some(Scalar::new(re, im))
        })
        .collect();
    FunctionVector::new(field, entries?).ok()
}

/// The overall verdict for a matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Preserving,
    NotPreserving,
    DegenerateDimension,
    Singular,
}

impl core::fmt::Display for Verdict {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Verdict::Preserving => "preserving",
            Verdict::NotPreserving => "not_preserving",
            Verdict::DegenerateDimension => "degenerate_dimension",
            Verdict::Singular => "singular",
        })
    }
}

/// Structured reason backing a verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Details {
    /// The certificate assembles to the input exactly.
    CertifiedExact,
    /// `n = 1`: the diameter seminorm is identically zero, so every map
    /// preserves it; the certificate is the fixed degenerate triple.
    DegenerateDimension,
    /// Singular maps are out of scope for the classification and are
    /// never certified, even if no probe refutes them.
    SingularMatrix,
    /// Which structural equation failed during recovery.
    DecomposeFailed(DecomposeError),
}

#[derive(Clone, Debug)]
pub struct DiagnosticReport {
    pub verdict: Verdict,
    pub certificate: Option<CanonicalForm>,
    pub witness: Option<Witness>,
    pub details: Details,
}

/// Full decision with the default witness budget; see [`check_with`].
pub fn check(a: &LinearMap) -> Result<DiagnosticReport, WitnessSearchExhausted> {
    check_with(a, &WitnessBudget::default())
}

/// Decides diameter preservation of `a`:
///
/// - `n = 1` is degenerate-preserving and gets its fixed certificate;
/// - an exactly singular matrix is classified [`Verdict::Singular`];
/// - otherwise a successful decomposition is re-verified by assembling it
///   and yields [`Verdict::Preserving`] with the certificate;
/// - a failed decomposition triggers the witness search and yields
///   [`Verdict::NotPreserving`] with the verified witness.
///
/// The only error is witness-search exhaustion, which cannot occur for an
/// invertible non-canonical map within the real 0/1 stage's cap and would
/// contradict the classification anywhere else.
pub fn check_with(
    a: &LinearMap,
    budget: &WitnessBudget,
) -> Result<DiagnosticReport, WitnessSearchExhausted> {
    if a.n() == 1 {
        let certificate = decompose(a).expect("n = 1 always decomposes");
        return Ok(DiagnosticReport {
            verdict: Verdict::DegenerateDimension,
            certificate: Some(certificate),
            witness: None,
            details: Details::DegenerateDimension,
        });
    }
    if a.determinant().is_zero() {
        return Ok(DiagnosticReport {
            verdict: Verdict::Singular,
            certificate: None,
            witness: None,
            details: Details::SingularMatrix,
        });
    }
    match decompose(a) {
        Ok(form) => {
            assert!(form.assemble() == *a, "decompose postcondition");
            Ok(DiagnosticReport {
                verdict: Verdict::Preserving,
                certificate: Some(form),
                witness: None,
                details: Details::CertifiedExact,
            })
        }
        Err(err) => {
            let witness = find_witness(a, budget)?;
            Ok(DiagnosticReport {
                verdict: Verdict::NotPreserving,
                certificate: None,
                witness: Some(witness),
                details: Details::DecomposeFailed(err),
            })
        }
    }
}
