//! Tolerance-based checking for decimal input.
//!
//! Mirrors the exact pipeline with a relative tolerance on every equality
//! the exact mode tests. Verdicts from this path are labeled numerical in
//! the report: decimal input is inexact by nature, so these are
//! best-effort classifications, not certificates.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use diampreserve_core::{FieldTag, Verdict};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub rel: f64,
}

impl Tolerance {
    pub fn new(rel: f64) -> Self {
        Tolerance {
            rel: rel.abs().max(f64::EPSILON),
        }
    }

    fn eq_c(&self, a: Complex64, b: Complex64) -> bool {
        (a - b).norm() <= self.rel * (1.0_f64).max(a.norm()).max(b.norm())
    }

    fn eq_f(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.rel * (1.0_f64).max(a.abs()).max(b.abs())
    }
}

#[derive(Clone, Debug)]
pub struct FloatMatrix {
    pub field: FieldTag,
    pub n: usize,
    pub data: Vec<Complex64>,
}

impl FloatMatrix {
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn apply(&self, f: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        (0..n)
            .map(|i| (0..n).map(|j| self.entry(i, j) * f[j]).sum())
            .collect()
    }

    /// Rank decision by partial-pivot elimination with a relative pivot
    /// threshold.
    pub fn is_singular(&self, tol: &Tolerance) -> bool {
        let n = self.n;
        let mut m = self.data.clone();
        let scale = m.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
        for col in 0..n {
            let (pivot_row, pivot_norm) = (col..n)
                .map(|r| (r, m[r * n + col].norm()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .expect("col < n");
            if pivot_norm <= tol.rel * scale {
                return true;
            }
            if pivot_row != col {
                for j in 0..n {
                    m.swap(pivot_row * n + j, col * n + j);
                }
            }
            let pivot = m[col * n + col];
            for r in (col + 1)..n {
                let factor = m[r * n + col] / pivot;
                for j in col..n {
                    let sub = factor * m[col * n + j];
                    m[r * n + j] -= sub;
                }
            }
        }
        false
    }

    fn quotient_project(&self) -> Vec<Complex64> {
        let n = self.n;
        let means: Vec<Complex64> = (0..n)
            .map(|j| (0..n).map(|i| self.entry(i, j)).sum::<Complex64>() / n as f64)
            .collect();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for (j, &mean) in means.iter().enumerate() {
                out.push(self.entry(i, j) - mean);
            }
        }
        out
    }
}

pub fn diam_sq(f: &[Complex64]) -> f64 {
    let mut best = 0.0_f64;
    for i in 0..f.len() {
        for j in (i + 1)..f.len() {
            let g = (f[i] - f[j]).norm_sqr();
            if g > best {
                best = g;
            }
        }
    }
    best
}

/// A recovered triple at tolerance.
#[derive(Clone, Debug)]
pub struct FloatForm {
    pub rotation: Complex64,
    pub relabel: Vec<usize>,
    pub shift: Vec<Complex64>,
}

#[derive(Clone, Debug)]
pub enum FloatDecomposeError {
    NotAPermutation {
        row_a: usize,
        row_b: usize,
        image: usize,
    },
    InconsistentTau {
        row_a: usize,
        row_b: usize,
    },
    TauNotUnimodular,
    RowsNotConstant {
        row: usize,
        col: usize,
    },
}

impl std::fmt::Display for FloatDecomposeError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FloatDecomposeError::NotAPermutation {
                row_a,
                row_b,
                image,
            } => write!(
                f,
                "rows {row_a} and {row_b} both point at column {image}; not a permutation"
            ),
            FloatDecomposeError::InconsistentTau { row_a, row_b } => {
                write!(f, "rows {row_a} and {row_b} yield different scalar factors")
            }
            FloatDecomposeError::TauNotUnimodular => {
                write!(
                    f,
                    "the extracted scalar factor is not unimodular at tolerance"
                )
            }
            FloatDecomposeError::RowsNotConstant { row, col } => write!(
                f,
                "entry ({row}, {col}) breaks the constant-shift structure at tolerance"
            ),
        }
    }
}

pub fn decompose_float(a: &FloatMatrix, tol: &Tolerance) -> Result<FloatForm, FloatDecomposeError> {
    let n = a.n;
    if n == 1 {
        return Ok(FloatForm {
            rotation: Complex64::new(1.0, 0.0),
            relabel: vec![0],
            shift: vec![a.entry(0, 0) - 1.0],
        });
    }
    if n == 2 {
        let d0 = a.entry(0, 0) - a.entry(1, 0);
        let d1 = a.entry(0, 1) - a.entry(1, 1);
        if !tol.eq_c(d0, -d1) {
            return Err(FloatDecomposeError::InconsistentTau { row_a: 0, row_b: 1 });
        }
        if !tol.eq_f(d0.norm_sqr(), 1.0) {
            return Err(FloatDecomposeError::TauNotUnimodular);
        }
        return Ok(FloatForm {
            rotation: d0,
            relabel: vec![0, 1],
            shift: vec![a.entry(1, 0), a.entry(0, 1)],
        });
    }

    let m = a.quotient_project();
    let mut images = Vec::with_capacity(n);
    let mut taus = Vec::with_capacity(n);
    for i in 0..n {
        let best = (0..n)
            .max_by(|&x, &y| m[i * n + x].norm_sqr().total_cmp(&m[i * n + y].norm_sqr()))
            .expect("n >= 3");
        let other = if best == 0 { 1 } else { 0 };
        taus.push(m[i * n + best] - m[i * n + other]);
        images.push(best);
    }
    let mut seen: Vec<Option<usize>> = vec![None; n];
    for (row, &img) in images.iter().enumerate() {
        if let Some(prev) = seen[img] {
            return Err(FloatDecomposeError::NotAPermutation {
                row_a: prev,
                row_b: row,
                image: img,
            });
        }
        seen[img] = Some(row);
    }
    for (row, &tau) in taus.iter().enumerate().skip(1) {
        if !tol.eq_c(tau, taus[0]) {
            return Err(FloatDecomposeError::InconsistentTau {
                row_a: 0,
                row_b: row,
            });
        }
    }
    let rotation = taus[0];
    if !tol.eq_f(rotation.norm_sqr(), 1.0) {
        return Err(FloatDecomposeError::TauNotUnimodular);
    }
    let shift: Vec<Complex64> = (0..n)
        .map(|j| {
            if j == images[0] {
                a.entry(0, j) - rotation
            } else {
                a.entry(0, j)
            }
        })
        .collect();
    for (i, &image) in images.iter().enumerate().skip(1) {
        for (j, &expected) in shift.iter().enumerate() {
            let residual = if j == image {
                a.entry(i, j) - rotation
            } else {
                a.entry(i, j)
            };
            if !tol.eq_c(residual, expected) {
                return Err(FloatDecomposeError::RowsNotConstant { row: i, col: j });
            }
        }
    }
    Ok(FloatForm {
        rotation,
        relabel: images,
        shift,
    })
}

#[derive(Clone, Debug)]
pub struct FloatWitness {
    pub vector: Vec<Complex64>,
    pub before: f64,
    pub after: f64,
}

fn witness_at(a: &FloatMatrix, f: &[Complex64], tol: &Tolerance) -> Option<FloatWitness> {
    let before = diam_sq(f);
    let after = diam_sq(&a.apply(f));
    if tol.eq_f(before, after) {
        return None;
    }
    Some(FloatWitness {
        vector: f.to_vec(),
        before,
        after,
    })
}

pub fn find_witness_float(
    a: &FloatMatrix,
    tol: &Tolerance,
    seed: u64,
    random_probes: usize,
) -> Option<FloatWitness> {
    let n = a.n;
    if (2..=12).contains(&n) {
        for mask in 1..((1u64 << n) - 1) {
            let f: Vec<Complex64> = (0..n)
                .map(|i| {
                    if (mask >> (n - 1 - i)) & 1 == 1 {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect();
            if let Some(w) = witness_at(a, &f, tol) {
                return Some(w);
            }
        }
    }
    let ones = vec![Complex64::new(1.0, 0.0); n];
    if let Some(w) = witness_at(a, &ones, tol) {
        return Some(w);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xF10A);
    for _ in 0..random_probes {
        let f: Vec<Complex64> = (0..n)
            .map(|_| {
                Complex64::new(
                    rng.random_range(-1.0..1.0),
                    if a.field == FieldTag::Complex {
                        rng.random_range(-1.0..1.0)
                    } else {
                        0.0
                    },
                )
            })
            .collect();
        if let Some(w) = witness_at(a, &f, tol) {
            return Some(w);
        }
    }
    None
}

#[derive(Clone, Debug)]
pub struct FloatReport {
    pub verdict: Verdict,
    pub form: Option<FloatForm>,
    pub witness: Option<FloatWitness>,
    pub error: Option<FloatDecomposeError>,
}

/// The numerical analogue of the exact `check`, labeled as such by the
/// caller. Returns `None` when the structure fails at tolerance but no
/// numerical witness was found within the budget, which is the
/// inconclusive case.
pub fn check_float(
    a: &FloatMatrix,
    tol: &Tolerance,
    seed: u64,
    random_probes: usize,
) -> Option<FloatReport> {
    if a.n == 1 {
        let form = decompose_float(a, tol).expect("n = 1 always decomposes");
        return Some(FloatReport {
            verdict: Verdict::DegenerateDimension,
            form: Some(form),
            witness: None,
            error: None,
        });
    }
    if a.is_singular(tol) {
        return Some(FloatReport {
            verdict: Verdict::Singular,
            form: None,
            witness: None,
            error: None,
        });
    }
    match decompose_float(a, tol) {
        Ok(form) => Some(FloatReport {
            verdict: Verdict::Preserving,
            form: Some(form),
            witness: None,
            error: None,
        }),
        Err(err) => {
            let witness = find_witness_float(a, tol, seed, random_probes)?;
            Some(FloatReport {
                verdict: Verdict::NotPreserving,
                form: None,
                witness: Some(witness),
                error: Some(err),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerance {
        Tolerance::new(DEFAULT_TOLERANCE)
    }

    fn real_matrix(n: usize, rows: &[&[f64]]) -> FloatMatrix {
        FloatMatrix {
            field: FieldTag::Real,
            n,
            data: rows
                .iter()
                .flat_map(|r| r.iter().map(|&v| Complex64::new(v, 0.0)))
                .collect(),
        }
    }

    #[test]
    fn equilateral_triangle_has_unit_diameter_three_ways() {
        // (0, 1, e^{iπ/3}): the classic unit-diameter triple; all three
        // pairwise gaps are 1 up to float error.
        let third = Complex64::from_polar(1.0, std::f64::consts::PI / 3.0);
        let f = vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), third];
        assert!((diam_sq(&f) - 1.0).abs() < 1e-12);
        for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
            assert!(((f[i] - f[j]).norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn decimal_canonical_map_decomposes() {
        // τ = −1, σ = swap(0,1) on three points, t = (0.25, −0.5, 0.125).
        let a = real_matrix(
            3,
            &[
                &[0.25, -1.5, 0.125],
                &[-0.75, -0.5, 0.125],
                &[0.25, -0.5, -0.875],
            ],
        );
        let form = decompose_float(&a, &tol()).unwrap();
        assert!((form.rotation.re + 1.0).abs() < 1e-12);
        assert_eq!(form.relabel, vec![1, 0, 2]);
        let report = check_float(&a, &tol(), 0, 100).unwrap();
        assert_eq!(report.verdict, Verdict::Preserving);
    }

    #[test]
    fn scaling_is_numerically_refuted() {
        let a = real_matrix(2, &[&[2.0, 0.0], &[0.0, 2.0]]);
        let report = check_float(&a, &tol(), 0, 100).unwrap();
        assert_eq!(report.verdict, Verdict::NotPreserving);
        let w = report.witness.unwrap();
        assert!((w.before - 1.0).abs() < 1e-12);
        assert!((w.after - 4.0).abs() < 1e-12);
    }

    #[test]
    fn near_singular_is_flagged() {
        let a = real_matrix(2, &[&[1.0, 1.0], &[1.0, 1.0 + 1e-13]]);
        let report = check_float(&a, &tol(), 0, 10).unwrap();
        assert_eq!(report.verdict, Verdict::Singular);
    }

    #[test]
    fn loose_tolerance_absorbs_small_perturbations() {
        let mut a = real_matrix(3, &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        a.data[1] += Complex64::new(1e-12, 0.0);
        assert_eq!(
            check_float(&a, &tol(), 0, 100).unwrap().verdict,
            Verdict::Preserving
        );
        let strict = Tolerance::new(1e-14);
        assert_eq!(
            check_float(&a, &strict, 0, 100).unwrap().verdict,
            Verdict::NotPreserving
        );
    }
}
