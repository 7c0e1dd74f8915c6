//! Exact verification of diameter-preserving linear maps on `K^n`.
//!
//! A linear map `A` on `K^n` (with `K` the rationals or the rational
//! complex numbers) preserves the diameter seminorm
//! `diam(f) = max_{i,j} |f_i − f_j|` exactly when it splits as a
//! unimodular scalar times a coordinate permutation plus a constant
//! shift: `(Af)_i = τ·f_{σ(i)} + t(f)`, with `t(1) ≠ −τ` for
//! bijectivity. This crate makes that characterization executable:
//!
//! - [`canonical`] builds, composes, inverts and samples the triples
//!   `(τ, σ, t)`;
//! - [`decompose`] recovers the triple from a plain matrix or refutes
//!   preservation with a witness vector whose diameter changes;
//! - [`oracle`] decides preservation for real matrices by an independent
//!   extreme-point route that never looks at the canonical form;
//! - [`replay`] runs the finite pair/triple-intersection constructions
//!   that underlie the characterization and cross-checks them.
//!
//! All verdict-grade arithmetic is exact (`ℚ` or `ℚ(i)`); squared moduli
//! replace absolute values throughout so no square root is ever needed.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod canonical;
pub mod decompose;
pub mod diam;
pub mod error;
pub mod matrix;
pub mod oracle;
pub mod replay;
pub mod sample;
pub mod scalar;
pub mod vector;

pub use canonical::{
    compose, BijectivityVerdict, CanonicalForm, FormError, FormOptions, Permutation,
};
pub use decompose::{
    check, check_with, decompose, find_witness, DecomposeError, Details, DiagnosticReport, Verdict,
    Witness, WitnessBudget, WitnessSearchExhausted,
};
pub use diam::{achieving_pairs, all_pairs, diam, diam_squared, Diam, Pair, PairSet};
pub use error::CoreError;
pub use matrix::LinearMap;
pub use oracle::{brute_force_pair_map, probe_check, real_exact_check, OracleError, ProbeFamily};
pub use replay::{
    achieving_triples, additivity_routes, check_additivity, check_constancy, pair_image,
    point_map_and_rotation, replay_trace, triple_image, witness_family, FamilyTarget, ReplayError,
    ReplayTrace, StabilizeConfig, Triple, TripleSet, WitnessFamily,
};
pub use scalar::{rat, FieldTag, Rational, Scalar};
pub use vector::FunctionVector;
