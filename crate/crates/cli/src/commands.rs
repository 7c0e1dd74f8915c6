//! Command implementations: each returns the JSON document to print plus
//! the process exit code.
//!
//! Exit codes are part of the interface: 0 preserving, 1 not preserving,
//! 2 singular or degenerate dimension, 3 input/usage errors (and internal
//! search exhaustion, which is reported on stderr).

use num_complex::Complex64;

use diampreserve_core::canonical::random_form;
use diampreserve_core::{
    check_with, decompose, find_witness, replay_trace, Details, DiagnosticReport, FieldTag,
    FormOptions, LinearMap, ReplayError, StabilizeConfig, Verdict, Witness, WitnessBudget,
};

use crate::float::{
    check_float, decompose_float, FloatForm, FloatMatrix, FloatReport, Tolerance, DEFAULT_TOLERANCE,
};
use crate::formats::{
    exact_vector_json, form_to_json, matrix_to_json, CanonicalFormJson, DetailsJson, EntryJson,
    GenerateJson, MatrixInput, NumberJson, ReplayJson, ReplayStepJson, ReportJson, TauJson,
    WitnessJson, SCHEMA,
};

pub const EXIT_PRESERVING: i32 = 0;
pub const EXIT_NOT_PRESERVING: i32 = 1;
pub const EXIT_SINGULAR_OR_DEGENERATE: i32 = 2;
pub const EXIT_ERROR: i32 = 3;

pub struct Outcome {
    pub json: serde_json::Value,
    pub code: i32,
    pub summary: String,
}

#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub seed: u64,
    pub max_probes: usize,
    pub tolerance: Option<f64>,
}

impl RunOptions {
    fn budget(&self) -> WitnessBudget {
        WitnessBudget {
            random_probes: self.max_probes,
            seed: self.seed,
            ..WitnessBudget::default()
        }
    }

    fn tol(&self) -> Tolerance {
        Tolerance::new(self.tolerance.unwrap_or(DEFAULT_TOLERANCE))
    }
}

fn verdict_code(verdict: Verdict) -> i32 {
    match verdict {
        Verdict::Preserving => EXIT_PRESERVING,
        Verdict::NotPreserving => EXIT_NOT_PRESERVING,
        Verdict::DegenerateDimension | Verdict::Singular => EXIT_SINGULAR_OR_DEGENERATE,
    }
}

fn details_json(details: &Details) -> DetailsJson {
    match details {
        Details::CertifiedExact => DetailsJson {
            kind: "certified_exact".into(),
            message: None,
        },
        Details::DegenerateDimension => DetailsJson {
            kind: "degenerate_dimension".into(),
            message: Some(
                "n = 1: the diameter seminorm is identically zero, so every map preserves it"
                    .into(),
            ),
        },
        Details::SingularMatrix => DetailsJson {
            kind: "singular_matrix".into(),
            message: Some("singular maps are not classified and never certified".into()),
        },
        Details::DecomposeFailed(e) => DetailsJson {
            kind: "decompose_failed".into(),
            message: Some(e.to_string()),
        },
    }
}

fn witness_json(w: &Witness) -> WitnessJson {
    WitnessJson {
        vector: exact_vector_json(&w.vector),
        diam_squared_before: EntryJson::Exact(w.diam_sq_before.to_string()),
        diam_squared_after: EntryJson::Exact(w.diam_sq_after.to_string()),
    }
}

fn exact_report_json(report: &DiagnosticReport) -> ReportJson {
    ReportJson {
        schema: SCHEMA.into(),
        mode: "exact".into(),
        numerical: false,
        tolerance: None,
        verdict: report.verdict.to_string(),
        certificate: report.certificate.as_ref().map(form_to_json),
        witness: report.witness.as_ref().map(witness_json),
        details: details_json(&report.details),
    }
}

fn float_form_json(form: &FloatForm, field: FieldTag, n: usize) -> CanonicalFormJson {
    CanonicalFormJson {
        schema: Some(SCHEMA.into()),
        n,
        field: match field {
            FieldTag::Real => "real".into(),
            FieldTag::Complex => "complex".into(),
        },
        tau: TauJson {
            re: NumberJson::Float(form.rotation.re),
            im: NumberJson::Float(form.rotation.im),
        },
        sigma: form.relabel.clone(),
        t: form
            .shift
            .iter()
            .map(|&v| EntryJson::float_value(v, field))
            .collect(),
    }
}

fn float_report_json(report: &FloatReport, a: &FloatMatrix, tol: &Tolerance) -> ReportJson {
    let details = match (&report.verdict, &report.error) {
        (Verdict::Preserving, _) => DetailsJson {
            kind: "certified_numerical".into(),
            message: Some("structure verified at the given relative tolerance".into()),
        },
        (Verdict::DegenerateDimension, _) => DetailsJson {
            kind: "degenerate_dimension".into(),
            message: None,
        },
        (Verdict::Singular, _) => DetailsJson {
            kind: "singular_matrix".into(),
            message: Some("pivot below tolerance during elimination".into()),
        },
        (_, Some(e)) => DetailsJson {
            kind: "decompose_failed".into(),
            message: Some(e.to_string()),
        },
        (_, None) => DetailsJson {
            kind: "decompose_failed".into(),
            message: None,
        },
    };
    ReportJson {
        schema: SCHEMA.into(),
        mode: "float".into(),
        numerical: true,
        tolerance: Some(tol.rel),
        verdict: report.verdict.to_string(),
        certificate: report
            .form
            .as_ref()
            .map(|f| float_form_json(f, a.field, a.n)),
        witness: report.witness.as_ref().map(|w| WitnessJson {
            vector: w
                .vector
                .iter()
                .map(|&v| EntryJson::float_value(v, a.field))
                .collect(),
            diam_squared_before: EntryJson::Float(w.before),
            diam_squared_after: EntryJson::Float(w.after),
        }),
        details,
    }
}

fn to_value<T: serde::Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).expect("report types serialize")
}

fn exact_to_float(a: &LinearMap) -> FloatMatrix {
    let n = a.n();
    let mut data = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let (re, im) = a.entry(i, j).to_f64_parts();
            data.push(Complex64::new(re, im));
        }
    }
    FloatMatrix {
        field: a.field(),
        n,
        data,
    }
}

/// A `--tol` flag forces the numerical pipeline even for exact input.
pub fn effective_input(input: MatrixInput, opts: &RunOptions) -> MatrixInput {
    match (&input, opts.tolerance) {
        (MatrixInput::Exact(a), Some(_)) => MatrixInput::Float(exact_to_float(a)),
        _ => input,
    }
}

pub fn cmd_check(input: MatrixInput, opts: &RunOptions) -> Result<Outcome, String> {
    match effective_input(input, opts) {
        MatrixInput::Exact(a) => {
            let report = check_with(&a, &opts.budget())
                .map_err(|e| format!("internal: {e}; rerun with a larger --max-probes"))?;
            Ok(Outcome {
                json: to_value(&exact_report_json(&report)),
                code: verdict_code(report.verdict),
                summary: format!("verdict: {} (exact)", report.verdict),
            })
        }
        MatrixInput::Float(a) => {
            let tol = opts.tol();
            let report = check_float(&a, &tol, opts.seed, opts.max_probes).ok_or_else(|| {
                "numerical check inconclusive: the structure fails at tolerance but no witness \
                 was found within the probe budget"
                    .to_string()
            })?;
            Ok(Outcome {
                json: to_value(&float_report_json(&report, &a, &tol)),
                code: verdict_code(report.verdict),
                summary: format!("verdict: {} (numerical)", report.verdict),
            })
        }
    }
}

pub fn cmd_witness(input: MatrixInput, opts: &RunOptions) -> Result<Outcome, String> {
    match effective_input(input, opts) {
        MatrixInput::Exact(a) => {
            if a.n() == 1 {
                let report = check_with(&a, &opts.budget()).expect("degenerate path");
                return Ok(Outcome {
                    json: to_value(&exact_report_json(&report)),
                    code: EXIT_SINGULAR_OR_DEGENERATE,
                    summary: "no witness exists: the single-point diameter is identically zero"
                        .into(),
                });
            }
            if a.determinant().is_zero() {
                let report = DiagnosticReport {
                    verdict: Verdict::Singular,
                    certificate: None,
                    witness: None,
                    details: Details::SingularMatrix,
                };
                return Ok(Outcome {
                    json: to_value(&exact_report_json(&report)),
                    code: EXIT_SINGULAR_OR_DEGENERATE,
                    summary: "singular input: not classified, no witness search".into(),
                });
            }
            match decompose(&a) {
                Ok(form) => {
                    let report = DiagnosticReport {
                        verdict: Verdict::Preserving,
                        certificate: Some(form),
                        witness: None,
                        details: Details::CertifiedExact,
                    };
                    Ok(Outcome {
                        json: to_value(&exact_report_json(&report)),
                        code: EXIT_PRESERVING,
                        summary: "no witness exists: the map is diameter preserving".into(),
                    })
                }
                Err(err) => {
                    let witness = find_witness(&a, &opts.budget())
                        .map_err(|e| format!("internal: {e}; rerun with a larger --max-probes"))?;
                    let report = DiagnosticReport {
                        verdict: Verdict::NotPreserving,
                        certificate: None,
                        witness: Some(witness),
                        details: Details::DecomposeFailed(err),
                    };
                    Ok(Outcome {
                        json: to_value(&exact_report_json(&report)),
                        code: EXIT_NOT_PRESERVING,
                        summary: "witness found: the diameter changes".into(),
                    })
                }
            }
        }
        float_input => cmd_check(float_input, opts),
    }
}

pub fn cmd_decompose(input: MatrixInput, opts: &RunOptions) -> Result<Outcome, String> {
    match effective_input(input, opts) {
        MatrixInput::Exact(a) => {
            if a.n() > 1 && a.determinant().is_zero() {
                let report = DiagnosticReport {
                    verdict: Verdict::Singular,
                    certificate: None,
                    witness: None,
                    details: Details::SingularMatrix,
                };
                return Ok(Outcome {
                    json: to_value(&exact_report_json(&report)),
                    code: EXIT_SINGULAR_OR_DEGENERATE,
                    summary: "singular input: not decomposed".into(),
                });
            }
            match decompose(&a) {
                Ok(form) => {
                    let code = if a.n() == 1 {
                        EXIT_SINGULAR_OR_DEGENERATE
                    } else {
                        EXIT_PRESERVING
                    };
                    Ok(Outcome {
                        json: to_value(&form_to_json(&form)),
                        code,
                        summary: format!(
                            "recovered triple: tau = {}, sigma = {:?}",
                            form.rotation(),
                            form.relabel().as_slice()
                        ),
                    })
                }
                Err(err) => {
                    let report = DiagnosticReport {
                        verdict: Verdict::NotPreserving,
                        certificate: None,
                        witness: None,
                        details: Details::DecomposeFailed(err),
                    };
                    Ok(Outcome {
                        json: to_value(&exact_report_json(&report)),
                        code: EXIT_NOT_PRESERVING,
                        summary: "no canonical triple: the map is not diameter preserving".into(),
                    })
                }
            }
        }
        MatrixInput::Float(a) => {
            let tol = opts.tol();
            if a.n > 1 && a.is_singular(&tol) {
                let report = FloatReport {
                    verdict: Verdict::Singular,
                    form: None,
                    witness: None,
                    error: None,
                };
                return Ok(Outcome {
                    json: to_value(&float_report_json(&report, &a, &tol)),
                    code: EXIT_SINGULAR_OR_DEGENERATE,
                    summary: "singular at tolerance: not decomposed".into(),
                });
            }
            match decompose_float(&a, &tol) {
                Ok(form) => {
                    let code = if a.n == 1 {
                        EXIT_SINGULAR_OR_DEGENERATE
                    } else {
                        EXIT_PRESERVING
                    };
                    Ok(Outcome {
                        json: to_value(&float_form_json(&form, a.field, a.n)),
                        code,
                        summary: "recovered triple at tolerance (numerical)".into(),
                    })
                }
                Err(err) => {
                    let report = FloatReport {
                        verdict: Verdict::NotPreserving,
                        form: None,
                        witness: None,
                        error: Some(err),
                    };
                    Ok(Outcome {
                        json: to_value(&float_report_json(&report, &a, &tol)),
                        code: EXIT_NOT_PRESERVING,
                        summary: "no canonical triple at tolerance (numerical)".into(),
                    })
                }
            }
        }
    }
}

pub fn cmd_generate(
    n: usize,
    field: FieldTag,
    seed: u64,
    singular: bool,
) -> Result<Outcome, String> {
    if n == 0 {
        return Err("--n must be at least 1".into());
    }
    if n > 64 {
        return Err("--n is capped at 64 for generation".into());
    }
    let form = random_form(
        n,
        field,
        seed,
        &FormOptions {
            singular,
            shift_bound: None,
        },
    );
    let matrix = form.assemble();
    let bundle = GenerateJson {
        schema: SCHEMA.into(),
        matrix: matrix_to_json(&matrix),
        form: form_to_json(&form),
    };
    Ok(Outcome {
        json: to_value(&bundle),
        code: EXIT_PRESERVING,
        summary: format!(
            "generated {} canonical map, n = {n}, seed = {seed}{}",
            field,
            if singular { ", singular" } else { "" }
        ),
    })
}

pub fn cmd_replay(input: MatrixInput, opts: &RunOptions, probes: usize) -> Result<Outcome, String> {
    let a = match input {
        MatrixInput::Exact(a) => a,
        MatrixInput::Float(_) => {
            return Err(
                "replay requires exact-mode input; float matrices cannot be replayed exactly"
                    .into(),
            )
        }
    };
    if opts.tolerance.is_some() {
        return Err("replay is exact only; --tol does not apply".into());
    }
    let cfg = StabilizeConfig {
        seed: opts.seed,
        ..StabilizeConfig::default()
    };
    match replay_trace(&a, &cfg, probes) {
        Ok(trace) => {
            let json = ReplayJson {
                schema: SCHEMA.into(),
                n: trace.n,
                field: trace.field.to_string(),
                steps: trace
                    .steps
                    .iter()
                    .map(|s| ReplayStepJson {
                        step: s.label.to_string(),
                        title: s.title.to_string(),
                        pass: s.pass,
                        detail: s.detail.clone(),
                    })
                    .collect(),
                all_pass: trace.all_pass,
            };
            let code = if trace.all_pass {
                EXIT_PRESERVING
            } else {
                EXIT_NOT_PRESERVING
            };
            Ok(Outcome {
                json: to_value(&json),
                code,
                summary: format!(
                    "replay {}: {}/{} steps passed",
                    if trace.all_pass { "passed" } else { "failed" },
                    json.steps.iter().filter(|s| s.pass).count(),
                    json.steps.len()
                ),
            })
        }
        Err(ReplayError::DimensionTooSmall { n, min }) => {
            let report = DiagnosticReport {
                verdict: Verdict::DegenerateDimension,
                certificate: None,
                witness: None,
                details: Details::DegenerateDimension,
            };
            let mut json = exact_report_json(&report);
            json.details.message = Some(format!(
                "the pair machinery needs at least {min} points; this map has {n}"
            ));
            Ok(Outcome {
                json: to_value(&json),
                code: EXIT_SINGULAR_OR_DEGENERATE,
                summary: "replay skipped: dimension too small".into(),
            })
        }
        Err(ReplayError::Singular) => {
            let report = DiagnosticReport {
                verdict: Verdict::Singular,
                certificate: None,
                witness: None,
                details: Details::SingularMatrix,
            };
            Ok(Outcome {
                json: to_value(&exact_report_json(&report)),
                code: EXIT_SINGULAR_OR_DEGENERATE,
                summary: "replay skipped: singular input".into(),
            })
        }
        Err(e) => Err(format!("replay failed: {e}")),
    }
}
