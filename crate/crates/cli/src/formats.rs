//! JSON and CSV wire formats.
//!
//! Exact entries travel as `"p"` or `"p/q"` strings in lowest terms with a
//! positive denominator, so parse → serialize is bit-exact for files this
//! tool emits. Float entries travel as JSON numbers. A file's `mode`
//! declares which one it uses; mixing is rejected rather than silently
//! widened or rounded.

use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use diampreserve_core::{
    CanonicalForm, FieldTag, FunctionVector, LinearMap, Permutation, Rational, Scalar,
};

pub const SCHEMA: &str = "diampreserve/1";

#[derive(Debug)]
pub struct ParseError(pub String);

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ParseError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError(msg.into()))
}

pub fn parse_rational(s: &str) -> Result<Rational, ParseError> {
    let mut parts = s.splitn(2, '/');
    let numer = parts.next().unwrap_or("");
    let numer = BigInt::from_str(numer.trim())
        .map_err(|_| ParseError(format!("bad rational numerator in {s:?}")))?;
    let denom = match parts.next() {
        None => BigInt::from(1),
        Some(d) => {
            let d = BigInt::from_str(d.trim())
                .map_err(|_| ParseError(format!("bad rational denominator in {s:?}")))?;
            if d == BigInt::from(0) {
                return err(format!("zero denominator in {s:?}"));
            }
            d
        }
    };
    Ok(Rational::new(numer, denom))
}

/// Lowest terms, positive denominator, `"p"` when integral.
pub fn rational_string(r: &Rational) -> String {
    r.to_string()
}

fn field_str(field: FieldTag) -> &'static str {
    match field {
        FieldTag::Real => "real",
        FieldTag::Complex => "complex",
    }
}

fn parse_field(s: &str) -> Result<FieldTag, ParseError> {
    match s {
        "real" => Ok(FieldTag::Real),
        "complex" => Ok(FieldTag::Complex),
        other => err(format!("unknown field {other:?} (expected real|complex)")),
    }
}

/// One matrix/vector entry on the wire, in any of the four shapes.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EntryJson {
    Exact(String),
    ComplexExact { re: String, im: String },
    Float(f64),
    ComplexFloat { re: f64, im: f64 },
}

impl EntryJson {
    pub fn exact_scalar(scalar: &Scalar, field: FieldTag) -> EntryJson {
        match field {
            FieldTag::Real => EntryJson::Exact(rational_string(scalar.re())),
            FieldTag::Complex => EntryJson::ComplexExact {
                re: rational_string(scalar.re()),
                im: rational_string(scalar.im()),
            },
        }
    }

    pub fn float_value(value: Complex64, field: FieldTag) -> EntryJson {
        match field {
            FieldTag::Real => EntryJson::Float(value.re),
            FieldTag::Complex => EntryJson::ComplexFloat {
                re: value.re,
                im: value.im,
            },
        }
    }

    fn to_exact(&self, field: FieldTag) -> Result<Scalar, ParseError> {
        match (self, field) {
            (EntryJson::Exact(s), FieldTag::Real) => Ok(Scalar::from_rational(parse_rational(s)?)),
            (EntryJson::ComplexExact { re, im }, FieldTag::Complex) => {
                Ok(Scalar::new(parse_rational(re)?, parse_rational(im)?))
            }
            (EntryJson::Exact(s), FieldTag::Complex) => {
                // A plain rational is a valid complex scalar.
                Ok(Scalar::from_rational(parse_rational(s)?))
            }
            (EntryJson::ComplexExact { .. }, FieldTag::Real) => {
                err("complex entry in a real-field file")
            }
            _ => err("float entry in an exact-mode file (mixed modes are rejected)"),
        }
    }

    fn to_float(&self, field: FieldTag) -> Result<Complex64, ParseError> {
        match (self, field) {
            (EntryJson::Float(v), _) => Ok(Complex64::new(*v, 0.0)),
            (EntryJson::ComplexFloat { re, im }, FieldTag::Complex) => Ok(Complex64::new(*re, *im)),
            (EntryJson::ComplexFloat { .. }, FieldTag::Real) => {
                err("complex entry in a real-field file")
            }
            _ => err("exact entry in a float-mode file (mixed modes are rejected)"),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixFileJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub field: String,
    pub n: usize,
    pub mode: String,
    pub rows: Vec<Vec<EntryJson>>,
}

/// A parsed matrix in one of the two modes.
#[derive(Clone, Debug)]
pub enum MatrixInput {
    Exact(LinearMap),
    Float(crate::float::FloatMatrix),
}

impl MatrixInput {
    pub fn n(&self) -> usize {
        match self {
            MatrixInput::Exact(a) => a.n(),
            MatrixInput::Float(a) => a.n,
        }
    }

    pub fn field(&self) -> FieldTag {
        match self {
            MatrixInput::Exact(a) => a.field(),
            MatrixInput::Float(a) => a.field,
        }
    }
}

pub fn check_schema(schema: &Option<String>) -> Result<(), ParseError> {
    match schema {
        None => Ok(()),
        Some(s) if s == SCHEMA => Ok(()),
        Some(s) => err(format!("unsupported schema {s:?} (expected {SCHEMA:?})")),
    }
}

pub fn parse_matrix_file(json: &MatrixFileJson) -> Result<MatrixInput, ParseError> {
    check_schema(&json.schema)?;
    let field = parse_field(&json.field)?;
    if json.n == 0 {
        return err("n must be at least 1");
    }
    if json.rows.len() != json.n {
        return err(format!(
            "expected {} rows, found {}",
            json.n,
            json.rows.len()
        ));
    }
    for (i, row) in json.rows.iter().enumerate() {
        if row.len() != json.n {
            return err(format!(
                "row {i} has {} entries, expected {}",
                row.len(),
                json.n
            ));
        }
    }
    match json.mode.as_str() {
        "exact" => {
            let rows: Result<Vec<Vec<Scalar>>, ParseError> = json
                .rows
                .iter()
                .map(|row| row.iter().map(|e| e.to_exact(field)).collect())
                .collect();
            let map = LinearMap::new(field, rows?).map_err(|e| ParseError(e.to_string()))?;
            Ok(MatrixInput::Exact(map))
        }
        "float" => {
            let mut data = Vec::with_capacity(json.n * json.n);
            for row in &json.rows {
                for e in row {
                    data.push(e.to_float(field)?);
                }
            }
            Ok(MatrixInput::Float(crate::float::FloatMatrix {
                field,
                n: json.n,
                data,
            }))
        }
        other => err(format!("unknown mode {other:?} (expected exact|float)")),
    }
}

pub fn matrix_to_json(a: &LinearMap) -> MatrixFileJson {
    let field = a.field();
    let rows = (0..a.n())
        .map(|i| {
            (0..a.n())
                .map(|j| EntryJson::exact_scalar(a.entry(i, j), field))
                .collect()
        })
        .collect();
    MatrixFileJson {
        schema: Some(SCHEMA.to_string()),
        field: field_str(field).to_string(),
        n: a.n(),
        mode: "exact".to_string(),
        rows,
    }
}

/// A single real quantity on the wire: `"p/q"` in exact mode, a JSON
/// number in float mode.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NumberJson {
    Exact(String),
    Float(f64),
}

impl NumberJson {
    fn to_rational(&self) -> Result<Rational, ParseError> {
        match self {
            NumberJson::Exact(s) => parse_rational(s),
            NumberJson::Float(_) => err("float value in an exact-mode document"),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TauJson {
    pub re: NumberJson,
    pub im: NumberJson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CanonicalFormJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub n: usize,
    pub field: String,
    pub tau: TauJson,
    pub sigma: Vec<usize>,
    pub t: Vec<EntryJson>,
}

pub fn form_to_json(form: &CanonicalForm) -> CanonicalFormJson {
    let field = form.field();
    CanonicalFormJson {
        schema: Some(SCHEMA.to_string()),
        n: form.n(),
        field: field_str(field).to_string(),
        tau: TauJson {
            re: NumberJson::Exact(rational_string(form.rotation().re())),
            im: NumberJson::Exact(rational_string(form.rotation().im())),
        },
        sigma: form.relabel().as_slice().to_vec(),
        t: form
            .shift()
            .iter()
            .map(|s| EntryJson::exact_scalar(s, field))
            .collect(),
    }
}

pub fn form_from_json(json: &CanonicalFormJson) -> Result<CanonicalForm, ParseError> {
    check_schema(&json.schema)?;
    let field = parse_field(&json.field)?;
    if json.sigma.len() != json.n || json.t.len() != json.n {
        return err("sigma and t must both have length n");
    }
    let rotation = Scalar::new(json.tau.re.to_rational()?, json.tau.im.to_rational()?);
    let relabel = Permutation::new(json.sigma.clone()).map_err(|e| ParseError(e.to_string()))?;
    let entries: Result<Vec<Scalar>, ParseError> =
        json.t.iter().map(|e| e.to_exact(field)).collect();
    let shift = FunctionVector::new(field, entries?).map_err(|e| ParseError(e.to_string()))?;
    CanonicalForm::new(field, rotation, relabel, shift).map_err(|e| ParseError(e.to_string()))
}

/// Plain-text CSV import: one row per line, cells separated by commas.
/// All-rational cells give an exact real matrix; any decimal or exponent
/// cell switches the whole file to float mode, and a file mixing the two
/// syntaxes is rejected.
pub fn parse_csv(text: &str) -> Result<MatrixInput, ParseError> {
    let lines: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect();
    if lines.is_empty() {
        return err("empty CSV input");
    }
    let n = lines.len();
    let mut cells: Vec<Vec<&str>> = Vec::with_capacity(n);
    for (i, line) in lines.iter().enumerate() {
        let row: Vec<&str> = line.split(',').map(str::trim).collect();
        if row.len() != n {
            return err(format!(
                "CSV row {i} has {} cells, expected {n} (matrix must be square)",
                row.len()
            ));
        }
        cells.push(row);
    }
    let is_rational = |s: &str| parse_rational(s).is_ok();
    let is_float = |s: &str| {
        (s.contains('.') || s.contains('e') || s.contains('E')) && s.parse::<f64>().is_ok()
    };
    let all_rational = cells.iter().flatten().all(|s| is_rational(s));
    if all_rational {
        let rows: Result<Vec<Vec<Scalar>>, ParseError> = cells
            .iter()
            .map(|row| {
                row.iter()
                    .map(|s| parse_rational(s).map(Scalar::from_rational))
                    .collect()
            })
            .collect();
        let map = LinearMap::new(FieldTag::Real, rows?).map_err(|e| ParseError(e.to_string()))?;
        return Ok(MatrixInput::Exact(map));
    }
    let all_float = cells
        .iter()
        .flatten()
        .all(|s| is_float(s) || is_rational(s));
    if !all_float {
        return err("CSV mixes rational and non-numeric cells");
    }
    // Floats force float mode; rational-looking cells are widened.
    let mut data = Vec::with_capacity(n * n);
    for row in &cells {
        for s in row {
            let v = if let Ok(r) = parse_rational(s) {
                r.to_f64()
                    .ok_or_else(|| ParseError(format!("cell {s:?} overflows a float")))?
            } else {
                s.parse::<f64>()
                    .map_err(|_| ParseError(format!("bad CSV cell {s:?}")))?
            };
            data.push(Complex64::new(v, 0.0));
        }
    }
    Ok(MatrixInput::Float(crate::float::FloatMatrix {
        field: FieldTag::Real,
        n,
        data,
    }))
}

/// A witness vector with its two squared diameters, in either mode.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessJson {
    pub vector: Vec<EntryJson>,
    pub diam_squared_before: EntryJson,
    pub diam_squared_after: EntryJson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DetailsJson {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

/// The diagnostic report emitted by `check` and `witness`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportJson {
    pub schema: String,
    pub mode: String,
    pub numerical: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub verdict: String,
    pub certificate: Option<CanonicalFormJson>,
    pub witness: Option<WitnessJson>,
    pub details: DetailsJson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReplayStepJson {
    pub step: String,
    pub title: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReplayJson {
    pub schema: String,
    pub n: usize,
    pub field: String,
    pub steps: Vec<ReplayStepJson>,
    pub all_pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GenerateJson {
    pub schema: String,
    pub matrix: MatrixFileJson,
    pub form: CanonicalFormJson,
}

/// Documents that accept a matrix also accept a `generate` bundle, so the
/// two commands pipe into each other.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum MatrixDocument {
    Bundle { matrix: MatrixFileJson },
    Plain(MatrixFileJson),
}

pub fn parse_matrix_document(text: &str) -> Result<MatrixInput, ParseError> {
    let doc: MatrixDocument =
        serde_json::from_str(text).map_err(|e| ParseError(format!("bad matrix JSON: {e}")))?;
    let json = match &doc {
        MatrixDocument::Bundle { matrix } => matrix,
        MatrixDocument::Plain(m) => m,
    };
    parse_matrix_file(json)
}

pub fn exact_vector_json(v: &FunctionVector) -> Vec<EntryJson> {
    v.iter()
        .map(|s| EntryJson::exact_scalar(s, v.field()))
        .collect()
}
