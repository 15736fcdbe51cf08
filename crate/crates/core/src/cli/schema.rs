//! JSON problem and solution files.
//!
//! Tensors are `{"shape": [d, d, …], "values": [...]}` with row-major values,
//! last index fastest. Scalars are JSON numbers or strings (`"1/3"`,
//! `"2.5e-3"`); strings are the lossless form in rational mode.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::coeff::{CoeffVector, DegeneracyReport, TraceCoeffs};
use crate::linalg::Matrix;
use crate::perm::{canonical_order, factorial, MAX_TABLE_RANK};
use crate::scalar::Scalar;
use crate::solver::Solution;
use crate::tensor::{DenseTensor, Metric, Sign, SlotPair, Symmetry};

/// Input validation failure; `path` names the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

impl SchemaError {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        SchemaError { path: path.into(), message: message.into() }
    }
}

impl std::fmt::Display for SchemaError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for SchemaError {}

type SchemaResult<T> = std::result::Result<T, SchemaError>;

/// Deserializes with the failing field path attached.
pub fn from_json_str<'de, D: Deserialize<'de>>(text: &'de str) -> SchemaResult<D> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { String::new() } else { path };
        SchemaError::new(path, e.into_inner().to_string())
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Plain,
    Traced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Arithmetic {
    #[default]
    Float,
    Rational,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum ScalarText {
    Number(f64),
    Text(String),
}

impl ScalarText {
    fn parse<T: Scalar>(&self, path: &str) -> SchemaResult<T> {
        match self {
            ScalarText::Number(v) => T::from_json_f64(*v),
            ScalarText::Text(s) => T::parse_text(s),
        }
        .ok_or_else(|| SchemaError::new(path, format!("not a finite scalar: {}", self.render())))
    }

    fn render(&self) -> String {
        match self {
            ScalarText::Number(v) => v.to_string(),
            ScalarText::Text(s) => format!("{s:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TensorFile {
    pub shape: Vec<usize>,
    pub values: Vec<ScalarText>,
}

impl TensorFile {
    pub fn from_tensor<T: Scalar>(t: &DenseTensor<T>) -> Value {
        serde_json::json!({
            "shape": vec![t.dim(); t.rank()],
            "values": t.values().iter().map(Scalar::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn parse<T: Scalar>(&self, path: &str, rank: usize, dim: usize) -> SchemaResult<DenseTensor<T>> {
        if self.shape.len() != rank || self.shape.iter().any(|&s| s != dim) {
            return Err(SchemaError::new(
                format!("{path}.shape"),
                format!("expected {:?}, got {:?}", vec![dim; rank], self.shape),
            ));
        }
        let expected = dim.checked_pow(rank as u32).unwrap_or(usize::MAX);
        if self.values.len() != expected {
            return Err(SchemaError::new(
                format!("{path}.values"),
                format!("expected {expected} entries, got {}", self.values.len()),
            ));
        }
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| v.parse(&format!("{path}.values[{i}]")))
            .collect::<SchemaResult<Vec<T>>>()?;
        DenseTensor::new(rank, dim, values).map_err(|e| SchemaError::new(path, e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TraceFile {
    pub a7: [ScalarText; 3],
    pub a8: [ScalarText; 3],
    pub a9: [ScalarText; 3],
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetryFile {
    /// One-based slots.
    pub pair: [usize; 2],
    pub sign: i64,
}

impl SymmetryFile {
    pub fn parse(&self, path: &str) -> SchemaResult<Symmetry> {
        let pair = SlotPair::from_slots(self.pair[0], self.pair[1])
            .map_err(|e| SchemaError::new(format!("{path}.pair"), e.to_string()))?;
        let sign = Sign::from_i64(self.sign).map_err(|e| SchemaError::new(format!("{path}.sign"), e.to_string()))?;
        Ok(Symmetry { pair, sign })
    }
}

/// Raw problem file.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub rank: usize,
    pub dim: usize,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub arithmetic: Arithmetic,
    pub coefficients: Vec<ScalarText>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_coefficients: Option<TraceFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Vec<Vec<ScalarText>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<SymmetryFile>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<TensorFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch: Option<Vec<TensorFile>>,
    /// Solve through the brute-force operator instead of the permutation
    /// formula.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub oracle: bool,
}

/// Validated problem in a fixed arithmetic.
#[derive(Debug, Clone)]
pub struct Problem<T> {
    pub rank: usize,
    pub dim: usize,
    pub mode: Mode,
    pub coeffs: CoeffVector<T>,
    pub trace_coeffs: Option<TraceCoeffs<T>>,
    pub metric: Option<Metric<T>>,
    pub symmetry: Option<Symmetry>,
    /// Sources in input order; empty when the file has neither `B` nor `batch`.
    pub sources: Vec<DenseTensor<T>>,
    pub batched: bool,
    pub oracle: bool,
}

fn parse_triple<T: Scalar>(v: &[ScalarText; 3], path: &str) -> SchemaResult<[T; 3]> {
    Ok([
        v[0].parse(&format!("{path}[0]"))?,
        v[1].parse(&format!("{path}[1]"))?,
        v[2].parse(&format!("{path}[2]"))?,
    ])
}

impl ProblemFile {
    pub fn validate<T: Scalar>(&self) -> SchemaResult<Problem<T>> {
        let (rank, dim) = (self.rank, self.dim);
        if rank == 0 || rank > MAX_TABLE_RANK {
            return Err(SchemaError::new("rank", format!("must be between 1 and {MAX_TABLE_RANK}, got {rank}")));
        }
        if dim == 0 {
            return Err(SchemaError::new("dim", "must be positive"));
        }
        let m = factorial(rank);
        if self.coefficients.len() != m {
            return Err(SchemaError::new(
                "coefficients",
                format!("expected {m} entries ({rank}!), got {}", self.coefficients.len()),
            ));
        }
        let a = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(i, v)| v.parse(&format!("coefficients[{i}]")))
            .collect::<SchemaResult<Vec<T>>>()?;
        let coeffs = CoeffVector::new(rank, a).map_err(|e| SchemaError::new("coefficients", e.to_string()))?;

        let metric = match &self.metric {
            None => None,
            Some(rows) => {
                if rows.len() != dim {
                    return Err(SchemaError::new("metric", format!("expected {dim} rows, got {}", rows.len())));
                }
                let mut g = Matrix::zeros(dim);
                for (i, row) in rows.iter().enumerate() {
                    if row.len() != dim {
                        return Err(SchemaError::new(
                            format!("metric[{i}]"),
                            format!("expected {dim} entries, got {}", row.len()),
                        ));
                    }
                    for (j, v) in row.iter().enumerate() {
                        g.set(i, j, v.parse(&format!("metric[{i}][{j}]"))?);
                    }
                }
                Some(Metric::new(g).map_err(|e| SchemaError::new("metric", e.to_string()))?)
            }
        };

        let trace_coeffs = match &self.trace_coefficients {
            None => None,
            Some(t) => Some(TraceCoeffs {
                a7: parse_triple(&t.a7, "trace_coefficients.a7")?,
                a8: parse_triple(&t.a8, "trace_coefficients.a8")?,
                a9: parse_triple(&t.a9, "trace_coefficients.a9")?,
            }),
        };

        let symmetry = self.symmetry.as_ref().map(|s| s.parse("symmetry")).transpose()?;
        if symmetry.is_some() && rank != 3 {
            return Err(SchemaError::new("symmetry", "pair symmetry is only supported at rank 3"));
        }

        match self.mode {
            Mode::Traced => {
                if rank != 3 {
                    return Err(SchemaError::new("mode", "traced mode requires rank 3"));
                }
                if metric.is_none() {
                    return Err(SchemaError::new("metric", "required in traced mode"));
                }
                if trace_coeffs.is_none() {
                    return Err(SchemaError::new("trace_coefficients", "required in traced mode"));
                }
                if symmetry.is_some() {
                    return Err(SchemaError::new("symmetry", "not supported in traced mode"));
                }
            }
            Mode::Plain => {
                if trace_coeffs.is_some() {
                    return Err(SchemaError::new("trace_coefficients", "only allowed in traced mode"));
                }
            }
        }

        let (sources, batched) = match (&self.b, &self.batch) {
            (Some(_), Some(_)) => return Err(SchemaError::new("batch", "give either B or batch, not both")),
            (Some(b), None) => (vec![b.parse("B", rank, dim)?], false),
            (None, Some(items)) => {
                let sources = items
                    .iter()
                    .enumerate()
                    .map(|(i, b)| b.parse(&format!("batch[{i}]"), rank, dim))
                    .collect::<SchemaResult<Vec<_>>>()?;
                (sources, true)
            }
            (None, None) => (Vec::new(), false),
        };

        Ok(Problem {
            rank,
            dim,
            mode: self.mode,
            coeffs,
            trace_coeffs,
            metric,
            symmetry,
            sources,
            batched,
            oracle: self.oracle,
        })
    }
}

/// JSON rendering of a degeneracy report.
pub fn report_json<T: Scalar>(r: &DegeneracyReport<T>) -> Value {
    let mut obj = serde_json::Map::new();
    obj.insert("size".into(), r.size.into());
    obj.insert("det".into(), r.det.to_json());
    obj.insert("singular".into(), r.singular.into());
    if let Some(sigma) = &r.sigma {
        obj.insert("sigma".into(), Value::Array(sigma.iter().map(Scalar::to_json).collect()));
        obj.insert(
            "vanishing".into(),
            Value::Array(r.vanishing.iter().map(|i| Value::String(format!("sigma{}", i + 1))).collect()),
        );
    }
    obj.insert("nullity".into(), r.nullity.into());
    obj.insert(
        "null_basis".into(),
        Value::Array(
            r.null_basis
                .iter()
                .map(|v| Value::Array(v.iter().map(Scalar::to_json).collect()))
                .collect(),
        ),
    );
    if let Some(c) = r.condition {
        // Infinity has no JSON form.
        obj.insert("condition".into(), serde_json::Number::from_f64(c).map_or(Value::Null, Value::Number));
    }
    Value::Object(obj)
}

fn order_json(rank: usize) -> Value {
    let order = canonical_order(rank).expect("rank validated");
    Value::Array(order.iter().map(|p| serde_json::json!(p.one_based())).collect())
}

/// Solution file body for one source.
pub fn solution_json<T: Scalar>(s: &Solution<T>) -> Value {
    let rank = s.n.rank();
    serde_json::json!({
        "N": TensorFile::from_tensor(&s.n),
        "inverse_first_row": s.inverse_first_row.iter().map(Scalar::to_json).collect::<Vec<_>>(),
        "residual_inf": s.residual_inf.to_json(),
        "degeneracy": report_json(&s.degeneracy),
        "path": s.path.as_str(),
        "canonical_order": if rank <= MAX_TABLE_RANK { order_json(rank) } else { Value::Null },
        "rank_within_dimension": s.rank_within_dimension,
    })
}

/// The `N` tensors of a solution file: one for a single solve, one per entry
/// for a batch (`{"solutions": [...]}`).
#[derive(Debug, Clone, Deserialize)]
pub struct SolutionFile {
    #[serde(rename = "N", default)]
    pub n: Option<TensorFile>,
    #[serde(default)]
    pub solutions: Option<Vec<SolutionEntry>>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SolutionEntry {
    #[serde(rename = "N")]
    pub n: TensorFile,
}

impl SolutionFile {
    pub fn tensors<T: Scalar>(&self, rank: usize, dim: usize) -> SchemaResult<Vec<DenseTensor<T>>> {
        match (&self.n, &self.solutions) {
            (Some(n), None) => Ok(vec![n.parse("N", rank, dim)?]),
            (None, Some(list)) => list
                .iter()
                .enumerate()
                .map(|(i, e)| e.n.parse(&format!("solutions[{i}].N"), rank, dim))
                .collect(),
            _ => Err(SchemaError::new("", "solution file must contain exactly one of N or solutions")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn problem(text: &str) -> SchemaResult<ProblemFile> {
        from_json_str(text)
    }

    const EXAMPLE: &str = r#"{
        "rank": 2, "dim": 2,
        "coefficients": [3, "1/2"],
        "B": {"shape": [2, 2], "values": [1, 2, 3, 0.1]}
    }"#;

    #[test]
    fn parses_numbers_and_fractions() {
        let p = problem(EXAMPLE).unwrap().validate::<Rational>().unwrap();
        assert_eq!(p.coeffs.values()[1], Rational::new(1.into(), 2.into()));
        assert_eq!(p.sources[0].values()[3], Rational::new(1.into(), 10.into()));
        let p = problem(EXAMPLE).unwrap().validate::<f64>().unwrap();
        assert_eq!(p.coeffs.values(), &[3.0, 0.5]);
        assert_eq!(p.mode, Mode::Plain);
        assert!(!p.batched);
    }

    #[test]
    fn type_errors_name_the_field() {
        let err = problem(r#"{"rank": "three", "dim": 2, "coefficients": []}"#).unwrap_err();
        assert_eq!(err.path, "rank");
        let err = problem(r#"{"rank": 2, "dim": 2, "coefficients": [1, 0], "B": {"shape": [2, 2], "values": [1, 2, 3, [4]]}}"#)
            .unwrap_err();
        assert_eq!(err.path, "B.values[3]");
        let err = problem(r#"{"rank": 2, "dim": 2, "coefficients": [1, 0], "extra": 1}"#).unwrap_err();
        assert!(err.message.contains("extra"));
        let err = problem(r#"{"rank": 2, "dim": 2, "coefficients": [1, 0], "mode": "weird"}"#).unwrap_err();
        assert_eq!(err.path, "mode");
    }

    #[test]
    fn shape_errors_name_the_field() {
        let check = |text: &str, path: &str| {
            let err = problem(text).unwrap().validate::<f64>().unwrap_err();
            assert_eq!(err.path, path, "{err}");
        };
        check(r#"{"rank": 3, "dim": 2, "coefficients": [1, 0]}"#, "coefficients");
        check(r#"{"rank": 2, "dim": 2, "coefficients": [1, "x"]}"#, "coefficients[1]");
        check(r#"{"rank": 2, "dim": 2, "coefficients": [1, 0], "B": {"shape": [2], "values": [1, 2]}}"#, "B.shape");
        check(r#"{"rank": 2, "dim": 2, "coefficients": [1, 0], "B": {"shape": [2, 2], "values": [1]}}"#, "B.values");
        check(r#"{"rank": 2, "dim": 2, "coefficients": [1, 0], "batch": [{"shape": [2, 2], "values": [1, 2, 3, 4]}, {"shape": [2, 2], "values": [1, 2, 3, "?"]}]}"#, "batch[1].values[3]");
        check(r#"{"rank": 2, "dim": 2, "coefficients": [1, 0], "mode": "traced"}"#, "mode");
        check(r#"{"rank": 3, "dim": 2, "coefficients": [1, 0, 0, 0, 0, 0], "mode": "traced"}"#, "metric");
        check(r#"{"rank": 3, "dim": 2, "coefficients": [1, 0, 0, 0, 0, 0], "metric": [[1, 0], [0, 1]], "mode": "traced"}"#, "trace_coefficients");
        check(r#"{"rank": 3, "dim": 2, "coefficients": [1, 0, 0, 0, 0, 0], "metric": [[1, 0], [0]]}"#, "metric[1]");
        check(r#"{"rank": 3, "dim": 2, "coefficients": [1, 0, 0, 0, 0, 0], "metric": [[1, 2], [0, 1]]}"#, "metric");
        check(r#"{"rank": 3, "dim": 2, "coefficients": [1, 0, 0, 0, 0, 0], "symmetry": {"pair": [1, 1], "sign": 1}}"#, "symmetry.pair");
        check(r#"{"rank": 3, "dim": 2, "coefficients": [1, 0, 0, 0, 0, 0], "symmetry": {"pair": [1, 2], "sign": 2}}"#, "symmetry.sign");
        check(r#"{"rank": 7, "dim": 2, "coefficients": []}"#, "rank");
        check(r#"{"rank": 2, "dim": 0, "coefficients": [1, 0]}"#, "dim");
    }

    #[test]
    fn solution_file_forms() {
        let single: SolutionFile = from_json_str(r#"{"N": {"shape": [2], "values": [1, 2]}, "path": "plain"}"#).unwrap();
        assert_eq!(single.tensors::<f64>(1, 2).unwrap().len(), 1);
        let batch: SolutionFile = from_json_str(
            r#"{"solutions": [{"N": {"shape": [2], "values": [1, 2]}}, {"N": {"shape": [2], "values": [3, 4]}}]}"#,
        )
        .unwrap();
        assert_eq!(batch.tensors::<f64>(1, 2).unwrap()[1].values(), &[3.0, 4.0]);
        let empty: SolutionFile = from_json_str(r#"{"degeneracy": {}}"#).unwrap();
        assert!(empty.tensors::<f64>(1, 2).is_err());
    }
}
