//! JSON formats for vectors and complex matrices.
//!
//! Complex matrices are row-major nested arrays whose entries are either
//! `[re, im]` pairs or bare reals. A flat array of `n²` entries is read as an
//! `n × n` matrix. Output always uses nested rows of `[re, im]` pairs.

use std::path::Path;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector, C64};

/// Parses JSON text, reporting the line and column of syntax errors.
pub fn parse_json(text: &str, source: &str) -> Result<Value> {
    serde_json::from_str(text)
        .map_err(|e| Error::Invalid(format!("{source}: line {}, column {}: {e}", e.line(), e.column())))
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
    parse_json(&text, &path.display().to_string())
}

fn field_err(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Invalid(format!("{field}: {msg}"))
}

fn as_real(v: &Value, field: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| field_err(field, format!("expected a number, found {v}")))
}

fn as_complex(v: &Value, field: &str) -> Result<C64> {
    match v {
        Value::Number(_) => Ok(c(as_real(v, field)?, 0.0)),
        Value::Array(pair) if pair.len() == 2 => {
            Ok(c(as_real(&pair[0], &format!("{field}[0]"))?, as_real(&pair[1], &format!("{field}[1]"))?))
        }
        Value::Object(map) => {
            let re = map.get("re").ok_or_else(|| field_err(field, "missing \"re\""))?;
            let im = map.get("im").map(|x| as_real(x, &format!("{field}.im"))).transpose()?.unwrap_or(0.0);
            Ok(c(as_real(re, &format!("{field}.re"))?, im))
        }
        _ => Err(field_err(field, format!("expected a number or [re, im] pair, found {v}"))),
    }
}

pub fn parse_real_vector(v: &Value, field: &str) -> Result<Vec<f64>> {
    let arr = v.as_array().ok_or_else(|| field_err(field, "expected an array of numbers"))?;
    arr.iter().enumerate().map(|(i, x)| as_real(x, &format!("{field}[{i}]"))).collect()
}

pub fn parse_complex_vector(v: &Value, field: &str) -> Result<CVector> {
    let arr = v.as_array().ok_or_else(|| field_err(field, "expected an array"))?;
    let entries: Vec<C64> = arr.iter().enumerate().map(|(i, x)| as_complex(x, &format!("{field}[{i}]"))).collect::<Result<_>>()?;
    Ok(CVector::from_vec(entries))
}

/// Reads a square complex matrix. An object with a `"matrix"` key is unwrapped.
pub fn parse_complex_matrix(v: &Value, field: &str) -> Result<CMatrix> {
    if let Some(inner) = v.get("matrix") {
        return parse_complex_matrix(inner, &format!("{field}.matrix"));
    }
    let arr = v.as_array().ok_or_else(|| field_err(field, "expected an array"))?;
    if arr.is_empty() {
        return Err(field_err(field, "empty matrix"));
    }
    // nested when every element is a row of the outer length; otherwise flat row-major
    let n = arr.len();
    let rows = arr.iter().map(|r| r.as_array().map(Vec::len));
    let nested = rows.clone().all(|l| l == Some(n)) || rows.clone().any(|l| l.is_some_and(|l| l != 2));
    let flat = !nested;
    if flat {
        let n = is_square(arr.len()).ok_or_else(|| field_err(field, format!("flat matrix length {} is not a perfect square", arr.len())))?;
        let entries: Vec<C64> = arr.iter().enumerate().map(|(i, x)| as_complex(x, &format!("{field}[{i}]"))).collect::<Result<_>>()?;
        return Ok(CMatrix::from_row_slice(n, n, &entries));
    }
    let mut m = CMatrix::zeros(n, n);
    for (i, row) in arr.iter().enumerate() {
        let row = row.as_array().ok_or_else(|| field_err(&format!("{field}[{i}]"), "expected a row array"))?;
        if row.len() != n {
            return Err(field_err(&format!("{field}[{i}]"), format!("row has {} entries, expected {n}", row.len())));
        }
        for (j, x) in row.iter().enumerate() {
            m[(i, j)] = as_complex(x, &format!("{field}[{i}][{j}]"))?;
        }
    }
    Ok(m)
}

fn is_square(len: usize) -> Option<usize> {
    let n = (len as f64).sqrt().round() as usize;
    (n * n == len && n > 0).then_some(n)
}

pub fn complex_to_json(z: C64) -> Value {
    json!([z.re, z.im])
}

pub fn matrix_to_json(m: &CMatrix) -> Value {
    Value::Array((0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| complex_to_json(m[(i, j)])).collect())).collect())
}

pub fn vector_to_json(v: &CVector) -> Value {
    Value::Array(v.iter().map(|&z| complex_to_json(z)).collect())
}

pub fn real_matrix_to_json(m: &nalgebra::DMatrix<f64>) -> Value {
    Value::Array((0..m.nrows()).map(|i| json!((0..m.ncols()).map(|j| m[(i, j)]).collect::<Vec<_>>())).collect())
}

/// Serialized report with a trailing newline.
pub fn to_json_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}
