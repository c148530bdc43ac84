//! JSON operator spec documents.
//!
//! ```json
//! {"kind": "toeplitz", "coeffs": {"0": 1, "-1": -1}}
//! {"kind": "twisted", "coeffs": {"1": [0, 1]}, "theta": "1/3"}
//! {"kind": "periodic", "coeffs": {"0": 2}, "weights": [1, 0.5]}
//! {"kind": "dense", "points_rows": [0, 0.5], "points_cols": [0], "entries": [[0, 0, 1], [1, 0, 0.25]]}
//! ```
//!
//! Scalars are numbers or `[re, im]` pairs; coefficient keys are decimal offsets.

use num_complex::Complex64;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::geometry::IndexSet;
use crate::operator::{Coeffs, DenseWindow, OperatorSpec, Rational};
use crate::scalar::Scalar;

pub fn parse_operator_spec(text: &str) -> Result<OperatorSpec> {
    let value: Value = serde_json::from_str(text).map_err(|e| {
        Error::parse(format!("line {} column {}", e.line(), e.column()), e.to_string())
    })?;
    spec_from_value(&value)
}

fn object<'a>(v: &'a Value, at: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::parse(at, "expected an object"))
}

fn field<'a>(obj: &'a Map<String, Value>, at: &str, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| Error::parse(at, format!("missing field \"{key}\"")))
}

fn real(v: &Value, at: &str) -> Result<f64> {
    let x = v.as_f64().ok_or_else(|| Error::parse(at, "expected a number"))?;
    if !x.is_finite() {
        return Err(Error::parse(at, "value is not finite"));
    }
    Ok(x)
}

fn scalar(v: &Value, at: &str) -> Result<Scalar> {
    match v {
        Value::Array(pair) => {
            if pair.len() != 2 {
                return Err(Error::parse(at, "complex values are [re, im] pairs"));
            }
            Ok(Complex64::new(real(&pair[0], &format!("{at}[0]"))?, real(&pair[1], &format!("{at}[1]"))?))
        }
        _ => Ok(Complex64::new(real(v, at)?, 0.0)),
    }
}

fn index(v: &Value, at: &str) -> Result<usize> {
    v.as_u64()
        .map(|i| i as usize)
        .ok_or_else(|| Error::parse(at, "expected a non-negative integer index"))
}

fn coeffs(v: &Value, at: &str) -> Result<Coeffs> {
    let obj = object(v, at)?;
    let mut out = Coeffs::new();
    for (key, val) in obj {
        let here = format!("{at}.\"{key}\"");
        let k: i64 = key
            .trim()
            .parse()
            .map_err(|_| Error::parse(&here, "coefficient keys are decimal integer offsets"))?;
        if out.insert(k, scalar(val, &here)?).is_some() {
            return Err(Error::parse(&here, format!("offset {k} given twice")));
        }
    }
    Ok(out)
}

fn check_keys(obj: &Map<String, Value>, allowed: &[&str]) -> Result<()> {
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::parse(format!("$.{key}"), "unknown field"));
        }
    }
    Ok(())
}

fn points(v: &Value, at: &str) -> Result<IndexSet> {
    let arr = v.as_array().ok_or_else(|| Error::parse(at, "expected an array of reals"))?;
    let xs = arr
        .iter()
        .enumerate()
        .map(|(i, x)| real(x, &format!("{at}[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    IndexSet::line(xs).map_err(|e| Error::parse(at, e.to_string()))
}

pub fn spec_from_value(v: &Value) -> Result<OperatorSpec> {
    let obj = object(v, "$")?;
    let kind = field(obj, "$", "kind")?
        .as_str()
        .ok_or_else(|| Error::parse("$.kind", "expected a string"))?;
    match kind {
        "toeplitz" => {
            check_keys(obj, &["kind", "coeffs"])?;
            Ok(OperatorSpec::Toeplitz {
                coeffs: coeffs(field(obj, "$", "coeffs")?, "$.coeffs")?,
            })
        }
        "twisted" => {
            check_keys(obj, &["kind", "coeffs", "theta"])?;
            let c = coeffs(field(obj, "$", "coeffs")?, "$.coeffs")?;
            let theta = field(obj, "$", "theta")?
                .as_str()
                .ok_or_else(|| Error::parse("$.theta", "θ is written as a string \"r/q\""))?;
            let theta: Rational = theta.parse().map_err(|e: Error| Error::parse("$.theta", e.to_string()))?;
            Ok(OperatorSpec::twisted(c, theta))
        }
        "periodic" => {
            check_keys(obj, &["kind", "coeffs", "weights"])?;
            let c = coeffs(field(obj, "$", "coeffs")?, "$.coeffs")?;
            let w = field(obj, "$", "weights")?
                .as_array()
                .ok_or_else(|| Error::parse("$.weights", "expected an array"))?;
            let weights = w
                .iter()
                .enumerate()
                .map(|(i, x)| scalar(x, &format!("$.weights[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            OperatorSpec::periodic(c, weights).map_err(|e| Error::parse("$.weights", e.to_string()))
        }
        "dense" => {
            check_keys(obj, &["kind", "points_rows", "points_cols", "entries"])?;
            let rows = points(field(obj, "$", "points_rows")?, "$.points_rows")?;
            let cols = points(field(obj, "$", "points_cols")?, "$.points_cols")?;
            let list = field(obj, "$", "entries")?
                .as_array()
                .ok_or_else(|| Error::parse("$.entries", "expected an array of [row, col, value]"))?;
            let mut entries = Vec::with_capacity(list.len());
            for (n, e) in list.iter().enumerate() {
                let at = format!("$.entries[{n}]");
                let t = e
                    .as_array()
                    .filter(|t| t.len() == 3)
                    .ok_or_else(|| Error::parse(&at, "expected [row, col, value]"))?;
                entries.push((
                    index(&t[0], &format!("{at}[0]"))?,
                    index(&t[1], &format!("{at}[1]"))?,
                    scalar(&t[2], &format!("{at}[2]"))?,
                ));
            }
            let w = DenseWindow::new(rows, cols, entries).map_err(|e| Error::parse("$.entries", e.to_string()))?;
            Ok(OperatorSpec::DenseWindow(w))
        }
        other => Err(Error::parse("$.kind", format!("unknown kind \"{other}\""))),
    }
}

fn scalar_value(v: Scalar) -> Value {
    if v.im == 0.0 {
        Value::from(v.re)
    } else {
        Value::Array(vec![Value::from(v.re), Value::from(v.im)])
    }
}

fn coeffs_value(c: &Coeffs) -> Value {
    Value::Object(c.iter().map(|(k, v)| (k.to_string(), scalar_value(*v))).collect())
}

/// The document form of a spec; `spec_from_value` inverts it.
pub fn spec_to_value(spec: &OperatorSpec) -> Value {
    let mut obj = Map::new();
    obj.insert("kind".into(), Value::from(spec.kind_name()));
    match spec {
        OperatorSpec::Toeplitz { coeffs } => {
            obj.insert("coeffs".into(), coeffs_value(coeffs));
        }
        OperatorSpec::Twisted { coeffs, theta } => {
            obj.insert("coeffs".into(), coeffs_value(coeffs));
            obj.insert("theta".into(), Value::from(theta.to_string()));
        }
        OperatorSpec::PeriodicModulated { coeffs, weights } => {
            obj.insert("coeffs".into(), coeffs_value(coeffs));
            obj.insert("weights".into(), weights.iter().map(|w| scalar_value(*w)).collect());
        }
        OperatorSpec::DenseWindow(w) => {
            obj.insert("points_rows".into(), w.rows().coords().iter().map(|&x| Value::from(x)).collect());
            obj.insert("points_cols".into(), w.cols().coords().iter().map(|&x| Value::from(x)).collect());
            obj.insert(
                "entries".into(),
                w.entries()
                    .map(|(i, j, v)| Value::Array(vec![Value::from(i), Value::from(j), scalar_value(v)]))
                    .collect(),
            );
        }
    }
    Value::Object(obj)
}
