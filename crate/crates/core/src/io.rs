//! JSON interchange for spaces, functions and free elements.
//!
//! Scalars are written as strings (`"5/2"`, `"0.25"`); on input JSON numbers
//! are accepted as well and read through their decimal text.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::free::FreeElement;
use crate::lip::LipFunction;
use crate::metric::FiniteMetricSpace;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceJson {
    pub labels: Vec<String>,
    pub base: usize,
    pub d: Vec<Vec<Value>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionJson {
    /// Either the space hash or the space inline.
    pub space: Value,
    pub values: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementJson {
    pub weights: BTreeMap<String, Value>,
}

/// Reads a scalar from a JSON string or number.
pub fn scalar_from_value<S: Scalar>(v: &Value, location: &str) -> Result<S> {
    let text = match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        other => return Err(Error::input(location, format!("expected a scalar, found {other}"))),
    };
    S::parse_scalar(&text).map_err(|e| Error::input(location, e.to_string()))
}

pub fn scalar_to_value<S: Scalar>(s: &S) -> Value {
    Value::String(s.render())
}

fn parse_json(text: &str, what: &str) -> Result<Value> {
    serde_json::from_str(text)
        .map_err(|e| Error::input(format!("{what} line {} column {}", e.line(), e.column()), e.to_string()))
}

fn decode<T: for<'de> Deserialize<'de>>(v: Value, what: &str) -> Result<T> {
    serde_json::from_value(v).map_err(|e| Error::input(what, e.to_string()))
}

pub fn space_to_json<S: Scalar>(space: &FiniteMetricSpace<S>) -> SpaceJson {
    SpaceJson {
        labels: space.labels().to_vec(),
        base: space.base(),
        d: space
            .rows()
            .iter()
            .map(|r| r.iter().map(scalar_to_value).collect())
            .collect(),
    }
}

fn rows_from_json<S: Scalar>(sj: &SpaceJson) -> Result<Vec<Vec<S>>> {
    sj.d.iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, v)| scalar_from_value(v, &format!("d[{i}][{j}]")))
                .collect()
        })
        .collect()
}

/// Builds a space without checking the metric axioms (shapes are checked).
pub fn space_from_json_unchecked<S: Scalar>(sj: &SpaceJson) -> Result<FiniteMetricSpace<S>> {
    FiniteMetricSpace::from_raw(sj.labels.clone(), sj.base, rows_from_json(sj)?)
}

pub fn space_from_json<S: Scalar>(sj: &SpaceJson) -> Result<FiniteMetricSpace<S>> {
    FiniteMetricSpace::new(sj.labels.clone(), sj.base, rows_from_json(sj)?)
}

pub fn parse_space_json(text: &str) -> Result<SpaceJson> {
    decode(parse_json(text, "space")?, "space")
}

pub fn read_space<S: Scalar>(text: &str) -> Result<FiniteMetricSpace<S>> {
    space_from_json(&parse_space_json(text)?)
}

pub fn write_space<S: Scalar>(space: &FiniteMetricSpace<S>) -> String {
    serde_json::to_string_pretty(&space_to_json(space)).expect("space serializes")
}

/// SHA-256 of the compact canonical JSON of the space, hex encoded.
pub fn space_hash<S: Scalar>(space: &FiniteMetricSpace<S>) -> String {
    let canonical = serde_json::to_string(&space_to_json(space)).expect("space serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

pub fn function_to_json<S: Scalar>(f: &LipFunction<S>, inline_space: bool) -> FunctionJson {
    let space = if inline_space {
        serde_json::to_value(space_to_json(f.space())).expect("space serializes")
    } else {
        Value::String(space_hash(f.space()))
    };
    FunctionJson {
        space,
        values: f.values().iter().map(scalar_to_value).collect(),
    }
}

pub fn write_function<S: Scalar>(f: &LipFunction<S>, inline_space: bool) -> String {
    serde_json::to_string_pretty(&function_to_json(f, inline_space)).expect("function serializes")
}

/// Resolves the function's space against `known` (by hash) or its inline
/// definition.
pub fn read_function<S: Scalar>(text: &str, known: Option<&Arc<FiniteMetricSpace<S>>>) -> Result<LipFunction<S>> {
    let fj: FunctionJson = decode(parse_json(text, "function")?, "function")?;
    let space = match (&fj.space, known) {
        (Value::String(h), Some(s)) => {
            let actual = space_hash(s);
            if *h != actual {
                return Err(Error::input(
                    "function.space",
                    format!("hash {h} does not match the space {actual}"),
                ));
            }
            s.clone()
        }
        (Value::String(_), None) => {
            return Err(Error::input(
                "function.space",
                "space given by hash but no space supplied",
            ));
        }
        (inline, known) => {
            let sj: SpaceJson = decode(inline.clone(), "function.space")?;
            let s = Arc::new(space_from_json::<S>(&sj)?);
            if let Some(k) = known {
                if **k != *s {
                    return Err(Error::input(
                        "function.space",
                        "inline space differs from the supplied space",
                    ));
                }
            }
            s
        }
    };
    let values = fj
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| scalar_from_value(v, &format!("values[{i}]")))
        .collect::<Result<Vec<S>>>()?;
    LipFunction::new(space, values)
}

pub fn element_to_json<S: Scalar>(mu: &FreeElement<S>) -> ElementJson {
    ElementJson {
        weights: mu
            .weights()
            .iter()
            .map(|(&p, w)| (mu.space().label(p).to_string(), scalar_to_value(w)))
            .collect(),
    }
}

pub fn write_element<S: Scalar>(mu: &FreeElement<S>) -> String {
    serde_json::to_string_pretty(&element_to_json(mu)).expect("element serializes")
}

pub fn read_element<S: Scalar>(text: &str, space: &Arc<FiniteMetricSpace<S>>) -> Result<FreeElement<S>> {
    let ej: ElementJson = decode(parse_json(text, "element")?, "element")?;
    let mut weights = Vec::with_capacity(ej.weights.len());
    for (label, v) in &ej.weights {
        let loc = format!("weights.{label}");
        let p = space
            .index_of(label)
            .ok_or_else(|| Error::input(&loc, format!("unknown point label {label:?}")))?;
        weights.push((p, scalar_from_value(v, &loc)?));
    }
    FreeElement::from_weights(space.clone(), weights)
}

/// Partial assignment `{"values": {"label": "scalar", ...}}`.
pub fn read_partial<S: Scalar>(text: &str, space: &FiniteMetricSpace<S>) -> Result<(Vec<usize>, Vec<S>)> {
    #[derive(Deserialize)]
    struct Partial {
        values: BTreeMap<String, Value>,
    }
    let pj: Partial = decode(parse_json(text, "partial")?, "partial")?;
    let mut pairs = Vec::new();
    for (label, v) in &pj.values {
        let loc = format!("values.{label}");
        let p = space
            .index_of(label)
            .ok_or_else(|| Error::input(&loc, format!("unknown point label {label:?}")))?;
        pairs.push((p, scalar_from_value::<S>(v, &loc)?));
    }
    pairs.sort_by_key(|(p, _)| *p);
    Ok(pairs.into_iter().unzip())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::build_example1_space;
    use crate::scalar::{Float, Rational};

    #[test]
    fn space_round_trip() {
        let s = build_example1_space::<Rational>(4).unwrap();
        let text = write_space(&s);
        assert!(text.contains("\"5/2\""));
        let back: FiniteMetricSpace<Rational> = read_space(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(space_hash(&back), space_hash(&s));
    }

    #[test]
    fn numbers_and_decimals_accepted() {
        let text = r#"{"labels":["a","b"],"base":0,"d":[[0,"0.5"],["1/2",0]]}"#;
        let s: FiniteMetricSpace<Rational> = read_space(text).unwrap();
        assert_eq!(*s.dist(0, 1), Rational::from_ratio(1, 2));
        let f: FiniteMetricSpace<Float> = read_space(text).unwrap();
        assert_eq!(f.dist(0, 1).0, 0.5);
    }

    #[test]
    fn errors_carry_location() {
        let text = r#"{"labels":["a","b"],"base":0,"d":[[0,"x"],["1/2",0]]}"#;
        match read_space::<Rational>(text) {
            Err(Error::Input { location, .. }) => assert_eq!(location, "d[0][1]"),
            other => panic!("unexpected {other:?}"),
        }
        match read_space::<Rational>("{\"labels\": [") {
            Err(Error::Input { location, .. }) => assert!(location.starts_with("space line 1")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn function_and_element_round_trip() {
        let s = Arc::new(build_example1_space::<Rational>(3).unwrap());
        let f = LipFunction::distance_to_base(s.clone());
        let by_hash = read_function(&write_function(&f, false), Some(&s)).unwrap();
        assert_eq!(by_hash, f);
        let inline = read_function::<Rational>(&write_function(&f, true), None).unwrap();
        assert_eq!(inline, f);
        let mu = FreeElement::molecule(s.clone(), 1, 2);
        let text = write_element(&mu);
        assert_eq!(read_element(&text, &s).unwrap(), mu);
    }
}
