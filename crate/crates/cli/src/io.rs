//! Input documents: spaces, cochains, generator specs and rationals.

use std::fs;
use std::path::Path;

use packcoh::generators;
use packcoh::rational;
use packcoh::{Cochain, FiniteMetricSpace, Rational, SimplicialComplex};
use serde::Deserialize;
use serde_json::Value;

use crate::CliError;

/// A rational written either as a JSON integer or as a `"p/q"` / decimal string.
pub fn rational_from_json(v: &Value) -> Result<Rational, CliError> {
    match v {
        Value::Number(n) => match n.as_i64() {
            Some(i) => Ok(rational::int(i)),
            None => Err(CliError::Input(format!("{n} is not an integer; write fractions as \"p/q\" strings"))),
        },
        Value::String(s) => parse_rational(s),
        other => Err(CliError::Input(format!("expected a rational, found {other}"))),
    }
}

pub fn parse_rational(s: &str) -> Result<Rational, CliError> {
    rational::parse(s).map_err(|e| CliError::Input(format!("bad rational {s:?}: {e}")))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceDoc {
    #[serde(default)]
    points: Option<usize>,
    #[serde(default)]
    dist: Option<Vec<Vec<Value>>>,
    #[serde(default)]
    edges: Option<Vec<(usize, usize, Value)>>,
    #[serde(default)]
    labels: Option<Vec<String>>,
}

/// A space given either as a distance table or as a weighted graph.
pub fn space_from_json(v: &Value) -> Result<FiniteMetricSpace, CliError> {
    let doc: SpaceDoc = serde_json::from_value(v.clone()).map_err(|e| CliError::Input(format!("space document: {e}")))?;
    match (doc.dist, doc.edges) {
        (Some(rows), None) => {
            let table = rows
                .iter()
                .map(|r| r.iter().map(rational_from_json).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(n) = doc.points {
                if n != table.len() {
                    return Err(CliError::Input(format!("points = {n} but the table has {} rows", table.len())));
                }
            }
            Ok(FiniteMetricSpace::new(table, doc.labels)?)
        }
        (None, Some(edges)) => {
            let n = doc.points.ok_or_else(|| CliError::Input("an edge list needs \"points\"".into()))?;
            let edges = edges
                .iter()
                .map(|(a, b, w)| Ok((*a, *b, rational_from_json(w)?)))
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(FiniteMetricSpace::from_weighted_edges(n, &edges, doc.labels)?)
        }
        _ => Err(CliError::Input("a space needs exactly one of \"dist\" or \"edges\"".into())),
    }
}

pub fn space_to_json(space: &FiniteMetricSpace) -> Value {
    let dist: Vec<Vec<Value>> = space.table().iter().map(|r| r.iter().map(rational_json).collect()).collect();
    let mut doc = serde_json::json!({ "points": space.len(), "dist": dist });
    if let Some(labels) = space.labels() {
        doc["labels"] = serde_json::json!(labels);
    }
    doc
}

/// Exact rationals as `"p/q"` strings (integers without a denominator).
pub fn rational_json(q: &Rational) -> Value {
    Value::String(rational::format(q))
}

fn numbers(text: &str, what: &str) -> Result<Vec<usize>, CliError> {
    text.split(['x', ','])
        .map(|t| t.trim().parse::<usize>().map_err(|_| CliError::Input(format!("bad {what} parameter {t:?}"))))
        .collect()
}

fn exactly<const N: usize>(v: Vec<usize>, kind: &str) -> Result<[usize; N], CliError> {
    v.try_into().map_err(|_| CliError::Input(format!("{kind} takes {N} parameter(s)")))
}

/// `path:9`, `cycle:12`, `grid:4x4`, `tree:2x3` (branching × depth),
/// `annulus:12x2`, `cayley:5x5/1,0;0,1` (orders / generators).
pub fn generate(spec: &str) -> Result<FiniteMetricSpace, CliError> {
    let (kind, params) = spec.split_once(':').ok_or_else(|| CliError::Input(format!("generator {spec:?} is not KIND:PARAMS")))?;
    let space = match kind {
        "path" => {
            let [n] = exactly(numbers(params, kind)?, kind)?;
            generators::path(n)?
        }
        "cycle" => {
            let [n] = exactly(numbers(params, kind)?, kind)?;
            generators::cycle(n)?
        }
        "grid" => {
            let [r, c] = exactly(numbers(params, kind)?, kind)?;
            generators::grid(r, c)?
        }
        "tree" => {
            let [b, d] = exactly(numbers(params, kind)?, kind)?;
            generators::tree(b, d)?
        }
        "annulus" => {
            let [n, w] = exactly(numbers(params, kind)?, kind)?;
            generators::annulus(n, w)?
        }
        "cayley" => {
            let (orders, gens) =
                params.split_once('/').ok_or_else(|| CliError::Input("cayley takes ORDERS/GENERATORS, e.g. 5x5/1,0;0,1".into()))?;
            let orders = numbers(orders, kind)?;
            let gens = gens
                .split(';')
                .map(|g| {
                    g.split(',')
                        .map(|t| t.trim().parse::<i64>().map_err(|_| CliError::Input(format!("bad generator entry {t:?}"))))
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            generators::cayley(&orders, &gens)?
        }
        other => return Err(CliError::Input(format!("unknown generator kind {other:?}"))),
    };
    Ok(space)
}

pub fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// A space operand: a generator spec string, `{"generate": spec}`, `{"file": path}`, or an inline document.
pub fn space_operand(v: &Value, base: &Path) -> Result<FiniteMetricSpace, CliError> {
    match v {
        Value::String(spec) => generate(spec),
        Value::Object(map) if map.contains_key("generate") => match &map["generate"] {
            Value::String(spec) => generate(spec),
            _ => Err(CliError::Input("\"generate\" must be a string".into())),
        },
        Value::Object(map) if map.contains_key("file") => match &map["file"] {
            Value::String(p) => space_from_json(&read_json(&base.join(p))?),
            _ => Err(CliError::Input("\"file\" must be a string".into())),
        },
        other => space_from_json(other),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Entry {
    simplex: Vec<usize>,
    value: Value,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CochainDoc {
    degree: usize,
    #[serde(default)]
    entries: Option<Vec<Entry>>,
    #[serde(default)]
    values: Option<Vec<Value>>,
}

/// `{"degree": k, "entries": [{"simplex": [..], "value": ..}]}` (unlisted simplices are 0)
/// or `{"degree": k, "values": [..]}` in the complex's storage order.
pub fn cochain_from_json(host: &SimplicialComplex, v: &Value) -> Result<Cochain, CliError> {
    let doc: CochainDoc = serde_json::from_value(v.clone()).map_err(|e| CliError::Input(format!("cochain document: {e}")))?;
    match (doc.entries, doc.values) {
        (Some(entries), None) => {
            let pairs = entries
                .iter()
                .map(|e| Ok((e.simplex.clone(), rational_from_json(&e.value)?)))
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(Cochain::from_entries(host, doc.degree, &pairs)?)
        }
        (None, Some(values)) => {
            let vals = values.iter().map(rational_from_json).collect::<Result<Vec<_>, _>>()?;
            Ok(Cochain::new(host, doc.degree, vals)?)
        }
        _ => Err(CliError::Input("a cochain needs exactly one of \"entries\" or \"values\"".into())),
    }
}

/// Nonzero entries of a cochain, in storage order.
pub fn cochain_to_json(host: &SimplicialComplex, c: &Cochain) -> Value {
    let entries: Vec<Value> = host
        .simplices(c.degree())
        .iter()
        .zip(c.values())
        .filter(|(_, v)| **v != rational::int(0))
        .map(|(s, v)| serde_json::json!({ "simplex": s, "value": rational_json(v) }))
        .collect();
    serde_json::json!({ "degree": c.degree(), "entries": entries })
}
