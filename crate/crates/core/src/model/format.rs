//! JSON instance files.
//!
//! ```json
//! {"version": 1, "n": 2, "k": 2, "groups": [[0, 1]],
//!  "valuation": {"type": "binary_symmetric", "tables": [["0","0","10"], ["1","1","1"]]}}
//! ```
//!
//! Keyed tables use `"3,2"` for quality vectors and `"2,0,1|0,1,0"` for
//! histograms. An optional `"name"` labels the instance in reports.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::money::{format_money, parse_money, Money};

use super::{validate_instance, Histogram, Instance, QualityVector, ValuationModel};

pub fn quality_key(q: &QualityVector) -> String {
    q.0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

pub fn histogram_key(h: &Histogram) -> String {
    h.0.iter()
        .map(|g| g.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join("|")
}

fn parse_counts(text: &str) -> Result<Vec<u32>> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<u32>()
                .map_err(|_| Error::InvalidInput(format!("bad table key {text:?}")))
        })
        .collect()
}

fn parse_quality_key(text: &str) -> Result<QualityVector> {
    parse_counts(text).map(QualityVector)
}

fn parse_histogram_key(text: &str) -> Result<Histogram> {
    text.split('|')
        .map(parse_counts)
        .collect::<Result<Vec<_>>>()
        .map(Histogram)
}

fn bad(what: impl Into<String>) -> Error {
    Error::InvalidInput(what.into())
}

fn money_of(v: &Value, at: &str) -> Result<Money> {
    match v {
        Value::String(s) => parse_money(s),
        Value::Number(n) => parse_money(&n.to_string()),
        _ => Err(bad(format!("{at}: expected a decimal string"))),
    }
}

fn uint(obj: &Map<String, Value>, key: &str) -> Result<u64> {
    obj.get(key)
        .ok_or_else(|| bad(format!("missing field {key:?}")))?
        .as_u64()
        .ok_or_else(|| bad(format!("field {key:?} must be a non-negative integer")))
}

fn dense_tables(tables: &[Value]) -> Result<Vec<Vec<Money>>> {
    tables
        .iter()
        .enumerate()
        .map(|(b, t)| {
            t.as_array()
                .ok_or_else(|| bad(format!("tables[{b}] must be an array")))?
                .iter()
                .enumerate()
                .map(|(q, v)| money_of(v, &format!("tables[{b}][{q}]")))
                .collect()
        })
        .collect()
}

fn keyed_tables<K: Ord>(
    tables: &[Value],
    key: impl Fn(&str) -> Result<K>,
) -> Result<Vec<BTreeMap<K, Money>>> {
    tables
        .iter()
        .enumerate()
        .map(|(b, t)| {
            t.as_object()
                .ok_or_else(|| bad(format!("tables[{b}] must be an object")))?
                .iter()
                .map(|(k, v)| Ok((key(k)?, money_of(v, &format!("tables[{b}][{k:?}]"))?)))
                .collect()
        })
        .collect()
}

/// Parses and validates an instance file.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let root: Value = serde_json::from_str(text).map_err(|e| Error::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let obj = root
        .as_object()
        .ok_or_else(|| bad("instance file must hold a JSON object"))?;
    for key in obj.keys() {
        if !matches!(
            key.as_str(),
            "version" | "name" | "n" | "k" | "groups" | "valuation"
        ) {
            return Err(bad(format!("unknown field {key:?}")));
        }
    }
    let version = uint(obj, "version")?;
    if version != 1 {
        return Err(bad(format!("unsupported version {version}")));
    }
    let n = uint(obj, "n")? as usize;
    let k = u32::try_from(uint(obj, "k")?).map_err(|_| bad("k out of range"))?;
    let groups = obj
        .get("groups")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("field \"groups\" must be an array of arrays"))?
        .iter()
        .map(|g| {
            g.as_array()
                .ok_or_else(|| bad("each group must be an array of bidder ids"))?
                .iter()
                .map(|b| {
                    b.as_u64()
                        .map(|b| b as usize)
                        .ok_or_else(|| bad("bidder ids must be non-negative integers"))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let val = obj
        .get("valuation")
        .and_then(Value::as_object)
        .ok_or_else(|| bad("field \"valuation\" must be an object"))?;
    let kind = val
        .get("type")
        .and_then(Value::as_str)
        .ok_or_else(|| bad("valuation.type must be a string"))?;
    let tables = val
        .get("tables")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("valuation.tables must be an array"))?;
    let valuation = match kind {
        "binary_symmetric" => ValuationModel::BinarySymmetric {
            tables: dense_tables(tables)?,
        },
        "shared_quality" => ValuationModel::SharedQuality {
            tables: dense_tables(tables)?,
        },
        "shared_quality_grouped" => ValuationModel::SharedQualityGrouped {
            tables: keyed_tables(tables, parse_quality_key)?,
        },
        "general_symmetric" => ValuationModel::GeneralSymmetric {
            tables: keyed_tables(tables, parse_histogram_key)?,
        },
        other => return Err(bad(format!("unknown valuation type {other:?}"))),
    };
    let mut inst = Instance::unchecked(n, k, groups, valuation);
    if let Some(name) = obj.get("name") {
        let name = name.as_str().ok_or_else(|| bad("field \"name\" must be a string"))?;
        inst = inst.with_name(name);
    }
    let violations = validate_instance(&inst);
    if violations.is_empty() {
        Ok(inst)
    } else {
        Err(Error::InvalidInstance(violations))
    }
}

/// Pretty-printed JSON; `parse_instance` inverts it.
pub fn serialize_instance(inst: &Instance) -> String {
    let money = |v: &Money| Value::String(format_money(v));
    let tables: Vec<Value> = match inst.valuation() {
        ValuationModel::BinarySymmetric { tables } | ValuationModel::SharedQuality { tables } => {
            tables
                .iter()
                .map(|t| Value::Array(t.iter().map(money).collect()))
                .collect()
        }
        ValuationModel::SharedQualityGrouped { tables } => tables
            .iter()
            .map(|t| Value::Object(t.iter().map(|(q, v)| (quality_key(q), money(v))).collect()))
            .collect(),
        ValuationModel::GeneralSymmetric { tables } => tables
            .iter()
            .map(|t| {
                Value::Object(t.iter().map(|(h, v)| (histogram_key(h), money(v))).collect())
            })
            .collect(),
    };
    let mut root = Map::new();
    root.insert("version".into(), json!(1));
    if let Some(name) = inst.name() {
        root.insert("name".into(), json!(name));
    }
    root.insert("n".into(), json!(inst.n()));
    root.insert("k".into(), json!(inst.k()));
    root.insert("groups".into(), json!(inst.groups()));
    root.insert(
        "valuation".into(),
        json!({ "type": inst.valuation().type_name(), "tables": tables }),
    );
    let mut out = serde_json::to_string_pretty(&Value::Object(root)).expect("json");
    out.push('\n');
    out
}
