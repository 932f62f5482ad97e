//! Entrywise comparison of two reports. Expansion strings are compared as
//! elements of `K` up to the smaller of their stated precisions; everything
//! else must match exactly.

use std::sync::Arc;

use serde_json::Value;

use super::expansion::expansions_agree;
use super::job::JobSpec;
use crate::error::{HkError, Result};
use crate::padic::FieldDescriptor;

/// Splits `coefficient · label` class terms; bare expansions have no label.
fn split_expansion(s: &str) -> Option<(&str, &str)> {
    let (coef, label) = s.split_once(" · ").unwrap_or((s, ""));
    coef.contains("O(π").then_some((coef, label))
}

fn walk(path: &str, a: &Value, b: &Value, field: &Arc<FieldDescriptor>, tol: Option<i64>, out: &mut Vec<String>) -> Result<()> {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            let mut keys: Vec<&String> = x.keys().chain(y.keys()).collect();
            keys.sort();
            keys.dedup();
            for k in keys {
                let sub = format!("{path}.{k}");
                match (x.get(k), y.get(k)) {
                    (Some(u), Some(v)) => walk(&sub, u, v, field, tol, out)?,
                    _ => out.push(format!("{sub}: present on one side only")),
                }
            }
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                out.push(format!("{path}: lengths {} and {}", x.len(), y.len()));
                return Ok(());
            }
            for (i, (u, v)) in x.iter().zip(y).enumerate() {
                walk(&format!("{path}[{i}]"), u, v, field, tol, out)?;
            }
        }
        (Value::String(x), Value::String(y)) if split_expansion(x).is_some() && split_expansion(y).is_some() => {
            let ((cx, lx), (cy, ly)) = (split_expansion(x).unwrap(), split_expansion(y).unwrap());
            if lx != ly || !expansions_agree(cx, cy, field, tol.map(|t| t * field.e() as i64))? {
                out.push(format!("{path}: {x} vs {y}"));
            }
        }
        _ => {
            if a != b {
                out.push(format!("{path}: {a} vs {b}"));
            }
        }
    }
    Ok(())
}

/// Differences between two serialized reports, empty when they agree.
/// `tol` caps the compared `p`-adic digits.
pub fn report_diff(a: &str, b: &str, tol: Option<i64>) -> Result<Vec<String>> {
    let va: Value = serde_json::from_str(a).map_err(|e| HkError::Parse(e.to_string()))?;
    let vb: Value = serde_json::from_str(b).map_err(|e| HkError::Parse(e.to_string()))?;
    let spec: JobSpec =
        serde_json::from_value(va.get("spec").cloned().unwrap_or(Value::Null)).map_err(|e| HkError::Parse(e.to_string()))?;
    let field = spec.field()?;
    let mut out = Vec::new();
    walk("", &va, &vb, &field, tol, &mut out)?;
    Ok(out)
}
