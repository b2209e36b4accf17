//! CSV flattening of report JSON and the no-NaN output guard.
//!
//! CSV layout: a header row of dotted field paths followed by one data row.
//! Scalar fields keep their JSON rendering; arrays are emitted as
//! semicolon-joined values; nested objects use `parent.child` paths.

use gbound_core::Error;
use serde_json::Value;

pub fn reject_non_finite(value: &Value) -> Result<(), Error> {
    match value {
        Value::Null => Ok(()),
        Value::Number(n) => {
            if n.as_f64().map_or(true, f64::is_finite) {
                Ok(())
            } else {
                Err(Error::Numerical("report contains a non-finite number".into()))
            }
        }
        Value::Array(items) => items.iter().try_for_each(reject_non_finite),
        Value::Object(map) => map.values().try_for_each(reject_non_finite),
        _ => Ok(()),
    }
}

pub fn to_csv(value: &Value) -> String {
    let mut header = Vec::new();
    let mut row = Vec::new();
    walk("", value, &mut header, &mut row);
    format!("{}\n{}", header.join(","), row.join(","))
}

fn walk(prefix: &str, value: &Value, header: &mut Vec<String>, row: &mut Vec<String>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let path = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                walk(&path, v, header, row);
            }
        }
        Value::Array(items) => {
            header.push(prefix.to_string());
            let joined: Vec<String> = items.iter().map(render_cell).collect();
            row.push(format!("\"{}\"", joined.join(";")));
        }
        other => {
            header.push(prefix.to_string());
            row.push(render_cell(other));
        }
    }
}

fn render_cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(items) => items
            .iter()
            .map(render_cell)
            .collect::<Vec<_>>()
            .join("|"),
        other => other.to_string(),
    }
}
