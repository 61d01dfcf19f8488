//! Report rendering. JSON mode emits the report verbatim; text mode walks
//! the same body into indented key/value lines. Both are pure functions of
//! the report, byte for byte.

use serde_json::{json, Value};

use crate::run::RunReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

pub fn render(report: &RunReport, format: Format) -> String {
    match format {
        Format::Json => {
            let v = json!({
                "command": report.command,
                "passed": report.passed,
                "config": report.config,
                "body": report.body,
            });
            let mut s = serde_json::to_string_pretty(&v).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut out = String::new();
            out.push_str(&format!("command: {}\n", report.command));
            out.push_str(&format!("passed: {}\n", report.passed));
            out.push_str("config:\n");
            write_value(&mut out, &report.config, 1);
            write_value(&mut out, &report.body, 0);
            out
        }
    }
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn is_scalar(v: &Value) -> bool {
    matches!(
        v,
        Value::Null | Value::Bool(_) | Value::Number(_) | Value::String(_)
    )
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn write_value(out: &mut String, v: &Value, depth: usize) {
    match v {
        Value::Object(map) => {
            for (k, val) in map {
                if is_scalar(val) {
                    indent(out, depth);
                    out.push_str(&format!("{k}: {}\n", scalar_text(val)));
                } else if val.as_array().map(|a| a.iter().all(is_scalar)) == Some(true) {
                    indent(out, depth);
                    out.push_str(&format!("{k}: {}\n", inline_array(val)));
                } else {
                    indent(out, depth);
                    out.push_str(&format!("{k}:\n"));
                    write_value(out, val, depth + 1);
                }
            }
        }
        Value::Array(items) => {
            for item in items {
                if is_scalar(item) {
                    indent(out, depth);
                    out.push_str(&format!("- {}\n", scalar_text(item)));
                } else if item.as_array().map(|a| a.iter().all(is_scalar)) == Some(true) {
                    indent(out, depth);
                    out.push_str(&format!("- {}\n", inline_array(item)));
                } else {
                    indent(out, depth);
                    out.push_str("-\n");
                    write_value(out, item, depth + 1);
                }
            }
        }
        scalar => {
            indent(out, depth);
            out.push_str(&scalar_text(scalar));
            out.push('\n');
        }
    }
}

fn inline_array(v: &Value) -> String {
    let items: Vec<String> = v
        .as_array()
        .expect("inline_array called on array")
        .iter()
        .map(scalar_text)
        .collect();
    format!("[{}]", items.join(", "))
}
