//! Output envelope helpers: stable JSON, 12-significant-digit floats, and
//! RFC-4180 CSV.

use serde_json::{json, Value};

/// Rounds to 12 significant digits by a decimal round trip, so the JSON
/// representation is identical across runs and platforms.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("scientific notation roundtrip")
}

/// The envelope every command prints: `command`, `params`, `results`, and
/// `seed` (only for stochastic commands). serde_json orders keys
/// alphabetically, which conveniently matches this layout and keeps output
/// byte-stable.
pub fn envelope(command: &str, params: Value, results: Value, seed: Option<u64>) -> String {
    let mut body = json!({
        "command": command,
        "params": params,
        "results": results,
    });
    if let Some(seed) = seed {
        body["seed"] = json!(seed);
    }
    let mut out = body.to_string();
    out.push('\n');
    out
}

/// Machine-readable error object emitted on stdout for resource-bound
/// failures (exit code 2).
pub fn error_object(kind: &str, message: &str) -> String {
    let mut out = json!({
        "error": { "kind": kind, "message": message },
    })
    .to_string();
    out.push('\n');
    out
}

/// RFC-4180 field quoting: quote when the field holds a comma, quote, or
/// line break; double embedded quotes.
pub fn csv_field(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_owned()
    }
}

pub fn csv_line(fields: &[String]) -> String {
    fields
        .iter()
        .map(|f| csv_field(f))
        .collect::<Vec<_>>()
        .join(",")
}

/// Fixed-precision float field for CSV output.
pub fn csv_float(x: f64) -> String {
    format!("{}", sig12(x))
}
