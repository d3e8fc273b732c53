//! Canonical JSON result documents.
//!
//! Every run writes one JSON document with alphabetically sorted keys and
//! reals printed with 17 significant digits, so documents round-trip to the
//! bit: parsing a document and re-serializing it reproduces the file
//! byte-for-byte. The volatile `timing_ms` field is the only part expected
//! to differ between repeated runs.

use std::fmt::Write as _;

/// JSON value with deterministic serialization.
#[derive(Debug, Clone, PartialEq)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    Array(Vec<Json>),
    Object(Vec<(String, Json)>),
}

impl Json {
    pub fn object(fields: Vec<(&str, Json)>) -> Json {
        Json::Object(fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }

    pub fn float_array(values: &[f64]) -> Json {
        Json::Array(
            values
                .iter()
                .map(|&v| {
                    if v.is_finite() {
                        Json::Float(v)
                    } else {
                        Json::Null
                    }
                })
                .collect(),
        )
    }

    /// Pretty canonical form: sorted keys, two-space indent, 17-digit reals,
    /// trailing newline.
    pub fn to_canonical_string(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out.push('\n');
        out
    }

    fn write(&self, out: &mut String, indent: usize) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => {
                let _ = write!(out, "{b}");
            }
            Json::Int(i) => {
                let _ = write!(out, "{i}");
            }
            Json::Float(v) => {
                let _ = write!(out, "{}", format_real(*v));
            }
            Json::Str(s) => write_escaped(out, s),
            Json::Array(items) => {
                if items.is_empty() {
                    out.push_str("[]");
                    return;
                }
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push('\n');
                    push_indent(out, indent + 1);
                    item.write(out, indent + 1);
                }
                out.push('\n');
                push_indent(out, indent);
                out.push(']');
            }
            Json::Object(fields) => {
                if fields.is_empty() {
                    out.push_str("{}");
                    return;
                }
                let mut sorted: Vec<&(String, Json)> = fields.iter().collect();
                sorted.sort_by(|a, b| a.0.cmp(&b.0));
                out.push('{');
                for (i, (key, value)) in sorted.into_iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push('\n');
                    push_indent(out, indent + 1);
                    write_escaped(out, key);
                    out.push_str(": ");
                    value.write(out, indent + 1);
                }
                out.push('\n');
                push_indent(out, indent);
                out.push('}');
            }
        }
    }
}

/// 17 significant digits; round-trips through f64 parsing exactly.
fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn push_indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn write_escaped(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

/// Rebuilds the canonical value from parsed JSON (used by the round-trip
/// checks and by consumers re-emitting documents).
pub fn from_serde(value: &serde_json::Value) -> Json {
    match value {
        serde_json::Value::Null => Json::Null,
        serde_json::Value::Bool(b) => Json::Bool(*b),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                if !n.to_string().contains(['.', 'e', 'E']) {
                    return Json::Int(i);
                }
            }
            Json::Float(n.as_f64().unwrap_or(f64::NAN))
        }
        serde_json::Value::String(s) => Json::Str(s.clone()),
        serde_json::Value::Array(items) => Json::Array(items.iter().map(from_serde).collect()),
        serde_json::Value::Object(map) => Json::Object(
            map.iter()
                .map(|(k, v)| (k.clone(), from_serde(v)))
                .collect(),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_are_sorted_and_reals_have_17_digits() {
        let doc = Json::object(vec![
            ("zeta", Json::Int(1)),
            ("alpha", Json::Float(0.1)),
        ]);
        let s = doc.to_canonical_string();
        let a = s.find("alpha").unwrap();
        let z = s.find("zeta").unwrap();
        assert!(a < z);
        assert!(s.contains("1.0000000000000001e-1"));
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let doc = Json::object(vec![
            ("values", Json::float_array(&[0.1, -2.5e-300, 3.0, f64::NAN])),
            ("name", Json::Str("band \"x\"".into())),
            ("count", Json::Int(42)),
            ("nested", Json::object(vec![("b", Json::Bool(true)), ("a", Json::Null)])),
        ]);
        let first = doc.to_canonical_string();
        let parsed: serde_json::Value = serde_json::from_str(&first).unwrap();
        let second = from_serde(&parsed).to_canonical_string();
        assert_eq!(first, second);
    }
}
