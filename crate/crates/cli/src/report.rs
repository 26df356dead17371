//! Canonical JSON: keys sorted, floats with 12 significant digits, and a
//! SHA-256 of everything except the `timing` section.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub const TIMING_KEY: &str = "timing";
pub const HASH_KEY: &str = "canonical_hash";

fn write_value(out: &mut String, v: &Value) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                match n.as_f64() {
                    Some(f) if f.is_finite() => write!(out, "{f:.11e}").unwrap(),
                    _ => out.push_str("null"),
                }
            } else {
                write!(out, "{n}").unwrap();
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string")),
        Value::Array(a) => {
            out.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(out, x);
            }
            out.push(']');
        }
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).expect("key"));
                out.push(':');
                write_value(out, &m[k]);
            }
            out.push('}');
        }
    }
}

pub fn canonical_json(v: &Value) -> String {
    let mut s = String::new();
    write_value(&mut s, v);
    s
}

/// SHA-256 (hex) of the canonical JSON with the timing and hash keys removed.
pub fn canonical_hash(v: &Value) -> String {
    let mut v = v.clone();
    if let Value::Object(m) = &mut v {
        m.remove(TIMING_KEY);
        m.remove(HASH_KEY);
    }
    hex::encode(Sha256::digest(canonical_json(&v).as_bytes()))
}

/// The canonical JSON of `report` with its hash inserted.
pub fn render<T: Serialize>(report: &T) -> anyhow::Result<String> {
    let mut v = serde_json::to_value(report)?;
    let h = canonical_hash(&v);
    if let Value::Object(m) = &mut v {
        m.insert(HASH_KEY.into(), Value::String(h));
    }
    Ok(canonical_json(&v) + "\n")
}

/// Writes the report atomically.
pub fn emit_report<T: Serialize>(report: &T, path: &Path) -> anyhow::Result<()> {
    let text = render(report)?;
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    std::io::Write::write_all(&mut tmp, text.as_bytes())?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn sorted_keys_and_fixed_floats() {
        let v = json!({"b": 1.0, "a": [0.1, 2, null], "c": {"z": true, "y": "s"}});
        assert_eq!(canonical_json(&v), r#"{"a":[1.00000000000e-1,2,null],"b":1.00000000000e0,"c":{"y":"s","z":true}}"#);
        let back: Value = serde_json::from_str(&canonical_json(&v)).unwrap();
        assert_eq!(back["a"][0].as_f64(), Some(0.1));
    }

    #[test]
    fn hash_ignores_timing() {
        let a = json!({"x": 1, "timing": {"total_ms": 3.0}});
        let b = json!({"x": 1, "timing": {"total_ms": 7.5}});
        let c = json!({"x": 2, "timing": {"total_ms": 3.0}});
        assert_eq!(canonical_hash(&a), canonical_hash(&b));
        assert_ne!(canonical_hash(&a), canonical_hash(&c));
        let r = render(&a).unwrap();
        let parsed: Value = serde_json::from_str(&r).unwrap();
        assert_eq!(parsed[HASH_KEY].as_str().unwrap(), canonical_hash(&a));
    }
}
