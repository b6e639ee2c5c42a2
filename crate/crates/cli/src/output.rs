//! Deterministic JSON output, digests and experiment manifests.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

/// Serializes with sorted keys and every float at 17 significant digits.
pub fn to_canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, 0, &mut out);
    out.push('\n');
    out
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_i64() || n.is_u64() {
                let _ = write!(out, "{n}");
            } else {
                let _ = write!(out, "{:.16e}", n.as_f64().unwrap_or(f64::NAN));
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(item, indent + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_value(&map[*k], indent + 1, out);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Record of one run. The digest covers everything except the thread count
/// and the wall-clock time, which do not affect results.
#[derive(Clone, Debug)]
pub struct Manifest {
    pub command: String,
    pub seed: u64,
    pub precision_bits: Option<u64>,
    pub parameters: Value,
    pub input_digests: Value,
    pub outputs: Vec<String>,
    pub threads: usize,
}

impl Manifest {
    fn digest_body(&self) -> Value {
        json!({
            "command": self.command,
            "tool_version": env!("CARGO_PKG_VERSION"),
            "seed": self.seed,
            "precision_bits": self.precision_bits,
            "parameters": self.parameters,
            "input_digests": self.input_digests,
            "outputs": self.outputs,
        })
    }

    pub fn digest(&self) -> String {
        sha256_hex(to_canonical_json(&self.digest_body()).as_bytes())
    }

    pub fn to_json(&self, wall_clock_secs: f64) -> Value {
        let mut v = self.digest_body();
        let map = v.as_object_mut().expect("object");
        map.insert("digest".into(), Value::String(self.digest()));
        map.insert("threads".into(), json!(self.threads));
        map.insert("wall_clock_secs".into(), json!(wall_clock_secs));
        v
    }
}

/// Wraps a report with the manifest digest.
pub fn with_digest(digest: &str, report: Value) -> Value {
    json!({ "manifest_digest": digest, "report": report })
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_17_digits_and_keys_are_sorted() {
        let s = to_canonical_json(&json!({"b": 0.1, "a": [1, 2.5]}));
        assert_eq!(s, "{\n  \"a\": [\n    1,\n    2.5000000000000000e0\n  ],\n  \"b\": 1.0000000000000001e-1\n}\n");
    }

    #[test]
    fn digest_ignores_wall_clock_and_threads() {
        let mut m = Manifest {
            command: "kdim".into(),
            seed: 1,
            precision_bits: None,
            parameters: json!({"x": 1}),
            input_digests: json!({}),
            outputs: vec!["a.json".into()],
            threads: 1,
        };
        let d = m.digest();
        m.threads = 8;
        assert_eq!(m.digest(), d);
        assert_eq!(m.to_json(1.0)["digest"], m.to_json(2.0)["digest"]);
        m.seed = 2;
        assert_ne!(m.digest(), d);
    }
}
