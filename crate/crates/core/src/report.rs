//! Invariant reports and their deterministic serialization.
//!
//! Reports must be byte-identical for identical configurations: object keys
//! are sorted (BTreeMap) and every float is printed with 17 significant
//! digits, enough to round-trip f64 exactly. That rules out off-the-shelf
//! JSON writers with shortest-round-trip float formatting, so the writer
//! here is purpose-built.

use std::collections::BTreeMap;
use std::fmt::Write as _;

/// JSON value with deterministic rendering.
#[derive(Debug, Clone, PartialEq)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    Arr(Vec<Json>),
    Obj(BTreeMap<String, Json>),
}

impl Json {
    pub fn obj(pairs: impl IntoIterator<Item = (&'static str, Json)>) -> Json {
        Json::Obj(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out.push('\n');
        out
    }

    fn write(&self, out: &mut String, indent: usize) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(i) => {
                let _ = write!(out, "{i}");
            }
            Json::Num(v) => {
                assert!(v.is_finite(), "reports must not contain non-finite numbers");
                // 17 significant digits: exact f64 round trip
                let _ = write!(out, "{v:.16e}");
            }
            Json::Str(s) => {
                out.push('"');
                for c in s.chars() {
                    match c {
                        '"' => out.push_str("\\\""),
                        '\\' => out.push_str("\\\\"),
                        '\n' => out.push_str("\\n"),
                        '\t' => out.push_str("\\t"),
                        '\r' => out.push_str("\\r"),
                        c if (c as u32) < 0x20 => {
                            let _ = write!(out, "\\u{:04x}", c as u32);
                        }
                        c => out.push(c),
                    }
                }
                out.push('"');
            }
            Json::Arr(items) => {
                if items.is_empty() {
                    out.push_str("[]");
                    return;
                }
                out.push_str("[\n");
                for (i, item) in items.iter().enumerate() {
                    pad(out, indent + 1);
                    item.write(out, indent + 1);
                    if i + 1 < items.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                pad(out, indent);
                out.push(']');
            }
            Json::Obj(map) => {
                if map.is_empty() {
                    out.push_str("{}");
                    return;
                }
                out.push_str("{\n");
                for (i, (k, v)) in map.iter().enumerate() {
                    pad(out, indent + 1);
                    Json::Str(k.clone()).write(out, indent + 1);
                    out.push_str(": ");
                    v.write(out, indent + 1);
                    if i + 1 < map.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                pad(out, indent);
                out.push('}');
            }
        }
    }
}

fn pad(out: &mut String, indent: usize) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

/// Current report schema version.
pub const SCHEMA_VERSION: i64 = 1;

/// Metadata block describing the constants this build resolved for the
/// invariant pipeline.
pub fn resolved_constants() -> Json {
    Json::obj([
        (
            "mu_alpha_independent_constant",
            Json::Str(crate::ode::MU_ALPHA_INDEPENDENT_CONSTANT.to_string()),
        ),
        (
            "mu_alpha_sq_coefficient",
            Json::Num(crate::ode::MU_ALPHA_SQ_COEFFICIENT),
        ),
    ])
}

/// Invariant values, curvature norms, flatness verdicts and grid metadata
/// for one structure; optional blocks are emitted only when computed.
#[derive(Debug, Clone, Default)]
pub struct InvariantReport {
    pub kind: &'static str,
    pub grid: Option<crate::field::GridSpec>,
    pub mu: Option<f64>,
    pub mu_transgression: Option<f64>,
    pub max_q1: Option<f64>,
    pub max_q2: Option<f64>,
    pub kernel_residual: Option<f64>,
    pub q1_flat: Option<bool>,
    pub q2_flat: Option<bool>,
    pub flat: Option<bool>,
    pub mu_zero: Option<bool>,
    pub tolerance: Option<f64>,
    pub warnings: Option<Vec<String>>,
    pub with_constants: bool,
}

impl InvariantReport {
    pub fn to_json(&self) -> Json {
        let mut pairs: Vec<(&'static str, Json)> = vec![
            ("schema", Json::Int(SCHEMA_VERSION)),
            ("kind", Json::Str(self.kind.into())),
        ];
        if let Some(g) = self.grid {
            pairs.push((
                "grid",
                Json::obj([
                    ("na", Json::Int(g.na as i64)),
                    ("nx", Json::Int(g.nx as i64)),
                    ("ny", Json::Int(g.ny as i64)),
                ]),
            ));
        }
        if let Some(v) = self.mu {
            pairs.push(("mu", Json::Num(v)));
        }
        if let Some(v) = self.mu_transgression {
            pairs.push(("mu_transgression", Json::Num(v)));
            if let Some(mu) = self.mu {
                pairs.push(("mu_difference", Json::Num(v - mu)));
            }
        }
        if let Some(v) = self.max_q1 {
            pairs.push(("max_q1", Json::Num(v)));
        }
        if let Some(v) = self.max_q2 {
            pairs.push(("max_q2", Json::Num(v)));
        }
        if let Some(v) = self.kernel_residual {
            pairs.push(("kernel_residual", Json::Num(v)));
        }
        if let Some(v) = self.q1_flat {
            pairs.push(("q1_flat", Json::Bool(v)));
        }
        if let Some(v) = self.q2_flat {
            pairs.push(("q2_flat", Json::Bool(v)));
        }
        if let Some(v) = self.flat {
            pairs.push(("flat", Json::Bool(v)));
        }
        if let Some(v) = self.mu_zero {
            pairs.push(("mu_zero", Json::Bool(v)));
        }
        if let Some(v) = self.tolerance {
            pairs.push(("tolerance", Json::Num(v)));
        }
        if self.with_constants {
            pairs.push(("resolved_constants", resolved_constants()));
        }
        if let Some(w) = &self.warnings {
            pairs.push((
                "warnings",
                Json::Arr(w.iter().cloned().map(Json::Str).collect()),
            ));
        }
        Json::obj(pairs)
    }
}
