//! Result envelope: the single structured output of every subcommand.
//!
//! Serialization is deterministic: struct fields emit in declaration order,
//! and every embedded map is ordered, so identical configuration and seed
//! produce byte-identical envelopes apart from `wall_time_ms`.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;

pub const SCHEMA: &str = "quatpot-envelope/1";

/// One named check: `pass`/`fail` carry a verdict, `value` is informational.
#[derive(Serialize)]
pub struct Check {
    pub name: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn pass_fail(name: &str, ok: bool, value: Option<f64>, detail: Option<String>) -> Self {
        Check {
            name: name.into(),
            status: if ok { "pass" } else { "fail" }.into(),
            value,
            detail,
        }
    }

    pub fn value(name: &str, value: f64) -> Self {
        Check {
            name: name.into(),
            status: "value".into(),
            value: Some(value),
            detail: None,
        }
    }
}

#[derive(Serialize)]
pub struct Envelope {
    pub schema: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub data: Value,
    pub wall_time_ms: f64,
}

impl Envelope {
    pub fn new(
        command: String,
        config: BTreeMap<String, Value>,
        checks: Vec<Check>,
        data: Value,
        elapsed: Duration,
    ) -> Self {
        Envelope {
            schema: SCHEMA,
            version: quatpot::VERSION,
            command,
            config,
            checks,
            data,
            wall_time_ms: elapsed.as_secs_f64() * 1e3,
        }
    }

    /// Prints the envelope to stdout and mirrors it to `out` when given.
    pub fn emit(&self, out: Option<&Path>) -> std::io::Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("envelope serializes");
        text.push('\n');
        print!("{text}");
        if let Some(path) = out {
            std::fs::write(path, &text)?;
        }
        Ok(())
    }
}
