use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde_json::Value;

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// A command result in every output format.
pub struct Output {
    json: Value,
    csv: String,
}

impl Output {
    pub fn new(json: Value, csv: String) -> Self {
        Self { json, csv }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("values serialize");
                s.push('\n');
                s
            }
            Format::Csv => self.csv.clone(),
            Format::Text => {
                let mut lines = Vec::new();
                flatten("", &self.json, &mut lines);
                let mut s = lines.join("\n");
                s.push('\n');
                s
            }
        }
    }

    pub fn emit(&self, format: Format, out: Option<&Path>) -> Result<()> {
        let text = self.render(format);
        match out {
            Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(text.as_bytes())?;
                Ok(stdout.flush()?)
            }
        }
    }
}

/// `path: value` lines, one per leaf.
fn flatten(prefix: &str, v: &Value, lines: &mut Vec<String>) {
    let join = |key: &str| if prefix.is_empty() { key.to_string() } else { format!("{prefix}.{key}") };
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&join(k), v, lines);
            }
        }
        Value::Array(items) if items.iter().any(|i| i.is_object() || i.is_array()) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&join(&i.to_string()), v, lines);
            }
        }
        Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(scalar).collect();
            lines.push(format!("{prefix}: [{}]", parts.join(", ")));
        }
        _ => lines.push(format!("{prefix}: {}", scalar(v))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
