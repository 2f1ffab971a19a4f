//! Output envelopes. Every artifact embeds a schema version, the command,
//! and the resolved configuration, and is byte-identical across runs with
//! the same configuration.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::CliConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    config: &'a CliConfig,
    result: &'a T,
}

/// A row-oriented payload that knows how to render itself as CSV.
pub trait CsvTable {
    fn header(&self) -> Vec<&'static str>;
    fn rows(&self) -> Vec<Vec<String>>;
}

pub fn write_json<T: Serialize>(
    command: &str,
    config: &CliConfig,
    result: &T,
    out: Option<&Path>,
) -> std::io::Result<()> {
    let envelope = Envelope {
        schema_version: SCHEMA_VERSION,
        command,
        config,
        result,
    };
    let mut text = serde_json::to_string_pretty(&envelope)?;
    text.push('\n');
    emit(text.as_bytes(), out)
}

pub fn write_csv<T: CsvTable + Serialize>(
    command: &str,
    config: &CliConfig,
    result: &T,
    out: Option<&Path>,
) -> std::io::Result<()> {
    let mut text = String::new();
    text.push_str(&format!("# schema_version: {SCHEMA_VERSION}\n"));
    text.push_str(&format!("# command: {command}\n"));
    text.push_str(&format!(
        "# config: {}\n",
        serde_json::to_string(config)?
    ));
    text.push_str(&result.header().join(","));
    text.push('\n');
    for row in result.rows() {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    emit(text.as_bytes(), out)
}

fn emit(bytes: &[u8], out: Option<&Path>) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes),
        None => std::io::stdout().write_all(bytes),
    }
}

/// Render an optional metric cell; absent values become empty cells.
pub fn cell_opt(v: Option<f64>) -> String {
    v.map(|t| t.to_string()).unwrap_or_default()
}
