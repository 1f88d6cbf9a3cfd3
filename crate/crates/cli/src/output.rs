//! Serialization and atomic file output.
//!
//! Tables are CSV (`\n` line endings, header row mandatory) preceded by
//! `# key=value` metadata lines; a JSON sidecar `<output>.meta.json` repeats
//! the metadata with the canonical config. Reports are a single JSON document
//! with a `meta` object next to the report.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::commands::{Body, Outcome};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::TOOL;

pub const META_SCHEMA: &str = "qanalog.meta/1";

fn seed_text(cfg: &ExperimentConfig) -> String {
    cfg.seed.map_or_else(|| "none".to_string(), |s| s.to_string())
}

pub fn metadata(cfg: &ExperimentConfig, outcome: &Outcome) -> Value {
    let config: serde_json::Map<String, Value> =
        cfg.canonical().into_iter().map(|(k, v)| (k, Value::String(v))).collect();
    let mut meta = json!({
        "schema": META_SCHEMA,
        "tool": TOOL,
        "command": cfg.command.name(),
        "config_hash": cfg.hash(),
        "seed": cfg.seed,
        "config": config,
        "warnings": outcome.warnings,
    });
    if let Body::Table { columns, rows } = &outcome.body {
        meta["columns"] = json!(columns);
        meta["rows"] = json!(rows.len());
    }
    meta
}

pub fn csv(cfg: &ExperimentConfig, columns: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&format!("# tool={TOOL}\n"));
    out.push_str(&format!("# command={}\n", cfg.command.name()));
    out.push_str(&format!("# config_hash={}\n", cfg.hash()));
    out.push_str(&format!("# seed={}\n", seed_text(cfg)));
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Main document for the outcome.
pub fn render(cfg: &ExperimentConfig, outcome: &Outcome) -> String {
    match &outcome.body {
        Body::Table { columns, rows } => csv(cfg, columns, rows),
        Body::Report(report) => {
            let doc = json!({ "meta": metadata(cfg, outcome), "report": report });
            let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
            text.push('\n');
            text
        }
    }
}

pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".meta.json");
    output.with_file_name(name)
}

/// Writes the outcome to `cfg.output` (plus a sidecar for tables), or to
/// stdout when no output is configured. Files appear complete or not at all.
pub fn emit(cfg: &ExperimentConfig, outcome: &Outcome) -> Result<Vec<PathBuf>, CliError> {
    let main = render(cfg, outcome);
    let Some(path) = &cfg.output else {
        std::io::stdout().write_all(main.as_bytes()).map_err(|e| CliError::io("<stdout>", e))?;
        return Ok(Vec::new());
    };
    let mut files = vec![(path.clone(), main)];
    if matches!(outcome.body, Body::Table { .. }) {
        let mut meta = serde_json::to_string_pretty(&metadata(cfg, outcome)).expect("metadata serializes");
        meta.push('\n');
        files.push((sidecar_path(path), meta));
    }
    let staged = files
        .iter()
        .map(|(p, text)| stage(p, text).map(|tmp| (tmp, p.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    let mut written = Vec::new();
    for (tmp, target) in staged {
        tmp.persist(&target).map_err(|e| CliError::io(&target, e.error))?;
        written.push(target);
    }
    Ok(written)
}

fn stage(target: &Path, text: &str) -> Result<tempfile::NamedTempFile, CliError> {
    let dir = match target.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(text.as_bytes()).map_err(|e| CliError::io(target, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(target, e))?;
    Ok(tmp)
}
