//! Report emission: canonical JSON documents or flattened `path,value` tables.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&join(k), v, rows)),
        Value::Array(items) => items.iter().enumerate().for_each(|(i, v)| flatten(&join(&i.to_string()), v, rows)),
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        Value::Null => rows.push((prefix.to_string(), String::new())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

pub fn render(report: &Value, format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(report).map_err(|e| CliError::Output(e.to_string()))?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let mut rows = Vec::new();
            flatten("", report, &mut rows);
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["path", "value"]).map_err(|e| CliError::Output(e.to_string()))?;
            for (k, v) in rows {
                w.write_record([k, v]).map_err(|e| CliError::Output(e.to_string()))?;
            }
            w.into_inner().map_err(|e| CliError::Output(e.to_string()))
        }
    }
}

/// Writes `<dir>/<name>.<ext>` and `<dir>/<name>.txt`, or prints the report to
/// stdout and the summary to stderr when no directory is given.
pub fn emit(report: &Value, summary: &str, name: &str, out: Option<&Path>, format: Format) -> Result<(), CliError> {
    let bytes = render(report, format)?;
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
            let path = dir.join(format!("{name}.{}", format.extension()));
            fs::write(&path, &bytes).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
            let txt = dir.join(format!("{name}.txt"));
            fs::write(&txt, format!("{summary}\n")).map_err(|e| CliError::Output(format!("{}: {e}", txt.display())))?;
            println!("{summary}");
        }
        None => {
            std::io::stdout().write_all(&bytes).map_err(|e| CliError::Output(e.to_string()))?;
            eprintln!("{summary}");
        }
    }
    Ok(())
}

pub fn write_json(path: &Path, v: &Value) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| CliError::Output(format!("{}: {e}", parent.display())))?;
        }
    }
    let bytes = render(v, Format::Json)?;
    fs::write(path, bytes).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}
