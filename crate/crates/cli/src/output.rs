//! Output files. Each one starts with the resolved configuration.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;
use crate::error::CliError;

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))
}

/// CSV with a `# config:` comment line, a header and numeric rows.
pub fn write_csv(
    path: &Path,
    config: &RunConfig,
    columns: &[&str],
    rows: impl IntoIterator<Item = Vec<f64>>,
) -> Result<PathBuf, CliError> {
    let mut s = format!("# config: {}\n{}\n", config.to_json(), columns.join(","));
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{}", line.join(","));
    }
    fs::write(path, s).map_err(CliError::io(path))?;
    Ok(path.to_path_buf())
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    command: &'a str,
    config: &'a RunConfig,
    result: T,
}

pub fn write_json<T: Serialize>(path: &Path, command: &str, config: &RunConfig, result: T) -> Result<PathBuf, CliError> {
    let doc = Document { command, config, result };
    let text = serde_json::to_string_pretty(&doc).expect("summary serializes");
    fs::write(path, text).map_err(CliError::io(path))?;
    Ok(path.to_path_buf())
}

/// Prints `key = value` lines in insertion order.
pub fn print_summary(title: &str, summary: &Value) {
    println!("{title}");
    if let Value::Object(map) = summary {
        for (k, v) in map {
            println!("  {k:<18} {v}");
        }
    }
}
