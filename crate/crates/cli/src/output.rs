//! Serialization helpers. Floats are written in Rust's shortest
//! round-trip form (exponent notation for very small or large values), so
//! parsing the output recovers the exact values.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;

use serde::Serialize;

use crate::{CliError, CliResult, Format, OutputArgs};

pub fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn csv_line(fields: &[String]) -> String {
    let mut s = fields.join(",");
    s.push('\n');
    s
}

pub fn matrix_csv(m: &[Vec<f64>]) -> String {
    let mut s = String::new();
    for row in m {
        let fields: Vec<String> = row.iter().map(|&v| num(v)).collect();
        s.push_str(&csv_line(&fields));
    }
    s
}

pub fn json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Numerical(format!("cannot serialize output: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Resolve the requested format against those a command supports.
pub fn format(io: &OutputArgs, default: Format, allowed: &[Format]) -> CliResult<Format> {
    let f = io.format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        let names: Vec<String> = allowed
            .iter()
            .map(|f| format!("{f:?}").to_lowercase())
            .collect();
        Err(CliError::Usage(format!(
            "format `{}` not supported here (use {})",
            format!("{f:?}").to_lowercase(),
            names.join(" or ")
        )))
    }
}

pub fn emit(io: &OutputArgs, text: &str) -> CliResult<()> {
    match &io.out {
        Some(path) => fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

/// `key = value` lines for text output.
pub fn kv(out: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "{key:<28} {value}");
}
