//! Report formatting: fixed headers, comma-delimited rows, and a number
//! format whose output re-parses and re-emits byte-identically.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::CliError;

/// Formats a value with 6 significant digits in fixed notation, switching to
/// scientific notation outside [1e-5, 1e7). With `raw`, emits the shortest
/// representation that round-trips to the same f64.
pub fn format_number(x: f64, raw: bool) -> String {
    if raw {
        return format!("{x}");
    }
    let mut value = x;
    // Rounding can move a value across a magnitude boundary (0.9999999 →
    // "1.000000"); iterate to the fixpoint so parse-then-format is stable.
    for _ in 0..3 {
        let s = format_once(value);
        let reparsed: f64 = s.parse().expect("own output parses");
        if format_once(reparsed) == s {
            return s;
        }
        value = reparsed;
    }
    format_once(value)
}

fn format_once(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-5..7).contains(&magnitude) {
        return format!("{:.5e}", x);
    }
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{:.*}", decimals, x)
}

pub fn format_optional(x: Option<f64>, raw: bool) -> String {
    x.map(|v| format_number(v, raw)).unwrap_or_default()
}

/// A delimited report: one header and formatted rows.
pub struct Report {
    lines: Vec<String>,
}

impl Report {
    pub fn new(header: &str) -> Self {
        Report { lines: vec![header.to_string()] }
    }

    pub fn push_row(&mut self, fields: &[String]) {
        self.lines.push(fields.join(","));
    }

    pub fn into_string(self) -> String {
        let mut out = self.lines.join("\n");
        out.push('\n');
        out
    }

    /// Writes to the path, or to stdout when no path is given.
    pub fn write(self, out: Option<&Path>) -> Result<(), CliError> {
        let text = self.into_string();
        match out {
            Some(path) => fs::write(path, text)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display()))),
            None => {
                std::io::stdout().write_all(text.as_bytes())?;
                Ok(())
            }
        }
    }
}
