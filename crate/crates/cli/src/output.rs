//! Comma-delimited reports with a `#`-prefixed metadata header.

use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::CliError;

pub struct Report {
    meta: Vec<String>,
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Report {
    pub fn new(command: &str, columns: &[&'static str]) -> Self {
        let meta = vec![format!(
            "gwdiv {} (gwdiv-core {}) command={command}",
            env!("CARGO_PKG_VERSION"),
            gwdiv_core::VERSION
        )];
        Self {
            meta,
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, line: impl Into<String>) {
        self.meta.push(line.into());
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn render(&self, timestamp: bool) -> String {
        let mut out = String::new();
        for line in &self.meta {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        if timestamp {
            let secs = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            out.push_str(&format!("# generated_unix={secs}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Write to `path`, or standard output when `None`.
    pub fn emit(&self, path: Option<&Path>, timestamp: bool) -> Result<(), CliError> {
        let text = self.render(timestamp);
        match path {
            Some(p) => std::fs::write(p, text)
                .map_err(|e| CliError::Config(format!("cannot write {}: {e}", p.display()))),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout
                    .write_all(text.as_bytes())
                    .and_then(|_| stdout.flush())
                    .map_err(|e| CliError::Config(format!("cannot write output: {e}")))
            }
        }
    }
}

/// Probability with nine significant digits.
pub fn prob(p: f64) -> String {
    format!("{p:.8e}")
}

pub fn opt_prob(p: Option<f64>) -> String {
    p.map(prob).unwrap_or_default()
}

pub fn num(x: f64) -> String {
    format!("{x}")
}
