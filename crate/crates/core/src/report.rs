//! Machine-readable experiment reports: CSV rows plus a text summary,
//! written atomically (temp file + rename).
//!
//! The CSV is deterministic for a fixed config and seed set: it contains no
//! timestamps, reals are printed with 17 significant digits, and row order
//! follows input order.

use std::fmt;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Duration;

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Str(String),
    Real(f64),
    Int(i64),
    Bool(bool),
    Empty,
}

impl Cell {
    pub fn str(s: impl Into<String>) -> Cell {
        Cell::Str(s.into())
    }
}

/// 17 significant digits round-trip any f64 exactly.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Str(s) => write!(f, "{}", csv_escape(s)),
            Cell::Real(v) => write!(f, "{}", fmt_real(*v)),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Bool(b) => write!(f, "{b}"),
            Cell::Empty => Ok(()),
        }
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug)]
pub struct Report {
    pub experiment: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Human-readable lines for summary.txt; every verdict line carries its
    /// horizon and tolerance.
    pub summary: Vec<String>,
    /// Violated `verify` expectations (empty means pass).
    pub failures: Vec<String>,
    pub wall_time: Duration,
}

impl Report {
    pub fn new(experiment: impl Into<String>, header: Vec<&'static str>) -> Report {
        Report {
            experiment: experiment.into(),
            header,
            rows: Vec::new(),
            summary: Vec::new(),
            failures: Vec::new(),
            wall_time: Duration::ZERO,
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len(), "CSV row width mismatch");
        self.rows.push(row);
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.summary.push(line.into());
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn summary_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("experiment: {}\n", self.experiment));
        out.push_str(&format!("tool version: {}\n", env!("CARGO_PKG_VERSION")));
        out.push_str(&format!(
            "wall clock: {:.3} s\n",
            self.wall_time.as_secs_f64()
        ));
        out.push('\n');
        for line in &self.summary {
            out.push_str(line);
            out.push('\n');
        }
        if !self.failures.is_empty() {
            out.push('\n');
            for f in &self.failures {
                out.push_str(&format!("EXPECTATION FAILED: {f}\n"));
            }
        }
        out.push('\n');
        out.push_str(if self.passed() {
            "result: PASS\n"
        } else {
            "result: FAIL\n"
        });
        out
    }

    /// Writes `report.csv` and `summary.txt` under `out_dir`, atomically.
    pub fn write(&self, out_dir: &Path) -> io::Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(out_dir)?;
        let csv_path = out_dir.join("report.csv");
        let summary_path = out_dir.join("summary.txt");
        write_atomic(&csv_path, &self.csv())?;
        write_atomic(&summary_path, &self.summary_text())?;
        Ok((csv_path, summary_path))
    }
}

fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut tmp = path.file_name().unwrap_or_default().to_os_string();
    tmp.push(".tmp");
    let tmp_path = dir.join(tmp);
    std::fs::write(&tmp_path, contents)?;
    std::fs::rename(&tmp_path, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_formatting_round_trips() {
        for v in [1.0, -0.1, 1.0 / 3.0, 2.0_f64.powi(-52), 1e300] {
            let s = fmt_real(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
    }

    #[test]
    fn csv_escaping() {
        assert_eq!(Cell::str("a,b").to_string(), "\"a,b\"");
        assert_eq!(Cell::str("q\"q").to_string(), "\"q\"\"q\"");
        assert_eq!(Cell::str("plain").to_string(), "plain");
        assert_eq!(Cell::Empty.to_string(), "");
    }

    #[test]
    fn writes_files_atomically() {
        let dir = tempfile::tempdir().unwrap();
        let mut report = Report::new("orbit", vec!["a", "b"]);
        report.push_row(vec![Cell::Int(1), Cell::Real(0.5)]);
        report.note("a line");
        let (csv, summary) = report.write(dir.path()).unwrap();
        let text = std::fs::read_to_string(csv).unwrap();
        assert_eq!(text, "a,b\n1,5.0000000000000000e-1\n");
        let s = std::fs::read_to_string(summary).unwrap();
        assert!(s.contains("experiment: orbit"));
        assert!(s.contains("result: PASS"));
        assert!(!dir.path().join("report.csv.tmp").exists());
    }

    #[test]
    fn failures_flip_result() {
        let mut report = Report::new("verify", vec!["check"]);
        report.failures.push("x".into());
        assert!(!report.passed());
        assert!(report.summary_text().contains("result: FAIL"));
        assert!(report.summary_text().contains("EXPECTATION FAILED: x"));
    }
}
