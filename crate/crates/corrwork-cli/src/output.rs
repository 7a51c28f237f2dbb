//! Deterministic number formatting and artifact writing.
//!
//! All data values are rounded to 9 significant digits before serialization
//! so identical configurations produce byte-identical files; no timestamps
//! ever enter a data file.

use std::fs;
use std::io::Write;
use std::path::Path;

/// Round to 9 significant digits.
pub fn sig9(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

/// 9-significant-digit scientific string, locale-independent.
pub fn fmt9(x: f64) -> String {
    format!("{x:.8e}")
}

/// Write to the given path, or to stdout when no path is set.
pub fn emit(out: Option<&Path>, contents: &str) -> std::io::Result<()> {
    match out {
        Some(path) => fs::write(path, contents),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(contents.as_bytes())
        }
    }
}
