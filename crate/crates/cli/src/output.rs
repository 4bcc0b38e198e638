//! CSV assembly. Everything is buffered and written in one go, so a failed
//! run never leaves a partial file behind.

use std::fmt::Write as _;

/// Version of the column layout; bumped whenever a command's columns change.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Default)]
pub struct Csv {
    buf: String,
}

impl Csv {
    /// Starts a document with the standard provenance comments.
    pub fn new(command: &str, seed: u64, config_sha256: &str) -> Self {
        let mut csv = Self::default();
        csv.comment(&format!("drama {command} schema={SCHEMA_VERSION}"));
        csv.comment(&format!("seed={seed}"));
        csv.comment(&format!("config_sha256={config_sha256}"));
        csv
    }

    pub fn comment(&mut self, text: &str) {
        writeln!(self.buf, "# {text}").unwrap();
    }

    pub fn note(&mut self, text: &str) {
        self.comment(&format!("note: {text}"));
    }

    pub fn row<I, S>(&mut self, cells: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut first = true;
        for c in cells {
            if !first {
                self.buf.push(',');
            }
            first = false;
            self.buf.push_str(c.as_ref());
        }
        self.buf.push('\n');
    }

    pub fn into_string(self) -> String {
        self.buf
    }
}

/// Shortest round-trip decimal; non-finite values print as `inf`, `-inf`, `nan`.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else if x == 0.0 {
        "0".into()
    } else {
        format!("{x}")
    }
}

pub fn opt(x: Option<f64>, missing: &str) -> String {
    x.map_or_else(|| missing.to_string(), num)
}
