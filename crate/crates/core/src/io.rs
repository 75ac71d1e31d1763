//! Text formats: CSV tables and `key: value` reports.
//!
//! Floats are written in the shortest form that parses back to the same
//! `f64`, so a write-read cycle is lossless.

use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::poles::PoleModel;
use crate::signal::SampledSignal;
use crate::spectrum::Spectrum;

/// Relative tolerance on the spacing of the time column.
pub const SPACING_TOL: f64 = 1e-9;

/// Shortest round-trip text of `x`, in exponent form outside
/// `1e-5 <= |x| < 1e16`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 {
        "0".to_string()
    } else if !(1e-5..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn parse_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse(msg.into()))
}

/// Rows of a CSV table with the exact header `expected`.
fn read_table(text: &str, expected: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| Error::Parse(format!("bad header: {e}")))?.clone();
    if header.iter().ne(expected.iter().copied()) {
        return parse_err(format!("header must be `{}`, got `{}`", expected.join(","), header.iter().collect::<Vec<_>>().join(",")));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Parse(format!("line {line}: {e}")))?;
        if rec.len() != expected.len() {
            return parse_err(format!("line {line}: expected {} fields, got {}", expected.len(), rec.len()));
        }
        let row = rec
            .iter()
            .map(|f| match f.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => parse_err(format!("line {line}: `{f}` is not a finite number")),
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Parses a `t,re,im` table. Times must start at 0 and be equally spaced.
pub fn parse_signal(text: &str) -> Result<SampledSignal> {
    let rows = read_table(text, &["t", "re", "im"])?;
    if rows.len() < 2 {
        return parse_err("a signal file needs at least two rows to fix the time step");
    }
    let n = rows.len();
    let dt = (rows[n - 1][0] - rows[0][0]) / (n - 1) as f64;
    if !(dt > 0.0) {
        return parse_err("times must be strictly increasing");
    }
    if rows[0][0].abs() > SPACING_TOL * dt {
        return parse_err(format!("first time must be 0, got {}", rows[0][0]));
    }
    for (j, w) in rows.windows(2).enumerate() {
        let step = w[1][0] - w[0][0];
        if (step - dt).abs() > SPACING_TOL * dt {
            return parse_err(format!("non-uniform time step between rows {} and {}: {step} vs {dt}", j + 1, j + 2));
        }
    }
    SampledSignal::new(dt, rows.iter().map(|r| Complex64::new(r[1], r[2])).collect())
}

pub fn read_signal(path: &Path) -> Result<SampledSignal> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_signal(&text)
}

pub fn format_signal(s: &SampledSignal) -> String {
    let mut out = String::from("t,re,im\n");
    for (t, v) in s.times().zip(s.values()) {
        out.push_str(&format!("{},{},{}\n", fmt_f64(t), fmt_f64(v.re), fmt_f64(v.im)));
    }
    out
}

pub fn parse_poles(text: &str, dt: f64) -> Result<PoleModel> {
    let rows = read_table(text, &["omega", "weight"])?;
    PoleModel::new_unwrapped(rows.iter().map(|r| crate::poles::Pole { omega: r[0], weight: r[1] }).collect(), dt)
}

pub fn format_poles(m: &PoleModel) -> String {
    let mut out = String::from("omega,weight\n");
    for p in m.poles() {
        out.push_str(&format!("{},{}\n", fmt_f64(p.omega), fmt_f64(p.weight)));
    }
    out
}

pub fn format_spectrum(sp: &Spectrum) -> String {
    let mut out = String::from("omega,re,im\n");
    for (w, v) in sp.omegas.iter().zip(&sp.values) {
        out.push_str(&format!("{},{},{}\n", fmt_f64(*w), fmt_f64(v.re), fmt_f64(v.im)));
    }
    out
}

/// Ordered `key: value` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    entries: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut r = Self::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once(": ") else {
                return parse_err(format!("report line {}: missing `: `", i + 1));
            };
            r.push(k.trim(), v.trim());
        }
        Ok(r)
    }
}

impl Display for Report {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k}: {v}")?;
        }
        Ok(())
    }
}

/// Writes `text` to `path`, or to stdout when `path` is `None`.
pub fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}
