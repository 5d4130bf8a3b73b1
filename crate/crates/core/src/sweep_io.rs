//! CSV serialization for sample sweeps and diagnoses.
//!
//! The dialect is deliberately plain: comma separators, `.` decimal point,
//! `#`-prefixed comment lines, LF endings. Sweep files carry columns
//! `k,h,A`; diagnosis files add `F` (Richardson fraction) and `R` (error
//! estimate), writing `nan` where a value is undefined at that level.
//! Floats are written with Rust's shortest round-trip formatting, so a file
//! read back yields bit-identical values.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::extrapolation::{ConvergenceDiagnosis, SampleSweep};

/// Relative slack when checking that the `h` column matches `h0·2^{-k}`.
const H_CONSISTENCY_RTOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SweepIoError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid sweep data: {msg}")]
    Validation { msg: String },
}

/// Write a sweep as CSV. `meta` lines (if any) are emitted as extra comments
/// between the standard header comments and the column header; pass none for
/// byte-reproducible output.
pub fn write_sweep<W: Write>(
    w: &mut W,
    sweep: &SampleSweep,
    meta: &[String],
) -> io::Result<()> {
    writeln!(w, "# label: {}", sweep.label())?;
    writeln!(w, "# h0: {}", sweep.h0())?;
    for line in meta {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "k,h,A")?;
    for &(k, a) in sweep.entries() {
        writeln!(w, "{},{},{}", k, sweep.h(k), a)?;
    }
    Ok(())
}

/// Write a diagnosis as CSV: the sweep columns plus `F` and `R`, preceded by
/// summary comments (`p_hat`, `m_hat`, `window`, `verdict`).
pub fn write_diagnosis<W: Write>(
    w: &mut W,
    sweep: &SampleSweep,
    diagnosis: &ConvergenceDiagnosis,
    meta: &[String],
) -> io::Result<()> {
    writeln!(w, "# label: {}", sweep.label())?;
    writeln!(w, "# h0: {}", sweep.h0())?;
    writeln!(w, "# verdict: {}", diagnosis.verdict)?;
    match diagnosis.p_hat {
        Some(p) => writeln!(w, "# p_hat: {p}")?,
        None => writeln!(w, "# p_hat: nan")?,
    }
    match diagnosis.m_hat {
        Some(m) => writeln!(w, "# m_hat: {m}")?,
        None => writeln!(w, "# m_hat: nan")?,
    }
    match diagnosis.asymptotic_window {
        Some((lo, hi)) => writeln!(w, "# window: {lo}..{hi}")?,
        None => writeln!(w, "# window: none")?,
    }
    for line in meta {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "k,h,A,F,R")?;
    for &(k, a) in sweep.entries() {
        let f = diagnosis
            .fractions
            .iter()
            .find(|e| e.k == k)
            .and_then(|e| e.value);
        let r = diagnosis.estimates.iter().find(|&&(ek, _)| ek == k).map(|&(_, r)| r);
        write!(w, "{},{},{}", k, sweep.h(k), a)?;
        match f {
            Some(f) => write!(w, ",{f}")?,
            None => write!(w, ",nan")?,
        }
        match r {
            Some(r) => writeln!(w, ",{r}")?,
            None => writeln!(w, ",nan")?,
        }
    }
    Ok(())
}

/// Read a sweep from CSV written by [`write_sweep`] (or any file with the
/// same `k,h,A` column prefix — extra columns are ignored, so diagnosis files
/// round-trip too).
///
/// The `h` column is validated against `h0·2^{-k}`; a mismatch means the file
/// does not describe a halving sweep and is rejected.
pub fn read_sweep<R: BufRead>(r: R) -> Result<SampleSweep, SweepIoError> {
    let mut label = String::new();
    let mut h0: Option<f64> = None;
    let mut rows: Vec<(u32, f64, f64)> = Vec::new();
    let mut saw_header = false;

    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            let comment = comment.trim_start();
            if let Some(v) = comment.strip_prefix("label:") {
                label = v.trim().to_string();
            } else if let Some(v) = comment.strip_prefix("h0:") {
                let v = v.trim();
                h0 = Some(parse_float(v, line_no, "h0")?);
            }
            continue;
        }
        if !saw_header {
            let cols: Vec<&str> = trimmed.split(',').map(str::trim).collect();
            if cols.len() < 3 || cols[0] != "k" || cols[1] != "h" || cols[2] != "A" {
                return Err(SweepIoError::Parse {
                    line: line_no,
                    msg: format!("expected header starting with k,h,A, got `{trimmed}`"),
                });
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() < 3 {
            return Err(SweepIoError::Parse {
                line: line_no,
                msg: format!("expected at least 3 columns, got {}", fields.len()),
            });
        }
        let k: u32 = fields[0].trim().parse().map_err(|e| SweepIoError::Parse {
            line: line_no,
            msg: format!("bad level `{}`: {e}", fields[0]),
        })?;
        let h = parse_float(fields[1].trim(), line_no, "h")?;
        let a = parse_float(fields[2].trim(), line_no, "A")?;
        rows.push((k, h, a));
    }

    if !saw_header {
        return Err(SweepIoError::Parse { line: 0, msg: "missing k,h,A header".to_string() });
    }
    let h0 = match h0 {
        Some(v) => v,
        None => {
            // Derive from the first row: h0 = h·2^k.
            let &(k, h, _) = rows.first().ok_or_else(|| SweepIoError::Validation {
                msg: "file contains no data rows".to_string(),
            })?;
            h * (k as f64).exp2()
        }
    };
    for &(k, h, _) in &rows {
        let expected = h0 * (-(k as f64)).exp2();
        if (h - expected).abs() > H_CONSISTENCY_RTOL * expected.abs() {
            return Err(SweepIoError::Validation {
                msg: format!(
                    "h column is not halving: level {k} has h = {h}, expected h0·2^-k = {expected}"
                ),
            });
        }
    }
    let entries = rows.into_iter().map(|(k, _, a)| (k, a)).collect();
    SampleSweep::new(h0, label, entries)
        .map_err(|e| SweepIoError::Validation { msg: e.to_string() })
}

fn parse_float(s: &str, line: usize, what: &str) -> Result<f64, SweepIoError> {
    let v: f64 = s.parse().map_err(|e| SweepIoError::Parse {
        line,
        msg: format!("bad {what} `{s}`: {e}"),
    })?;
    if !v.is_finite() {
        return Err(SweepIoError::Parse { line, msg: format!("non-finite {what} `{s}`") });
    }
    Ok(v)
}
