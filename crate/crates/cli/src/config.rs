//! Configuration files and command-line value parsing.
//!
//! A config file is plain `key = value` text: one pair per line, `#` starts a
//! comment, blank lines are ignored. Keys use the same spelling as the long
//! flags (`event-tol`, `output-dir`, ...). Flags always win over file values,
//! which in turn win over built-in defaults.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::CliError;

/// Every key a config file may contain. Keys used only by other subcommands
/// are fine (one file can drive several runs); unknown keys are typos and are
/// rejected outright.
const KNOWN_KEYS: &[&str] = &[
    "output-dir",
    "no-meta",
    "integrand",
    "method",
    "event-tol",
    "shell",
    "switching",
    "tau",
    "kmin",
    "kmax",
    "input",
    "p",
];

/// Parsed `key = value` pairs from a config file.
#[derive(Debug, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    /// Read and parse the file at `path`.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
            .map_err(|msg| CliError::Config(format!("{}: {msg}", path.display())))
    }

    /// Parse config text; errors carry the offending line number.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.split_once('#') {
                Some((before, _)) => before.trim(),
                None => raw.trim(),
            };
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {line_no}: expected `key = value`, got `{line}`"))?;
            let key = key.trim();
            let value = value.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(format!("line {line_no}: unknown key `{key}`"));
            }
            if value.is_empty() {
                return Err(format!("line {line_no}: key `{key}` has no value"));
            }
            values.insert(key.to_string(), value.to_string());
        }
        Ok(ConfigFile { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        debug_assert!(KNOWN_KEYS.contains(&key), "unregistered config key {key}");
        self.values.get(key).map(String::as_str)
    }
}

/// Resolve one parameter from flag, then config file, then default, parsing
/// with `parse`. Parse failures report as usage errors for flag values and as
/// config errors for file values, so the exit code points at the real source.
pub fn resolve<T>(
    flag: Option<&str>,
    cfg: &ConfigFile,
    key: &str,
    default: T,
    parse: impl Fn(&str) -> Result<T, String>,
) -> Result<T, CliError> {
    if let Some(raw) = flag {
        return parse(raw).map_err(|msg| CliError::Usage(format!("--{key} {raw}: {msg}")));
    }
    if let Some(raw) = cfg.get(key) {
        return parse(raw).map_err(|msg| CliError::Config(format!("key `{key}` = {raw}: {msg}")));
    }
    Ok(default)
}

/// Parse a tolerance that may be a `2^-N` literal (exact binary power, so the
/// unit-roundoff settings 2^-11, 2^-25, 2^-53 carry no decimal rounding) or a
/// plain positive float.
pub fn parse_tolerance(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let v = if let Some(exp) = t.strip_prefix("2^") {
        let e: i32 = exp
            .parse()
            .map_err(|_| format!("bad exponent `{exp}` in `{t}`"))?;
        if !(-1074..=1023).contains(&e) {
            return Err(format!("exponent {e} outside the f64 range"));
        }
        (e as f64).exp2()
    } else {
        t.parse::<f64>().map_err(|_| format!("not a number: `{t}`"))?
    };
    if !(v.is_finite() && v > 0.0) {
        return Err(format!("tolerance must be positive and finite, got {v}"));
    }
    Ok(v)
}

pub fn parse_u32(s: &str) -> Result<u32, String> {
    s.trim().parse().map_err(|_| format!("not a non-negative integer: `{s}`"))
}

pub fn parse_order(s: &str) -> Result<f64, String> {
    let p: f64 = s.trim().parse().map_err(|_| format!("not a number: `{s}`"))?;
    if !(p.is_finite() && p > 0.0) {
        return Err(format!("order must be positive and finite, got {p}"));
    }
    Ok(p)
}

pub fn parse_bool(s: &str) -> Result<bool, String> {
    match s.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(format!("not a boolean: `{other}`")),
    }
}
