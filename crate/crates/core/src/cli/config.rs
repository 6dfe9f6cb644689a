//! Strict plain-text configuration: `key = value` pairs under `[section]`
//! headers, `#` comment lines. Unknown sections or keys fail the run before
//! any computation; all validation errors are reported in one pass.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// One configuration problem with its source line (0 = synthetic).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "line {}: {}", self.line, self.message)
        } else {
            write!(f, "{}", self.message)
        }
    }
}

/// Parsed but untyped `(section, key) -> (value, line)` table.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    pairs: BTreeMap<(String, String), (String, usize)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<RawConfig, Vec<ConfigError>> {
        let mut pairs = BTreeMap::new();
        let mut errors = Vec::new();
        let mut section = String::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                match name.strip_suffix(']') {
                    Some(n) if !n.trim().is_empty() => {
                        section = n.trim().to_string();
                    }
                    _ => errors.push(ConfigError {
                        line: line_no,
                        message: format!("malformed section header '{line}'"),
                    }),
                }
                continue;
            }
            match line.split_once('=') {
                Some((key, value)) => {
                    let key = key.trim().to_string();
                    let value = value.trim().to_string();
                    if key.is_empty() {
                        errors.push(ConfigError {
                            line: line_no,
                            message: "empty key".into(),
                        });
                        continue;
                    }
                    if pairs
                        .insert((section.clone(), key.clone()), (value, line_no))
                        .is_some()
                    {
                        errors.push(ConfigError {
                            line: line_no,
                            message: format!("duplicate key '{key}' in section '[{section}]'"),
                        });
                    }
                }
                None => errors.push(ConfigError {
                    line: line_no,
                    message: format!("expected 'key = value', got '{line}'"),
                }),
            }
        }
        if errors.is_empty() {
            Ok(RawConfig { pairs })
        } else {
            Err(errors)
        }
    }
}

/// Typed reader over a [`RawConfig`]: getters record which keys were used,
/// collect range/type errors, and [`Reader::finish`] rejects unknown keys.
pub struct Reader {
    raw: RawConfig,
    used: BTreeSet<(String, String)>,
    errors: Vec<ConfigError>,
}

impl Reader {
    pub fn new(raw: RawConfig) -> Self {
        Reader {
            raw,
            used: BTreeSet::new(),
            errors: Vec::new(),
        }
    }

    fn lookup(&mut self, section: &str, key: &str) -> Option<(String, usize)> {
        let id = (section.to_string(), key.to_string());
        self.used.insert(id.clone());
        self.raw.pairs.get(&id).cloned()
    }

    pub fn error(&mut self, line: usize, message: String) {
        self.errors.push(ConfigError { line, message });
    }

    pub fn f64(&mut self, section: &str, key: &str, default: f64) -> f64 {
        match self.lookup(section, key) {
            None => default,
            Some((v, line)) => match v.parse::<f64>() {
                Ok(x) if x.is_finite() => x,
                _ => {
                    self.error(line, format!("[{section}] {key}: expected a finite number, got '{v}'"));
                    default
                }
            },
        }
    }

    /// A float that must satisfy `check`; the description names the range.
    pub fn f64_checked(
        &mut self,
        section: &str,
        key: &str,
        default: f64,
        check: impl Fn(f64) -> bool,
        range: &str,
    ) -> f64 {
        let line = self
            .raw
            .pairs
            .get(&(section.to_string(), key.to_string()))
            .map(|p| p.1)
            .unwrap_or(0);
        let value = self.f64(section, key, default);
        if !check(value) {
            self.error(line, format!("[{section}] {key}: value {value} outside {range}"));
            return default;
        }
        value
    }

    pub fn usize(&mut self, section: &str, key: &str, default: usize) -> usize {
        match self.lookup(section, key) {
            None => default,
            Some((v, line)) => match v.parse::<usize>() {
                Ok(x) => x,
                Err(_) => {
                    self.error(line, format!("[{section}] {key}: expected a nonnegative integer, got '{v}'"));
                    default
                }
            },
        }
    }

    pub fn u64(&mut self, section: &str, key: &str, default: u64) -> u64 {
        match self.lookup(section, key) {
            None => default,
            Some((v, line)) => match v.parse::<u64>() {
                Ok(x) => x,
                Err(_) => {
                    self.error(line, format!("[{section}] {key}: expected an unsigned integer, got '{v}'"));
                    default
                }
            },
        }
    }

    /// Comma-separated float list.
    pub fn f64_list(&mut self, section: &str, key: &str, default: &[f64]) -> Vec<f64> {
        match self.lookup(section, key) {
            None => default.to_vec(),
            Some((v, line)) => {
                let mut out = Vec::new();
                for piece in v.split(',') {
                    match piece.trim().parse::<f64>() {
                        Ok(x) if x.is_finite() => out.push(x),
                        _ => {
                            self.error(line, format!("[{section}] {key}: bad list entry '{}'", piece.trim()));
                            return default.to_vec();
                        }
                    }
                }
                if out.is_empty() {
                    self.error(line, format!("[{section}] {key}: empty list"));
                    return default.to_vec();
                }
                out
            }
        }
    }

    /// One of a fixed set of lowercase words.
    pub fn word(&mut self, section: &str, key: &str, default: &str, allowed: &[&str]) -> String {
        match self.lookup(section, key) {
            None => default.to_string(),
            Some((v, line)) => {
                let w = v.to_lowercase();
                if allowed.contains(&w.as_str()) {
                    w
                } else {
                    self.error(
                        line,
                        format!("[{section}] {key}: '{v}' not one of {allowed:?}"),
                    );
                    default.to_string()
                }
            }
        }
    }

    /// Finishes validation: unknown keys become errors; returns all errors.
    pub fn finish(mut self) -> Result<(), Vec<ConfigError>> {
        for (id, (_, line)) in &self.raw.pairs {
            if !self.used.contains(id) {
                self.errors.push(ConfigError {
                    line: *line,
                    message: format!("unknown key '{}' in section '[{}]'", id.1, id.0),
                });
            }
        }
        if self.errors.is_empty() {
            Ok(())
        } else {
            self.errors.sort_by_key(|e| e.line);
            Err(self.errors)
        }
    }
}
