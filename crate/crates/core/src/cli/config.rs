//! Run configuration: a flat `key = value` file, overridden by command-line
//! flags, resolved into canonical values that are echoed into every output.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use super::units::{format_list, format_number, format_quantity, parse_list, parse_quantity, GridSpec, Kind, Spacing};
use super::CliError;

/// Environment variable overriding the default relative tolerance.
pub const REL_TOL_ENV: &str = "SPINRAD_REL_TOL";

/// Every key a config file may contain.
pub const KEYS: &[&str] = &[
    "material",
    "radius",
    "slope_e",
    "slope_m",
    "sigma",
    "n",
    "x",
    "spacing",
    "z0",
    "omega",
    "t1",
    "t2",
    "rel_tol",
    "mode",
    "points",
    "ratio_min",
    "ratio_max",
    "n_list",
    "t2_list",
    "t_end",
    "stride",
    "step_tol",
    "moment_of_inertia",
    "heat_capacity",
    "experimental_large_x",
    "axis",
    "values",
];

#[derive(Debug, Clone, PartialEq)]
pub enum Origin {
    Default,
    Env,
    File { path: String, line: usize },
    Flag,
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    text: String,
    origin: Origin,
}

fn describe(key: &str, origin: &Origin) -> String {
    match origin {
        Origin::Default => format!("default for '{key}'"),
        Origin::Env => REL_TOL_ENV.to_string(),
        Origin::File { path, line } => format!("{path}:{line}: field '{key}'"),
        Origin::Flag => format!("--{}", key.replace('_', "-")),
    }
}

/// Unresolved key/value pairs with their origin.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, Entry>,
}

impl RawConfig {
    /// Parses config text. `#` starts a comment; blank lines are skipped.
    pub fn parse(text: &str, path: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (i, raw_line) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw_line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| {
                CliError::Config(format!("{path}:{line}: expected 'key = value', got '{content}'"))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(CliError::Config(format!("{path}:{line}: unknown field '{key}'")));
            }
            if value.is_empty() {
                return Err(CliError::Config(format!("{path}:{line}: field '{key}' has no value")));
            }
            let origin = Origin::File {
                path: path.to_string(),
                line,
            };
            if let Some(prev) = entries.insert(
                key.to_string(),
                Entry {
                    text: value.to_string(),
                    origin,
                },
            ) {
                if let Origin::File { line: first, .. } = prev.origin {
                    return Err(CliError::Config(format!(
                        "{path}:{line}: field '{key}' already set on line {first}"
                    )));
                }
            }
        }
        Ok(RawConfig { entries })
    }

    pub fn set(&mut self, key: &str, text: String, origin: Origin) {
        self.entries.insert(key.to_string(), Entry { text, origin });
    }

    /// Fills `key` only if nothing set it yet.
    pub fn set_default(&mut self, key: &str, text: String, origin: Origin) {
        self.entries
            .entry(key.to_string())
            .or_insert(Entry { text, origin });
    }

    /// Raw text of `key`, if set.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.text.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries of `other` override those of `self`.
    pub fn overlay(&mut self, other: RawConfig) {
        self.entries.extend(other.entries);
    }
}

/// Typed reader over a merged [`RawConfig`] that records the canonical form
/// of every value it hands out.
#[derive(Debug)]
pub struct Resolver {
    raw: RawConfig,
    used: HashSet<String>,
    header: Vec<(String, String)>,
}

impl Resolver {
    pub fn new(raw: RawConfig) -> Self {
        Resolver {
            raw,
            used: HashSet::new(),
            header: Vec::new(),
        }
    }

    fn take(&mut self, key: &str) -> Option<Entry> {
        self.used.insert(key.to_string());
        self.raw.entries.get(key).cloned()
    }

    fn error(key: &str, entry: &Entry, message: impl fmt::Display) -> CliError {
        CliError::Config(format!("{}: {message}", describe(key, &entry.origin)))
    }

    /// Adds a derived or canonicalized value to the header.
    pub fn record(&mut self, key: &str, text: String) {
        match self.header.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = text,
            None => self.header.push((key.to_string(), text)),
        }
    }

    pub fn header(&self) -> &[(String, String)] {
        &self.header
    }

    /// Config error addressed to wherever `key` came from.
    pub fn field_error(&self, key: &str, message: impl fmt::Display) -> CliError {
        match self.raw.entries.get(key) {
            Some(e) => Self::error(key, e, message),
            None => CliError::Config(format!("field '{key}': {message}")),
        }
    }

    pub fn is_set(&self, key: &str) -> bool {
        self.raw.entries.contains_key(key)
    }

    /// A quantity that may be absent.
    pub fn optional(&mut self, key: &str, kind: Kind, check: impl Fn(f64) -> Result<(), String>) -> Result<Option<f64>, CliError> {
        let Some(entry) = self.take(key) else {
            return Ok(None);
        };
        let v = parse_quantity(&entry.text, kind).map_err(|m| Self::error(key, &entry, m))?;
        check(v).map_err(|m| Self::error(key, &entry, m))?;
        self.record(key, format_quantity(v, kind));
        Ok(Some(v))
    }

    pub fn quantity(
        &mut self,
        key: &str,
        kind: Kind,
        default: f64,
        check: impl Fn(f64) -> Result<(), String>,
    ) -> Result<f64, CliError> {
        match self.optional(key, kind, &check)? {
            Some(v) => Ok(v),
            None => {
                check(default).map_err(|m| CliError::Config(format!("default for '{key}': {m}")))?;
                self.record(key, format_quantity(default, kind));
                Ok(default)
            }
        }
    }

    pub fn count(&mut self, key: &str, default: usize, min: usize, max: usize) -> Result<usize, CliError> {
        let v = match self.take(key) {
            Some(entry) => {
                let v: usize = entry
                    .text
                    .trim()
                    .parse()
                    .map_err(|_| Self::error(key, &entry, format!("'{}' is not a whole number", entry.text)))?;
                if v < min || v > max {
                    return Err(Self::error(key, &entry, format!("must lie in {min}..={max}, got {v}")));
                }
                v
            }
            None => default,
        };
        self.record(key, v.to_string());
        Ok(v)
    }

    pub fn text(&mut self, key: &str, default: &str) -> String {
        let v = self.take(key).map(|e| e.text).unwrap_or_else(|| default.to_string());
        self.record(key, v.clone());
        v
    }

    pub fn optional_text(&mut self, key: &str) -> Option<String> {
        self.take(key).map(|e| e.text)
    }

    pub fn choice<T>(&mut self, key: &str, default: &str, parse: impl Fn(&str) -> Result<T, String>, name: impl Fn(&T) -> String) -> Result<T, CliError> {
        let entry = self.take(key).unwrap_or(Entry {
            text: default.to_string(),
            origin: Origin::Default,
        });
        let v = parse(&entry.text).map_err(|m| Self::error(key, &entry, m))?;
        self.record(key, name(&v));
        Ok(v)
    }

    pub fn boolean(&mut self, key: &str, default: bool) -> Result<bool, CliError> {
        self.choice(
            key,
            if default { "true" } else { "false" },
            |s| match s.trim() {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                other => Err(format!("'{other}' is not true or false")),
            },
            |b| b.to_string(),
        )
    }

    pub fn spacing(&mut self, default: Spacing) -> Result<Spacing, CliError> {
        self.choice("spacing", default.name(), Spacing::parse, |s| s.name().to_string())
    }

    pub fn grid(
        &mut self,
        key: &str,
        kind: Kind,
        default: &str,
        check: impl Fn(f64) -> Result<(), String>,
    ) -> Result<GridSpec, CliError> {
        let entry = self.take(key).unwrap_or(Entry {
            text: default.to_string(),
            origin: Origin::Default,
        });
        let g = GridSpec::parse(&entry.text, kind).map_err(|m| Self::error(key, &entry, m))?;
        for v in [g.start, g.stop] {
            check(v).map_err(|m| Self::error(key, &entry, m))?;
        }
        self.record(key, g.format(kind));
        Ok(g)
    }

    pub fn list(
        &mut self,
        key: &str,
        kind: Kind,
        default: &[f64],
        check: impl Fn(f64) -> Result<(), String>,
    ) -> Result<Vec<f64>, CliError> {
        let v = match self.take(key) {
            Some(entry) => {
                let v = parse_list(&entry.text, kind).map_err(|m| Self::error(key, &entry, m))?;
                for x in &v {
                    check(*x).map_err(|m| Self::error(key, &entry, m))?;
                }
                v
            }
            None => default.to_vec(),
        };
        self.record(key, format_list(&v, kind));
        Ok(v)
    }

    /// Records a plain number computed by the command.
    pub fn record_number(&mut self, key: &str, v: f64, kind: Kind) {
        let text = match kind {
            Kind::Plain => format_number(v),
            _ => format_quantity(v, kind),
        };
        self.record(key, text);
    }

    /// Rejects flags that the command never read.
    pub fn check_unused_flags(&self, command: &str) -> Result<(), CliError> {
        for (key, entry) in &self.raw.entries {
            if entry.origin == Origin::Flag && !self.used.contains(key) {
                return Err(CliError::Usage(format!(
                    "--{} is not used by '{command}'",
                    key.replace('_', "-")
                )));
            }
        }
        Ok(())
    }
}

pub fn positive(v: f64) -> Result<(), String> {
    if v > 0.0 {
        Ok(())
    } else {
        Err(format!("must be positive, got {}", format_number(v)))
    }
}

pub fn non_negative(v: f64) -> Result<(), String> {
    if v >= 0.0 {
        Ok(())
    } else {
        Err(format!("must be non-negative, got {}", format_number(v)))
    }
}

pub fn any(_: f64) -> Result<(), String> {
    Ok(())
}

pub fn refractive_index(v: f64) -> Result<(), String> {
    if v >= 1.0 {
        Ok(())
    } else {
        Err(format!("refractive index must be at least 1, got {}", format_number(v)))
    }
}

pub fn tolerance(v: f64) -> Result<(), String> {
    if v > 0.0 && v <= 1e-4 {
        Ok(())
    } else {
        Err(format!("tolerance must lie in (0, 1e-4], got {}", format_number(v)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blank_lines() {
        let raw = RawConfig::parse("# scenario\n\nradius = 50nm # sphere\nn=3\n", "a.cfg").unwrap();
        let mut r = Resolver::new(raw);
        assert_eq!(r.quantity("radius", Kind::Length, 1.0, positive).unwrap(), 5e-6);
        assert_eq!(r.quantity("n", Kind::Plain, 1.0, refractive_index).unwrap(), 3.0);
        assert_eq!(r.header()[0], ("radius".to_string(), "5e-6cm".to_string()));
    }

    #[test]
    fn errors_are_addressed_by_line_and_field() {
        let e = RawConfig::parse("n = 3\nbogus = 1\n", "run.cfg").unwrap_err();
        assert_eq!(e, CliError::Config("run.cfg:2: unknown field 'bogus'".into()));
        let e = RawConfig::parse("n = 3\nn = 4\n", "run.cfg").unwrap_err();
        assert!(e.to_string().contains("run.cfg:2"));
        let raw = RawConfig::parse("\nradius = 50\n", "run.cfg").unwrap();
        let e = Resolver::new(raw).quantity("radius", Kind::Length, 1.0, positive).unwrap_err();
        assert!(e.to_string().starts_with("run.cfg:2: field 'radius': missing length unit"), "{e}");
    }

    #[test]
    fn flags_override_file() {
        let mut raw = RawConfig::parse("t2 = 4K\n", "f").unwrap();
        let mut flags = RawConfig::default();
        flags.set("t2", "1".into(), Origin::Flag);
        raw.overlay(flags);
        let mut r = Resolver::new(raw);
        assert_eq!(r.quantity("t2", Kind::Temperature, 0.0, non_negative).unwrap(), 1.0);
    }

    #[test]
    fn unused_flags_are_rejected() {
        let mut raw = RawConfig::default();
        raw.set("t_end", "1".into(), Origin::Flag);
        let r = Resolver::new(raw);
        assert!(matches!(r.check_unused_flags("rates"), Err(CliError::Usage(_))));
    }

    #[test]
    fn flag_errors_name_the_flag() {
        let mut raw = RawConfig::default();
        raw.set("rel_tol", "0.5".into(), Origin::Flag);
        let e = Resolver::new(raw).quantity("rel_tol", Kind::Plain, 1e-8, tolerance).unwrap_err();
        assert!(e.to_string().starts_with("--rel-tol:"), "{e}");
    }
}
