//! Parsing of values with unit suffixes and canonical number formatting.

/// Physical kind of a configuration value, which fixes the accepted unit
/// suffixes and the canonical unit written back out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// Stored in cm; a suffix is required.
    Length,
    /// Stored in K.
    Temperature,
    /// Angular frequency, stored in s⁻¹.
    Frequency,
    /// Stored in s.
    Time,
    /// Dimensionless or in the documented CGS unit of the field.
    Plain,
}

impl Kind {
    fn canonical_suffix(self) -> &'static str {
        match self {
            Kind::Length => "cm",
            Kind::Temperature => "K",
            Kind::Frequency => "s^-1",
            Kind::Time => "s",
            Kind::Plain => "",
        }
    }

    /// Suffix with the multiplier and divisor to the canonical unit.
    /// Dividing by powers of ten keeps "50nm" at exactly `5e-6`.
    fn suffixes(self) -> &'static [(&'static str, f64, f64)] {
        match self {
            Kind::Length => &[
                ("nm", 1.0, 1e7),
                ("um", 1.0, 1e4),
                ("μm", 1.0, 1e4),
                ("mm", 1.0, 10.0),
                ("cm", 1.0, 1.0),
                ("m", 100.0, 1.0),
            ],
            Kind::Temperature => &[("mK", 1.0, 1e3), ("K", 1.0, 1.0)],
            Kind::Frequency => &[("s^-1", 1.0, 1.0), ("/s", 1.0, 1.0), ("rad/s", 1.0, 1.0)],
            Kind::Time => &[("s", 1.0, 1.0)],
            Kind::Plain => &[],
        }
    }

    /// Human-readable list of accepted suffixes.
    pub fn unit_hint(self) -> String {
        let names: Vec<&str> = self.suffixes().iter().map(|s| s.0).collect();
        names.join(", ")
    }
}

/// Parses a finite number with an optional (or, for lengths, mandatory)
/// unit suffix and converts it to the canonical unit.
pub fn parse_quantity(text: &str, kind: Kind) -> Result<f64, String> {
    let text = text.trim();
    // Longest matching suffix wins so that "nm" is not read as "m".
    let matched = kind
        .suffixes()
        .iter()
        .filter(|(s, _, _)| text.ends_with(s))
        .max_by_key(|(s, _, _)| s.len());
    let (number, mul, div) = match matched {
        Some((s, m, d)) => (text[..text.len() - s.len()].trim_end(), *m, *d),
        None if kind == Kind::Length => {
            return Err(format!("missing length unit (one of {})", kind.unit_hint()));
        }
        None => (text, 1.0, 1.0),
    };
    let value: f64 = number
        .parse()
        .map_err(|_| match kind {
            Kind::Plain => format!("'{text}' is not a number"),
            _ => format!("'{text}' is not a number with a unit ({})", kind.unit_hint()),
        })?;
    if !value.is_finite() {
        return Err(format!("'{text}' is not finite"));
    }
    Ok(value * mul / div)
}

/// Shortest decimal that parses back to the same `f64`.
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        // no "-0" in output
        "0".to_string()
    } else if (1e-4..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Canonical text of a quantity: the number in canonical units with the
/// canonical suffix.
pub fn format_quantity(v: f64, kind: Kind) -> String {
    format!("{}{}", format_number(v), kind.canonical_suffix())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

impl Spacing {
    pub fn parse(text: &str) -> Result<Self, String> {
        match text.trim() {
            "linear" | "lin" => Ok(Spacing::Linear),
            "log" => Ok(Spacing::Log),
            other => Err(format!("unknown spacing '{other}' (linear or log)")),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Spacing::Linear => "linear",
            Spacing::Log => "log",
        }
    }
}

/// A single value or `start:stop:count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

/// Largest number of points a grid may have.
pub const MAX_GRID_POINTS: usize = 1_000_000;

impl GridSpec {
    pub fn parse(text: &str, kind: Kind) -> Result<Self, String> {
        let parts: Vec<&str> = text.split(':').collect();
        match parts.as_slice() {
            [single] => {
                let v = parse_quantity(single, kind)?;
                Ok(GridSpec {
                    start: v,
                    stop: v,
                    count: 1,
                })
            }
            [a, b, c] => {
                let count: usize = c
                    .trim()
                    .parse()
                    .map_err(|_| format!("grid count '{}' is not a positive integer", c.trim()))?;
                if count == 0 || count > MAX_GRID_POINTS {
                    return Err(format!("grid count must lie in 1..={MAX_GRID_POINTS}, got {count}"));
                }
                Ok(GridSpec {
                    start: parse_quantity(a, kind)?,
                    stop: parse_quantity(b, kind)?,
                    count,
                })
            }
            _ => Err(format!("'{text}' is neither a value nor start:stop:count")),
        }
    }

    pub fn format(&self, kind: Kind) -> String {
        if self.count == 1 && self.start == self.stop {
            format_quantity(self.start, kind)
        } else {
            format!(
                "{}:{}:{}",
                format_quantity(self.start, kind),
                format_quantity(self.stop, kind),
                self.count
            )
        }
    }

    pub fn values(&self, spacing: Spacing) -> Result<Vec<f64>, String> {
        if self.count == 1 {
            return Ok(vec![self.start]);
        }
        let last = (self.count - 1) as f64;
        match spacing {
            Spacing::Linear => Ok((0..self.count)
                .map(|i| {
                    if i == self.count - 1 {
                        self.stop
                    } else {
                        self.start + (self.stop - self.start) * i as f64 / last
                    }
                })
                .collect()),
            Spacing::Log => {
                if !(self.start > 0.0 && self.stop > 0.0) {
                    return Err("log spacing needs positive bounds".into());
                }
                let (a, b) = (self.start.ln(), self.stop.ln());
                Ok((0..self.count)
                    .map(|i| match i {
                        0 => self.start,
                        _ if i == self.count - 1 => self.stop,
                        _ => (a + (b - a) * i as f64 / last).exp(),
                    })
                    .collect())
            }
        }
    }
}

/// Comma-separated list of quantities.
pub fn parse_list(text: &str, kind: Kind) -> Result<Vec<f64>, String> {
    let items: Vec<f64> = text
        .split(',')
        .map(|s| parse_quantity(s, kind))
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err("empty list".into());
    }
    Ok(items)
}

pub fn format_list(values: &[f64], kind: Kind) -> String {
    values
        .iter()
        .map(|v| format_quantity(*v, kind))
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lengths_need_units() {
        assert_eq!(parse_quantity("50nm", Kind::Length).unwrap(), 5e-6);
        assert_eq!(parse_quantity("1 um", Kind::Length).unwrap(), 1e-4);
        assert_eq!(parse_quantity("2cm", Kind::Length).unwrap(), 2.0);
        assert_eq!(parse_quantity("0.01m", Kind::Length).unwrap(), 1.0);
        assert!(parse_quantity("50", Kind::Length).unwrap_err().contains("missing length unit"));
    }

    #[test]
    fn optional_suffixes() {
        assert_eq!(parse_quantity("4", Kind::Temperature).unwrap(), 4.0);
        assert_eq!(parse_quantity("4K", Kind::Temperature).unwrap(), 4.0);
        assert_eq!(parse_quantity("1e9 s^-1", Kind::Frequency).unwrap(), 1e9);
        assert_eq!(parse_quantity("3.6e-15s", Kind::Time).unwrap(), 3.6e-15);
        assert!(parse_quantity("abc", Kind::Plain).is_err());
        assert!(parse_quantity("inf", Kind::Plain).is_err());
    }

    #[test]
    fn formatting_round_trips() {
        for v in [0.0, 1.0, 0.1 + 0.2, 5e-6, 1.3e-26, 6.4e-13, 1e15, 123456.789, -2.5e-300, 1e-4] {
            let s = format_number(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(format_number(1e-26), "1e-26");
        assert_eq!(format_number(0.5), "0.5");
        assert_eq!(format_quantity(5e-6, Kind::Length), "5e-6cm");
        let canonical = format_quantity(parse_quantity("50nm", Kind::Length).unwrap(), Kind::Length);
        let again = format_quantity(parse_quantity(&canonical, Kind::Length).unwrap(), Kind::Length);
        assert_eq!(canonical, again);
    }

    #[test]
    fn grids() {
        let g = GridSpec::parse("1:3:3", Kind::Plain).unwrap();
        assert_eq!(g.values(Spacing::Linear).unwrap(), vec![1.0, 2.0, 3.0]);
        let g = GridSpec::parse("1:100:3", Kind::Plain).unwrap();
        let v = g.values(Spacing::Log).unwrap();
        assert!((v[1] - 10.0).abs() < 1e-12);
        assert_eq!(v[2], 100.0);
        assert_eq!(GridSpec::parse("2", Kind::Plain).unwrap().count, 1);
        assert!(GridSpec::parse("1:2", Kind::Plain).is_err());
        assert!(GridSpec::parse("1:2:0", Kind::Plain).is_err());
        assert_eq!(GridSpec::parse("1nm:2nm:2", Kind::Length).unwrap().format(Kind::Length), "1e-7cm:2e-7cm:2");
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list("0.1, 1,10K", Kind::Temperature).unwrap(), vec![0.1, 1.0, 10.0]);
        assert_eq!(format_list(&[3.0, 10.0], Kind::Plain), "3,10");
        assert!(parse_list("1,,2", Kind::Plain).is_err());
    }
}
