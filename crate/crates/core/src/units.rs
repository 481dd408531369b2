//! Parsing of unit-suffixed quantity strings such as `"200 pH"` or
//! `"0.33 nV/rtHz"` into SI values.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Current,
    Resistance,
    Inductance,
    Capacitance,
    Temperature,
    Frequency,
    Time,
    Power,
    VoltageDensity,
    CurrentDensity,
}

impl Dimension {
    fn base_units(self) -> &'static [&'static str] {
        match self {
            Dimension::Current => &["A"],
            Dimension::Resistance => &["Ohm", "ohm", "\u{3a9}", "\u{2126}"],
            Dimension::Inductance => &["H"],
            Dimension::Capacitance => &["F"],
            Dimension::Temperature => &["K"],
            Dimension::Frequency => &["Hz"],
            Dimension::Time => &["s"],
            Dimension::Power => &["W"],
            Dimension::VoltageDensity => &["V/rtHz"],
            Dimension::CurrentDensity => &["A/rtHz"],
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.base_units()[0])
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UnitError {
    #[error("'{0}' has no numeric value")]
    NoNumber(String),
    #[error("'{input}' has no unit; expected a value in {expected}")]
    MissingUnit { input: String, expected: Dimension },
    #[error("'{input}' has unit '{unit}'; expected {expected}")]
    WrongUnit {
        input: String,
        unit: String,
        expected: Dimension,
    },
}

fn prefix_scale(prefix: &str) -> Option<f64> {
    Some(match prefix {
        "" => 1.0,
        "f" => 1e-15,
        "p" => 1e-12,
        "n" => 1e-9,
        "u" | "\u{b5}" | "\u{3bc}" => 1e-6,
        "m" => 1e-3,
        "k" => 1e3,
        "M" => 1e6,
        "G" => 1e9,
        _ => return None,
    })
}

/// Parses `"<number> <prefix><unit>"`; the space is optional.
pub fn parse_quantity(input: &str, expected: Dimension) -> Result<f64, UnitError> {
    let s = input.trim();
    let split = s
        .char_indices()
        .find(|&(i, c)| {
            !(c.is_ascii_digit() || matches!(c, '.' | '+' | '-'))
                && !((c == 'e' || c == 'E') && exponent_follows(&s[i + 1..]))
        })
        .map_or(s.len(), |(i, _)| i);
    let (number, unit) = (s[..split].trim(), s[split..].trim());
    let value: f64 = number
        .parse()
        .map_err(|_| UnitError::NoNumber(input.to_owned()))?;
    if unit.is_empty() {
        return Err(UnitError::MissingUnit {
            input: input.to_owned(),
            expected,
        });
    }
    let wrong = || UnitError::WrongUnit {
        input: input.to_owned(),
        unit: unit.to_owned(),
        expected,
    };
    let scale = expected
        .base_units()
        .iter()
        .find_map(|base| unit.strip_suffix(base).and_then(prefix_scale))
        .ok_or_else(wrong)?;
    Ok(value * scale)
}

fn exponent_follows(rest: &str) -> bool {
    let rest = rest.strip_prefix(['+', '-']).unwrap_or(rest);
    rest.starts_with(|c: char| c.is_ascii_digit())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn common_values() {
        let cases = [
            ("200 pH", Dimension::Inductance, 200e-12),
            ("6.3 uA", Dimension::Current, 6.3e-6),
            ("6.3µA", Dimension::Current, 6.3e-6),
            ("6 Ohm", Dimension::Resistance, 6.0),
            ("1 kΩ", Dimension::Resistance, 1e3),
            ("150 mK", Dimension::Temperature, 0.15),
            ("50 MHz", Dimension::Frequency, 50e6),
            ("0.33 nV/rtHz", Dimension::VoltageDensity, 0.33e-9),
            ("2.6 pA/rtHz", Dimension::CurrentDensity, 2.6e-12),
            ("1e-9 F", Dimension::Capacitance, 1e-9),
            ("2.5E+3 s", Dimension::Time, 2.5e3),
            ("0.834 nW", Dimension::Power, 0.834e-9),
            ("4 K", Dimension::Temperature, 4.0),
        ];
        for (s, d, v) in cases {
            assert_relative_eq!(parse_quantity(s, d).unwrap(), v, max_relative = 1e-15);
        }
    }

    #[test]
    fn rejections() {
        assert!(matches!(
            parse_quantity("200", Dimension::Inductance),
            Err(UnitError::MissingUnit { .. })
        ));
        assert!(matches!(
            parse_quantity("200 pA", Dimension::Inductance),
            Err(UnitError::WrongUnit { .. })
        ));
        assert!(matches!(
            parse_quantity("5 MH", Dimension::Frequency),
            Err(UnitError::WrongUnit { .. })
        ));
        assert!(matches!(
            parse_quantity("3 xH", Dimension::Inductance),
            Err(UnitError::WrongUnit { .. })
        ));
        assert!(matches!(
            parse_quantity("pH", Dimension::Inductance),
            Err(UnitError::NoNumber(_))
        ));
    }
}
