//! Physical quantities written as `"<number> <unit>"` strings.
//!
//! Every quantity is normalized on the way in: frequencies to Hz, powers to
//! dBW, lengths to m, areas to km², angles to degrees, rates to bit/s.

use std::fmt;

/// What kind of quantity a field holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Frequency,
    Power,
    Decibel,
    AntennaGain,
    GainOverTemperature,
    Length,
    Area,
    Angle,
    DataRate,
}

impl Dimension {
    fn units(self) -> &'static [&'static str] {
        match self {
            Dimension::Frequency => &["Hz", "kHz", "KHz", "MHz", "GHz"],
            Dimension::Power => &["dBW", "dBm", "W", "mW"],
            Dimension::Decibel => &["dB"],
            Dimension::AntennaGain => &["dBi", "dB"],
            Dimension::GainOverTemperature => &["dB/K"],
            Dimension::Length => &["m", "km"],
            Dimension::Area => &["km2", "km²", "m2", "m²"],
            Dimension::Angle => &["deg", "°"],
            Dimension::DataRate => &["bps", "kbps", "Mbps", "Gbps"],
        }
    }

    /// Unit used when writing a normalized value back out.
    pub fn canonical_unit(self) -> &'static str {
        match self {
            Dimension::Frequency => "Hz",
            Dimension::Power => "dBW",
            Dimension::Decibel => "dB",
            Dimension::AntennaGain => "dBi",
            Dimension::GainOverTemperature => "dB/K",
            Dimension::Length => "m",
            Dimension::Area => "km2",
            Dimension::Angle => "deg",
            Dimension::DataRate => "bps",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dimension::Frequency => "frequency",
            Dimension::Power => "power",
            Dimension::Decibel => "decibel ratio",
            Dimension::AntennaGain => "antenna gain",
            Dimension::GainOverTemperature => "G/T",
            Dimension::Length => "length",
            Dimension::Area => "area",
            Dimension::Angle => "angle",
            Dimension::DataRate => "data rate",
        })
    }
}

/// Why a quantity string was rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QuantityError {
    /// Malformed number or missing unit.
    Syntax(String),
    /// Well-formed, but the unit belongs to another dimension.
    Unit(String),
}

impl fmt::Display for QuantityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuantityError::Syntax(m) | QuantityError::Unit(m) => f.write_str(m),
        }
    }
}

/// Parses `"<number> <unit>"` into the dimension's normalized unit.
pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64, QuantityError> {
    let t = text.trim();
    let split = t
        .char_indices()
        .find(|&(_, c)| !(c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E')))
        .map(|(i, _)| i)
        .unwrap_or(t.len());
    let (num, unit) = t.split_at(split);
    let (num, unit) = (num.trim(), unit.trim());
    let value: f64 = num
        .parse()
        .map_err(|_| QuantityError::Syntax(format!("`{t}` does not start with a number")))?;
    if !value.is_finite() {
        return Err(QuantityError::Syntax(format!("`{t}` is not finite")));
    }
    if unit.is_empty() {
        return Err(QuantityError::Unit(format!(
            "`{t}` has no unit; expected one of {}",
            dim.units().join(", ")
        )));
    }
    if !dim.units().contains(&unit) {
        return Err(QuantityError::Unit(format!(
            "unit `{unit}` is not a {dim} unit; expected one of {}",
            dim.units().join(", ")
        )));
    }
    let normalized = match (dim, unit) {
        (Dimension::Frequency, "Hz") => value,
        (Dimension::Frequency, "kHz" | "KHz") => value * 1e3,
        (Dimension::Frequency, "MHz") => value * 1e6,
        (Dimension::Frequency, "GHz") => value * 1e9,
        (Dimension::Power, "dBW") => value,
        (Dimension::Power, "dBm") => value - 30.0,
        (Dimension::Power, "W" | "mW") => {
            if value <= 0.0 {
                return Err(QuantityError::Syntax(format!("`{t}`: linear power must be > 0")));
            }
            let watts = if unit == "W" { value } else { value / 1e3 };
            10.0 * watts.log10()
        }
        (Dimension::Length, "km") => value * 1e3,
        (Dimension::Area, "m2" | "m²") => value / 1e6,
        (Dimension::DataRate, "kbps") => value * 1e3,
        (Dimension::DataRate, "Mbps") => value * 1e6,
        (Dimension::DataRate, "Gbps") => value * 1e9,
        _ => value,
    };
    Ok(normalized)
}

/// Parses into an explicit target unit of the dimension. A value already
/// written in that unit is returned verbatim, so `"3.5 GHz"` read in GHz is
/// exactly 3.5.
pub fn parse_quantity_in(text: &str, dim: Dimension, unit: &str) -> Result<f64, QuantityError> {
    let normalized = parse_quantity(text, dim)?;
    let t = text.trim();
    if let Some(num) = t.strip_suffix(unit) {
        if let Ok(v) = num.trim().parse::<f64>() {
            return Ok(v);
        }
    }
    let scale = parse_quantity(&format!("1 {unit}"), dim)?;
    Ok(normalized / scale)
}

/// Writes a normalized value; [`parse_quantity`] reads it back exactly.
pub fn format_quantity(value: f64, dim: Dimension) -> String {
    format!("{value} {}", dim.canonical_unit())
}

/// Parses `"<x> m, <y> m"` into a planar point in meters.
pub fn parse_point(text: &str) -> Result<(f64, f64), QuantityError> {
    let mut parts = text.split(',');
    match (parts.next(), parts.next(), parts.next()) {
        (Some(x), Some(y), None) => Ok((
            parse_quantity(x, Dimension::Length)?,
            parse_quantity(y, Dimension::Length)?,
        )),
        _ => Err(QuantityError::Syntax(format!("`{text}` is not an `<x> m, <y> m` point"))),
    }
}

pub fn format_point(x: f64, y: f64) -> String {
    format!("{x} m, {y} m")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalizes_units() {
        assert_eq!(parse_quantity("20 MHz", Dimension::Frequency).unwrap(), 20e6);
        assert_eq!(parse_quantity("360 kHz", Dimension::Frequency).unwrap(), 360e3);
        assert_eq!(parse_quantity("3.5GHz", Dimension::Frequency).unwrap(), 3.5e9);
        assert_eq!(parse_quantity("33 dBm", Dimension::Power).unwrap(), 3.0);
        assert!((parse_quantity("2 W", Dimension::Power).unwrap() - 3.0103).abs() < 1e-4);
        assert!((parse_quantity("200 mW", Dimension::Power).unwrap() + 6.9897).abs() < 1e-4);
        assert_eq!(parse_quantity("600 km", Dimension::Length).unwrap(), 600e3);
        assert_eq!(parse_quantity("0.041 km2", Dimension::Area).unwrap(), 0.041);
        assert_eq!(parse_quantity("41000 m²", Dimension::Area).unwrap(), 0.041);
        assert_eq!(parse_quantity("-31.6 dB/K", Dimension::GainOverTemperature).unwrap(), -31.6);
        assert_eq!(parse_quantity("30 deg", Dimension::Angle).unwrap(), 30.0);
        assert_eq!(parse_quantity("50 Mbps", Dimension::DataRate).unwrap(), 50e6);
        assert_eq!(parse_quantity("1e3 m", Dimension::Length).unwrap(), 1000.0);
        assert_eq!(parse_quantity_in("3.5 GHz", Dimension::Frequency, "GHz").unwrap(), 3.5);
        assert_eq!(parse_quantity_in("3500 MHz", Dimension::Frequency, "GHz").unwrap(), 3.5);
    }

    #[test]
    fn rejects_bad_text() {
        assert!(matches!(parse_quantity("20", Dimension::Frequency), Err(QuantityError::Unit(_))));
        assert!(matches!(parse_quantity("20 dB", Dimension::Frequency), Err(QuantityError::Unit(_))));
        assert!(matches!(parse_quantity("MHz", Dimension::Frequency), Err(QuantityError::Syntax(_))));
        assert!(matches!(parse_quantity("-1 W", Dimension::Power), Err(QuantityError::Syntax(_))));
        assert!(parse_point("1 m").is_err());
        assert_eq!(parse_point("-150 m, 0.2 km").unwrap(), (-150.0, 200.0));
    }

    proptest! {
        #[test]
        fn canonical_round_trip(v in -1e12_f64..1e12) {
            for dim in [Dimension::Frequency, Dimension::Power, Dimension::Length, Dimension::Area, Dimension::DataRate] {
                prop_assert_eq!(parse_quantity(&format_quantity(v, dim), dim).unwrap(), v);
            }
        }
    }
}
