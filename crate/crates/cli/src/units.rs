//! Quantities with unit suffixes, converted to SI at the boundary.

use std::f64::consts::PI;
use std::fmt;

use qforce_core::constants::C;
use serde::{Deserialize, Serialize};

/// A config value given either as a bare SI number or as text like "1550 nm".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Number(f64),
    Text(String),
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::Number(v) => write!(f, "{v}"),
            Quantity::Text(s) => write!(f, "\"{s}\""),
        }
    }
}

/// Splits "12.5um", "12.5 µm" or "1e15 rad/s" into number and suffix.
pub fn split(text: &str) -> Result<(f64, String), String> {
    let t = text.trim();
    let end = t
        .char_indices()
        .find(|&(i, c)| {
            !(c.is_ascii_digit()
                || c == '.'
                || c == '+'
                || c == '-'
                || ((c == 'e' || c == 'E') && is_exponent(t, i)))
        })
        .map(|(i, _)| i)
        .unwrap_or(t.len());
    let (num, unit) = t.split_at(end);
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| format!("cannot read a number from \"{text}\""))?;
    Ok((value, unit.trim().to_string()))
}

fn is_exponent(t: &str, i: usize) -> bool {
    // 'e' counts as an exponent only when followed by a digit or sign and preceded by a digit.
    let before = t[..i]
        .chars()
        .last()
        .is_some_and(|c| c.is_ascii_digit() || c == '.');
    let after = t[i + 1..]
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_digit() || c == '+' || c == '-');
    before && after
}

fn with_unit(
    q: &Quantity,
    what: &str,
    table: &[(&str, f64)],
    default_unit: &str,
) -> Result<f64, String> {
    let (v, unit) = match q {
        Quantity::Number(v) => (*v, String::new()),
        Quantity::Text(s) => split(s)?,
    };
    if unit.is_empty() {
        return Ok(v);
    }
    table
        .iter()
        .find(|(u, _)| *u == unit)
        .map(|(_, s)| scale(v, *s))
        .ok_or_else(|| {
            let known: Vec<_> = table.iter().map(|(u, _)| *u).collect();
            format!(
                "unknown {what} unit \"{unit}\" (bare numbers are {default_unit}; known: {})",
                known.join(", ")
            )
        })
}

/// v·s, dividing by an exact power of ten for decimal sub-units so that
/// "5 um" reads as the f64 nearest 5e-6.
fn scale(v: f64, s: f64) -> f64 {
    let inv = (1.0 / s).round();
    if s < 1.0 && (inv * s - 1.0).abs() < 1e-12 {
        v / inv
    } else {
        v * s
    }
}

const LENGTH: &[(&str, f64)] = &[
    ("m", 1.0),
    ("cm", 1e-2),
    ("mm", 1e-3),
    ("um", 1e-6),
    ("µm", 1e-6),
    ("μm", 1e-6),
    ("nm", 1e-9),
];

const CYCLIC: &[(&str, f64)] = &[
    ("Hz", 1.0),
    ("kHz", 1e3),
    ("MHz", 1e6),
    ("GHz", 1e9),
    ("THz", 1e12),
];

const ANGLE: &[(&str, f64)] = &[
    ("rad", 1.0),
    ("mrad", 1e-3),
    ("deg", PI / 180.0),
    ("°", PI / 180.0),
];

/// Length [m].
pub fn length(q: &Quantity) -> Result<f64, String> {
    with_unit(q, "length", LENGTH, "metres")
}

/// Polar angle [rad].
pub fn angle(q: &Quantity) -> Result<f64, String> {
    with_unit(q, "angle", ANGLE, "radians")
}

/// Temperature [K].
pub fn temperature(q: &Quantity) -> Result<f64, String> {
    with_unit(q, "temperature", &[("K", 1.0)], "kelvin")
}

/// Solid angle [sr].
pub fn solid_angle(q: &Quantity) -> Result<f64, String> {
    with_unit(q, "solid angle", &[("sr", 1.0)], "steradians")
}

/// Angular frequency [rad/s] of a carrier given as frequency or rad/s.
/// Bare numbers are rad/s.
pub fn angular_frequency(q: &Quantity) -> Result<f64, String> {
    if let Quantity::Text(s) = q {
        let (v, unit) = split(s)?;
        if let Some((_, scale)) = CYCLIC.iter().find(|(u, _)| *u == unit) {
            return Ok(2.0 * PI * v * scale);
        }
    }
    with_unit(q, "frequency", &[("rad/s", 1.0)], "rad/s")
}

/// Angular frequency [rad/s] of a spectral line given as a wavelength,
/// a frequency, or rad/s.
pub fn spectral_position(q: &Quantity) -> Result<f64, String> {
    if let Quantity::Text(s) = q {
        let (v, unit) = split(s)?;
        if let Some((_, scale)) = LENGTH.iter().find(|(u, _)| *u == unit) {
            return Ok(2.0 * PI * C / self::scale(v, *scale));
        }
    }
    angular_frequency(q)
}

/// How the number given for a bandwidth is to be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BandwidthUnit {
    /// The number is an angular frequency [rad/s].
    #[value(name = "rad_s")]
    RadS,
    /// The number is an ordinary frequency [Hz]; Δω = 2π times it.
    #[value(name = "hz")]
    Hz,
}

impl BandwidthUnit {
    pub fn as_str(&self) -> &'static str {
        match self {
            BandwidthUnit::RadS => "rad_s",
            BandwidthUnit::Hz => "hz",
        }
    }
}

/// Bandwidth [rad/s]. A suffix may scale the number but must agree with the unit.
pub fn bandwidth(q: &Quantity, unit: BandwidthUnit) -> Result<f64, String> {
    let (v, suffix) = match q {
        Quantity::Number(v) => (*v, String::new()),
        Quantity::Text(s) => split(s)?,
    };
    let scale = if suffix.is_empty() {
        1.0
    } else if let Some((_, s)) = CYCLIC.iter().find(|(u, _)| *u == suffix) {
        if unit != BandwidthUnit::Hz {
            return Err(format!(
                "bandwidth \"{suffix}\" suffix contradicts bandwidth_unit = \"rad_s\""
            ));
        }
        *s
    } else if suffix == "rad/s" {
        if unit != BandwidthUnit::RadS {
            return Err("bandwidth \"rad/s\" suffix contradicts bandwidth_unit = \"hz\"".into());
        }
        1.0
    } else {
        return Err(format!("unknown bandwidth unit \"{suffix}\""));
    };
    Ok(match unit {
        BandwidthUnit::RadS => v * scale,
        BandwidthUnit::Hz => 2.0 * PI * v * scale,
    })
}

/// Peak squeezing parameter from either r₀ or a noise reduction in dB.
pub fn squeezing(q: &Quantity) -> Result<f64, String> {
    match q {
        Quantity::Number(v) => Ok(*v),
        Quantity::Text(s) => {
            let (v, unit) = split(s)?;
            match unit.as_str() {
                "" => Ok(v),
                "dB" | "db" => Ok(qforce_core::squeezing_from_db(v)),
                other => Err(format!(
                    "unknown squeezing unit \"{other}\" (use a bare r0 or dB)"
                )),
            }
        }
    }
}
