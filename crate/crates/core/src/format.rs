//! Text formatting helpers shared by the exporters and the CLI.

use crate::error::{Error, Result};

/// Formats a value with 12 significant digits in scientific notation.
/// Infinities render as `inf` / `-inf` so exported tables stay parseable.
pub fn sig12(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.11e}")
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Formats a value with 17 significant digits, enough for an exact `f64`
/// round-trip through text.
pub fn sig17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Parses a nonnegative extended real, accepting `inf` (any case) for the
/// infinity sentinel.
pub fn parse_extended(text: &str) -> Result<f64> {
    let t = text.trim();
    if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
        return Ok(f64::INFINITY);
    }
    t.parse::<f64>()
        .map_err(|_| Error::Parse(format!("expected a number or \"inf\", found {t:?}")))
}

/// serde adapter for extended-real fields: finite values serialize as
/// numbers, infinities as the strings `"inf"` / `"-inf"` (plain JSON has no
/// infinity literal).
pub mod ext_real {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, ser: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            ser.serialize_f64(*v)
        } else if *v > 0.0 {
            ser.serialize_str("inf")
        } else {
            ser.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(de)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(t) => super::parse_extended(&t).map_err(de::Error::custom),
        }
    }
}
