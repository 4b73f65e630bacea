//! Machine-readable reports with deterministic serialization.
//!
//! Floats are printed with 17 significant digits so values round-trip
//! losslessly and repeated runs produce byte-identical output.

use serde::Serialize;
use serde_json::ser::Formatter;
use std::io;

pub const REPORT_SCHEMA: &str = "hgk-report/1";

/// JSON formatter printing every float with 17 significant digits.
#[derive(Default)]
pub struct SigDigitFormatter;

impl Formatter for SigDigitFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        if value == value.trunc() && value.abs() < 1e15 {
            // integral values stay readable and exact
            return write!(writer, "{:.1}", value);
        }
        write!(writer, "{:.16e}", value)
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.write_f64(writer, value as f64)
    }
}

/// Serialize any value with the 17-significant-digit float convention.
pub fn to_canonical_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigDigitFormatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("json is utf8"))
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub tool_version: &'static str,
    pub config_digest: String,
    pub command: String,
    pub seed: u64,
    pub payload: serde_json::Value,
}

impl Report {
    pub fn new(config_digest: String, command: &str, seed: u64, payload: serde_json::Value) -> Report {
        Report {
            schema: REPORT_SCHEMA,
            tool_version: crate::TOOL_VERSION,
            config_digest,
            command: command.to_string(),
            seed,
            payload,
        }
    }

    pub fn to_json(&self) -> String {
        to_canonical_json(self).expect("report serializes")
    }
}

/// Helper: serialize a matrix into the report payload convention.
pub fn mat_value(m: &crate::linalg::CMat) -> serde_json::Value {
    serde_json::to_value(crate::config::mat_to_json(m)).expect("matrix serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_17_significant_digits() {
        let v = serde_json::json!({"x": 0.1, "n": 3.0});
        let s = to_canonical_json(&v).unwrap();
        assert!(s.contains("1.0000000000000001e-1"), "got {s}");
        assert!(s.contains("3.0"), "got {s}");
    }

    #[test]
    fn round_trip_is_lossless() {
        for &x in &[0.1, std::f64::consts::PI, 1.0 / 3.0, 6.02e23, -1.6e-35] {
            let s = to_canonical_json(&serde_json::json!(x)).unwrap();
            let back: f64 = serde_json::from_str(&s).unwrap();
            assert_eq!(back, x, "serialized as {s}");
        }
    }

    #[test]
    fn repeated_serialization_is_byte_identical() {
        let r1 = Report::new("sha256:x".into(), "validate", 1, serde_json::json!({"a": [0.25, 1.5]}));
        let r2 = Report::new("sha256:x".into(), "validate", 1, serde_json::json!({"a": [0.25, 1.5]}));
        assert_eq!(r1.to_json(), r2.to_json());
    }
}
