//! Canonical JSON: lexicographically sorted keys, reals with 17 significant
//! digits, two-space indentation, trailing newline.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

pub fn to_canonical_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    // serde_json's Map is a BTreeMap without `preserve_order`, so keys come out sorted.
    let value = serde_json::to_value(value)
        .map_err(|e| Error::Validation(format!("report is not serializable: {e}")))?;
    let mut out = String::new();
    write_value(&mut out, &value, 0)?;
    out.push('\n');
    Ok(out)
}

pub fn save_report<T: Serialize + ?Sized>(path: &Path, report: &T) -> Result<()> {
    let text = to_canonical_json(report)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_value(out: &mut String, value: &Value, depth: usize) -> Result<()> {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                write!(out, "{i}").unwrap();
            } else if let Some(u) = n.as_u64() {
                write!(out, "{u}").unwrap();
            } else {
                let x = n.as_f64().expect("json number is i64, u64 or f64");
                out.push_str(&format_real(x)?);
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string escapes")),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return Ok(());
            }
            // arrays of scalars stay on one line
            if items.iter().all(|v| !v.is_array() && !v.is_object()) {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, item, depth + 1)?;
                }
                out.push(']');
                return Ok(());
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                indent(out, depth + 1);
                write_value(out, item, depth + 1)?;
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            indent(out, depth);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return Ok(());
            }
            out.push_str("{\n");
            for (i, (k, v)) in map.iter().enumerate() {
                indent(out, depth + 1);
                out.push_str(&serde_json::to_string(k).expect("key escapes"));
                out.push_str(": ");
                write_value(out, v, depth + 1)?;
                if i + 1 < map.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            indent(out, depth);
            out.push('}');
        }
    }
    Ok(())
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

/// Formats a finite real with exactly 17 significant digits. Positional
/// notation for decimal exponents in [-5, 16], scientific otherwise.
pub fn format_real(x: f64) -> Result<String> {
    if !x.is_finite() {
        return Err(Error::Validation(format!("cannot serialize non-finite real {x}")));
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("`e` in scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    debug_assert_eq!(digits.len(), 17);

    if !(-5..=16).contains(&exp) {
        return Ok(format!("{sign}{mantissa}e{exp}"));
    }
    let s = if exp >= 0 {
        let split = exp as usize + 1;
        let (int, frac) = digits.split_at(split);
        if frac.is_empty() {
            format!("{sign}{int}.0")
        } else {
            format!("{sign}{int}.{frac}")
        }
    } else {
        let zeros = "0".repeat((-exp - 1) as usize);
        format!("{sign}0.{zeros}{digits}")
    };
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tenth_uses_seventeen_digits() {
        assert_eq!(format_real(0.1).unwrap(), "0.10000000000000001");
        assert_eq!(format_real(1.0).unwrap(), "1.0000000000000000");
        assert_eq!(format_real(0.0).unwrap(), "0.0000000000000000");
        assert_eq!(format_real(-2.5).unwrap(), "-2.5000000000000000");
        assert_eq!(format_real(1e-7).unwrap(), "9.9999999999999995e-8");
        assert_eq!(format_real(1e20).unwrap(), "1.0000000000000000e20");
    }

    #[test]
    fn non_finite_is_rejected() {
        assert!(format_real(f64::NAN).is_err());
        assert!(format_real(f64::INFINITY).is_err());
    }

    #[test]
    fn keys_are_sorted_and_empty_arrays_kept() {
        let v = serde_json::json!({"zeta": [], "alpha": {"b": 1, "a": 0.5}});
        let text = to_canonical_json(&v).unwrap();
        assert_eq!(
            text,
            "{\n  \"alpha\": {\n    \"a\": 0.50000000000000000,\n    \"b\": 1\n  },\n  \"zeta\": []\n}\n"
        );
    }

    proptest! {
        #[test]
        fn reals_round_trip_bit_exactly(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
            let s = format_real(x).unwrap();
            let back: f64 = s.parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
            prop_assert!(serde_json::from_str::<f64>(&s).is_ok());
        }
    }
}
