//! Fixed float formatting and artifact writing.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{Number, Value};

use crate::fail::Failure;

/// `%.15e` as printf writes it: `1.571428571428571e-01`.
pub fn fmt_e(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{v:.15e}");
    let (mant, exp) = s.split_once('e').expect("exponent");
    let e: i32 = exp.parse().expect("exponent digits");
    let sign = if e < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", e.abs())
}

/// Rewrites every float in `v` to the fixed format; integers stay integers.
fn fix_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => match n.as_f64() {
            Some(f) if f.is_finite() => Value::Number(fmt_e(f).parse::<Number>().expect("valid number")),
            _ => Value::Null,
        },
        Value::Array(a) => Value::Array(a.into_iter().map(fix_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, fix_floats(v))).collect()),
        other => other,
    }
}

pub fn to_value<T: Serialize>(t: &T) -> Value {
    fix_floats(serde_json::to_value(t).expect("serializable report"))
}

pub fn json_text<T: Serialize>(t: &T) -> String {
    let mut s = serde_json::to_string_pretty(&to_value(t)).expect("serializable report");
    s.push('\n');
    s
}

/// Writes to `out`, or stdout when absent.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(Failure::io),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes()).map_err(Failure::io)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printf_style() {
        assert_eq!(fmt_e(11.0 / 70.0), "1.571428571428571e-01");
        assert_eq!(fmt_e(0.0), "0.000000000000000e+00");
        assert_eq!(fmt_e(-1234.5), "-1.234500000000000e+03");
        assert_eq!(fmt_e(1e-300), "1.000000000000000e-300");
    }

    #[test]
    fn json_floats_are_fixed() {
        let v = to_value(&serde_json::json!({"a": 0.5, "n": 3, "v": [1.0, f64::NAN]}));
        assert_eq!(v.to_string(), r#"{"a":5.000000000000000e-01,"n":3,"v":[1.000000000000000e+00,null]}"#);
    }
}
