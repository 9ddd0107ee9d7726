//! Machine-readable result records with fixed-precision floats.

use serde::Serialize;
use serde_json::Value;

/// Significant digits kept in every serialized float.
pub const SIGNIFICANT_DIGITS: usize = 15;

/// Rounds to [`SIGNIFICANT_DIGITS`] significant digits. Non-finite values
/// pass through unchanged.
pub fn round_significant(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Rounds every float inside a JSON value.
pub fn round_json(value: Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = round_significant(n.as_f64().expect("f64 number"));
            serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_json).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

/// Pretty JSON of any serializable report, floats rounded.
pub fn to_rounded_json<T: Serialize>(report: &T) -> String {
    let value = serde_json::to_value(report).expect("reports serialize to JSON");
    serde_json::to_string_pretty(&round_json(value)).expect("JSON values print")
}

/// One computed quantity. `runtime_ms` is the only field that varies
/// between identical runs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Record {
    pub observable: String,
    pub method: String,
    pub graph: String,
    pub beta: Option<f64>,
    pub value: f64,
    pub error_bound: Option<f64>,
    pub runtime_ms: f64,
}

impl Record {
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("records serialize to JSON");
        serde_json::to_string(&round_json(value)).expect("JSON values print")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding() {
        assert_eq!(round_significant(0.1 + 0.2), 0.3);
        assert_eq!(round_significant(1.0 / 3.0), 0.333333333333333);
        assert_eq!(round_significant(-2.5e-300), -2.5e-300);
        assert!(round_significant(f64::NAN).is_nan());
        assert_eq!(round_significant(0.0), 0.0);
    }

    #[test]
    fn nested_values() {
        let v = serde_json::json!({"a": [1.0000000000000002, 2], "b": {"c": 0.30000000000000004}, "d": "text"});
        let r = round_json(v);
        assert_eq!(r, serde_json::json!({"a": [1.0, 2], "b": {"c": 0.3}, "d": "text"}));
    }

    #[test]
    fn record_line() {
        let r = Record {
            observable: "Z".into(),
            method: "det".into(),
            graph: "rectangle 2x2".into(),
            beta: Some(0.5),
            value: 1.0 / 3.0,
            error_bound: None,
            runtime_ms: 1.25,
        };
        assert_eq!(
            r.to_json(),
            r#"{"observable":"Z","method":"det","graph":"rectangle 2x2","beta":0.5,"value":0.333333333333333,"error_bound":null,"runtime_ms":1.25}"#
        );
    }
}
