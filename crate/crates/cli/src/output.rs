use serde::Serialize;
use serde_json::{Map, Value};

/// Serializes `value` and wraps every non-integer number as
/// `{"type": "float", "value": x}`; exact quantities are already strings.
pub fn json<T: Serialize>(value: &T) -> Result<String, String> {
    let v = serde_json::to_value(value).map_err(|e| e.to_string())?;
    let mut text = serde_json::to_string_pretty(&tag_floats(v)).map_err(|e| e.to_string())?;
    text.push('\n');
    Ok(text)
}

fn tag_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let mut m = Map::new();
            m.insert("type".into(), Value::String("float".into()));
            m.insert("value".into(), Value::Number(n));
            Value::Object(m)
        }
        Value::Array(xs) => Value::Array(xs.into_iter().map(tag_floats).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, x)| (k, tag_floats(x))).collect()),
        other => other,
    }
}

/// Renders rows with a fixed header.
pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> Result<String, String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| e.to_string())?;
    for r in rows {
        w.write_record(r).map_err(|e| e.to_string())?;
    }
    let bytes = w.into_inner().map_err(|e| e.to_string())?;
    String::from_utf8(bytes).map_err(|e| e.to_string())
}

/// Shortest representation that round-trips.
pub fn float(x: f64) -> String {
    format!("{x:?}")
}

pub fn opt_float(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}
