use orthant_walks::classify::fmt15;
use serde_json::{Map, Number, Value};

/// A command's result: the JSON report and, where a table is natural, its CSV form.
pub struct Report {
    pub json: Value,
    pub csv: Option<String>,
}

impl Report {
    pub fn json(json: Value) -> Self {
        Report { json, csv: None }
    }

    pub fn with_csv(json: Value, csv: String) -> Self {
        Report { json, csv: Some(csv) }
    }
}

/// Rounds every float to 15 significant digits so reports are stable across platforms.
pub fn canonical(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            fmt15(x)
                .parse::<f64>()
                .ok()
                .and_then(Number::from_f64)
                .map(Value::Number)
                .unwrap_or(Value::Null)
        }
        Value::Array(xs) => Value::Array(xs.into_iter().map(canonical).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, canonical(v))).collect()),
        other => other,
    }
}

pub fn render_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// Fallback CSV: one `key,value` row per leaf, keys joined with dots.
pub fn flatten_csv(v: &Value) -> String {
    let mut out = String::from("key,value\n");
    let mut rows = Vec::new();
    flatten("", v, &mut rows);
    for (k, v) in rows {
        out.push_str(&csv_field(&k));
        out.push(',');
        out.push_str(&csv_field(&v));
        out.push('\n');
    }
    out
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => {
            if m.is_empty() {
                rows.push((prefix.to_string(), String::new()));
            }
            for (k, x) in m {
                flatten(&join(k), x, rows);
            }
        }
        Value::Array(xs) => {
            if xs.is_empty() {
                rows.push((prefix.to_string(), String::new()));
            }
            for (i, x) in xs.iter().enumerate() {
                flatten(&join(&i.to_string()), x, rows);
            }
        }
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        Value::Null => rows.push((prefix.to_string(), String::new())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn object(pairs: impl IntoIterator<Item = (&'static str, Value)>) -> Value {
    Value::Object(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect::<Map<_, _>>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_are_rounded() {
        let v = canonical(json!({"x": 0.1 + 0.2, "n": 3, "s": "a"}));
        assert_eq!(v, json!({"x": 0.3, "n": 3, "s": "a"}));
    }

    #[test]
    fn flattening() {
        let csv = flatten_csv(&json!({"a": [1, 2], "b": {"c": "x,y"}}));
        assert_eq!(csv, "key,value\na.0,1\na.1,2\nb.c,\"x,y\"\n");
    }
}
