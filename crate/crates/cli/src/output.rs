use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;

/// Integers that fit in a u64 become JSON numbers, larger ones decimal strings.
pub fn big_uint(x: &BigUint) -> Value {
    match x.to_u64() {
        Some(v) => json!(v),
        None => json!(x.to_string()),
    }
}

pub fn big_int(x: &BigInt) -> Value {
    match (x.to_i64(), x.to_u64()) {
        (Some(v), _) => json!(v),
        (None, Some(v)) => json!(v),
        _ => json!(x.to_string()),
    }
}

/// Integral rationals follow [`big_int`]; others become `"p/q"` strings.
pub fn rational(q: &BigRational) -> Value {
    if q.denom().is_one() {
        big_int(q.numer())
    } else {
        json!(q.to_string())
    }
}

pub fn with_config(config: &RunConfig, body: impl Serialize) -> String {
    let mut value = serde_json::to_value(body).expect("output serializes");
    if let Value::Object(map) = &mut value {
        map.insert("config".into(), serde_json::to_value(config).expect("config serializes"));
    }
    serde_json::to_string(&value).expect("output serializes")
}

pub fn config_line(config: &RunConfig) -> String {
    serde_json::to_string(&json!({ "config": config })).expect("config serializes")
}

/// CSV with the resolved config as a leading `#` comment.
pub struct Csv {
    out: String,
}

impl Csv {
    pub fn new(config: &RunConfig, header: &[&str]) -> Self {
        let config = serde_json::to_string(config).expect("config serializes");
        let mut out = format!("# config: {config}\n");
        out.push_str(&header.join(","));
        out.push('\n');
        Csv { out }
    }

    pub fn row(&mut self, cells: &[String]) {
        let quoted: Vec<String> = cells.iter().map(|c| quote(c)).collect();
        self.out.push_str(&quoted.join(","));
        self.out.push('\n');
    }

    pub fn finish(mut self) -> String {
        self.out.pop();
        self.out
    }
}

fn quote(cell: &str) -> String {
    if cell.contains([',', '"', '\n']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

/// Doubles print in shortest round-trip form; non-finite values as empty cells.
pub fn float_cell(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else {
        String::new()
    }
}

pub fn value_cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}
