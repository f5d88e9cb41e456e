#![allow(dead_code)]

use serde_json::Value;

pub fn oracles() -> Value {
    let text = include_str!("../data/oracles.json");
    serde_json::from_str(text).expect("oracle file parses")
}

pub fn f(v: &Value) -> f64 {
    v.as_f64().expect("number")
}

pub fn floats(v: &Value) -> Vec<f64> {
    v.as_array().expect("array").iter().map(f).collect()
}
