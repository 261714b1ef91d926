//! Files written by the commands.
//!
//! CSV layouts, one header row each, columns in this order:
//!
//! - `surface.csv`: `tau,x,value`, time level outer, node inner.
//! - `boundary.csv`: `tau,x_boundary`.
//! - `rows.csv`: `lag,quantity,value`.
//!
//! JSON documents all share the envelope
//! `{version, kind, params, contract, grid, data}`. Numbers everywhere are
//! rounded to 12 significant digits; non-finite values become `null`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use lagput::fd::{Boundary, Row, Surface};
use serde::Serialize;
use serde_json::{json, Value};

use crate::scenario::Scenario;
use crate::Failure;

pub const FORMAT_VERSION: u32 = 1;

/// `v` rounded to 12 significant digits.
pub fn round12(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{v:.11e}").parse().expect("formatted float parses")
}

/// Shortest decimal that reads back as `round12(v)`.
pub fn num(v: f64) -> String {
    match serde_json::Number::from_f64(round12(v)) {
        Some(n) => n.to_string(),
        None => "nan".into(),
    }
}

fn round_all(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if !(n.is_i64() || n.is_u64()) {
                    *v = serde_json::Number::from_f64(round12(f)).map_or(Value::Null, Value::Number);
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_all),
        Value::Object(map) => map.values_mut().for_each(round_all),
        _ => {}
    }
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
}

/// Versioned JSON document with the scenario's parameters.
pub fn write_doc(dir: &Path, name: &str, kind: &str, scenario: &Scenario, grid: Value, data: impl Serialize) -> Result<(), Failure> {
    let mut doc = json!({
        "version": FORMAT_VERSION,
        "kind": kind,
        "params": scenario.market,
        "contract": {
            "maturity": scenario.contract.maturity(),
            "lag": scenario.contract.lag(),
        },
        "grid": grid,
        "data": serde_json::to_value(data).map_err(|e| Failure::Io(e.to_string()))?,
    });
    round_all(&mut doc);
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| Failure::Io(e.to_string()))?;
    text.push('\n');
    write(&dir.join(name), &text)
}

pub fn write_surface_csv(dir: &Path, s: &Surface) -> Result<(), Failure> {
    let g = &s.grid;
    let mut out = String::from("tau,x,value\n");
    for k in 0..=g.nt {
        let tau = num(g.tau(k));
        for i in 0..g.width() {
            let _ = writeln!(out, "{tau},{},{}", num(g.x(i)), num(s.values[k][i]));
        }
    }
    write(&dir.join("surface.csv"), &out)
}

pub fn write_boundary_csv(dir: &Path, b: &Boundary) -> Result<(), Failure> {
    let mut out = String::from("tau,x_boundary\n");
    for (t, x) in b.taus.iter().zip(&b.xs) {
        let _ = writeln!(out, "{},{}", num(*t), num(*x));
    }
    write(&dir.join("boundary.csv"), &out)
}

pub fn write_rows_csv(dir: &Path, rows: &[Row]) -> Result<(), Failure> {
    let mut out = String::from("lag,quantity,value\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", num(r.lag), r.quantity, num(r.value));
    }
    write(&dir.join("rows.csv"), &out)
}

pub fn surface_data(s: &Surface) -> Value {
    let g = &s.grid;
    json!({
        "taus": (0..=g.nt).map(|k| g.tau(k)).collect::<Vec<_>>(),
        "xs": (0..g.width()).map(|i| g.x(i)).collect::<Vec<_>>(),
        "values": s.values,
    })
}

pub fn grid_value(s: &Surface) -> Value {
    json!(s.grid)
}
