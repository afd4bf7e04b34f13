#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use regex::Regex;
use serde_json::Value;

pub fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn excerpt() -> PathBuf {
    root().join("data/maddison_excerpt.csv")
}

pub fn hypergrowth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypergrowth"))
        .args(args)
        .env_remove("HYPERGROWTH_DATA")
        .output()
        .expect("binary runs")
}

/// Runs with `--input` pointing at the excerpt and parses stdout as JSON.
pub fn json(args: &[&str]) -> Value {
    let input = excerpt();
    let mut full: Vec<&str> = args.to_vec();
    full.extend(["--input", input.to_str().unwrap()]);
    let out = hypergrowth(&full);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

pub fn schema() -> Value {
    let text = std::fs::read_to_string(root().join("schemas/report_bundle.schema.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

/// Checks `value` against the keyword subset used by the bundled schema:
/// type, const, enum, required, properties, additionalProperties, items,
/// prefixItems, minItems, maxItems, oneOf, $ref, pattern and numeric bounds.
pub fn validate(schema: &Value, value: &Value) -> Result<(), String> {
    check(schema, schema, value, "$")
}

fn check(root: &Value, s: &Value, v: &Value, at: &str) -> Result<(), String> {
    let s = match s {
        Value::Bool(true) => return Ok(()),
        Value::Bool(false) => return Err(format!("{at}: not allowed")),
        Value::Object(o) => o,
        _ => return Err(format!("{at}: bad schema")),
    };
    if let Some(r) = s.get("$ref").and_then(Value::as_str) {
        let name = r
            .strip_prefix("#/$defs/")
            .ok_or(format!("{at}: unsupported $ref {r}"))?;
        return check(root, &root["$defs"][name], v, at);
    }
    if let Some(options) = s.get("oneOf").and_then(Value::as_array) {
        let n = options.iter().filter(|o| check(root, o, v, at).is_ok()).count();
        if n != 1 {
            return Err(format!("{at}: matches {n} oneOf branches"));
        }
    }
    if let Some(t) = s.get("type") {
        let types: Vec<&str> = match t {
            Value::String(x) => vec![x.as_str()],
            Value::Array(xs) => xs.iter().filter_map(Value::as_str).collect(),
            _ => vec![],
        };
        if !types.iter().any(|t| has_type(v, t)) {
            return Err(format!("{at}: expected {types:?}, got {v}"));
        }
    }
    if let Some(c) = s.get("const") {
        if c != v {
            return Err(format!("{at}: expected {c}"));
        }
    }
    if let Some(e) = s.get("enum").and_then(Value::as_array) {
        if !e.contains(v) {
            return Err(format!("{at}: {v} not in {e:?}"));
        }
    }
    if let (Some(p), Some(x)) = (s.get("pattern").and_then(Value::as_str), v.as_str()) {
        if !Regex::new(p).unwrap().is_match(x) {
            return Err(format!("{at}: {x:?} does not match {p}"));
        }
    }
    if let Some(x) = v.as_f64() {
        let bound = |k: &str| s.get(k).and_then(Value::as_f64);
        if bound("minimum").is_some_and(|m| x < m)
            || bound("maximum").is_some_and(|m| x > m)
            || bound("exclusiveMinimum").is_some_and(|m| x <= m)
        {
            return Err(format!("{at}: {x} out of bounds"));
        }
    }
    if let Some(obj) = v.as_object() {
        for r in s.get("required").and_then(Value::as_array).into_iter().flatten() {
            let r = r.as_str().unwrap();
            if !obj.contains_key(r) {
                return Err(format!("{at}: missing {r}"));
            }
        }
        let props = s.get("properties").and_then(Value::as_object);
        for (k, child) in obj {
            match props.and_then(|p| p.get(k)) {
                Some(ps) => check(root, ps, child, &format!("{at}.{k}"))?,
                None if s.get("additionalProperties") == Some(&Value::Bool(false)) => {
                    return Err(format!("{at}: unexpected property {k}"))
                }
                None => {}
            }
        }
    }
    if let Some(arr) = v.as_array() {
        let len = |k: &str| s.get(k).and_then(Value::as_u64).map(|n| n as usize);
        if len("minItems").is_some_and(|m| arr.len() < m) || len("maxItems").is_some_and(|m| arr.len() > m) {
            return Err(format!("{at}: {} items out of bounds", arr.len()));
        }
        let prefix = s
            .get("prefixItems")
            .and_then(Value::as_array)
            .map_or(&[][..], |p| p.as_slice());
        for (i, item) in arr.iter().enumerate() {
            let here = format!("{at}[{i}]");
            match prefix.get(i) {
                Some(ps) => check(root, ps, item, &here)?,
                None => {
                    if let Some(is) = s.get("items") {
                        check(root, is, item, &here)?;
                    }
                }
            }
        }
    }
    Ok(())
}

fn has_type(v: &Value, t: &str) -> bool {
    match t {
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "boolean" => v.is_boolean(),
        "null" => v.is_null(),
        "number" => v.is_number(),
        "integer" => v.is_i64() || v.is_u64(),
        _ => false,
    }
}

pub fn rel(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}

/// Per-capita level that wobbles around 500 until 1750 (years 1000..=1750
/// every 25) and then climbs towards a singularity at 1830.
pub fn takeoff_fixture_csv() -> String {
    const SIGNS: &[u8] = b"+++--+---++-+++--+--++++-+---++";
    let mut rows = String::from("region,kind,year,value\n");
    let pop = |t: f64| 1000.0 / (7.739 - 3.765e-3 * t);
    let mut years_pc: Vec<(f64, f64)> = SIGNS
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let m = 0.08 + 0.04 * ((i * 7) % 5) as f64 / 4.0;
            let sign = if s == b'+' { 1.0 } else { -1.0 };
            (1000.0 + 25.0 * i as f64, 500.0 * (1.0 + sign * m))
        })
        .collect();
    for dt in [10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0] {
        years_pc.push((1750.0 + dt, 500.0 / (1.0 - dt / 80.0)));
    }
    for &(t, _) in &years_pc {
        rows += &format!("Control,population,{t},{}\n", pop(t));
    }
    for &(t, pc) in &years_pc {
        rows += &format!("Control,gdp,{t},{}\n", pop(t) * pc);
    }
    rows
}
