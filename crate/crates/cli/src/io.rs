//! Instance files.
//!
//! ```json
//! {"variables": [
//!   {"atoms": [[0, 0.5], [1, 0.5]], "label": "coin"},
//!   {"uniform": [0, 1], "points": 1000},
//!   {"exponential": [2.0], "copies": 3}
//! ]}
//! ```
//!
//! `copies` repeats an entry and `points` sets the quantile grid used to
//! discretize a parametric law.

use std::path::Path;

use serde_json::{json, Map, Value};

use prophetlab_core::dist::{DEFAULT_DISCRETIZATION, MASS_TOL};
use prophetlab_core::{Distribution, Error, Instance, Parametric};

use crate::CliError;

fn parse_err(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        location: location.into(),
        message: message.into(),
    }
}

fn number(v: &Value, loc: &str) -> Result<f64, Error> {
    v.as_f64().ok_or_else(|| parse_err(loc, "expected a number"))
}

fn params(entry: &Map<String, Value>, key: &str, count: usize, loc: &str) -> Result<Vec<f64>, Error> {
    let loc = format!("{loc}.{key}");
    let arr = entry[key].as_array().ok_or_else(|| parse_err(&loc, "expected an array"))?;
    if arr.len() != count {
        return Err(parse_err(&loc, format!("expected {count} parameters, got {}", arr.len())));
    }
    arr.iter().enumerate().map(|(j, v)| number(v, &format!("{loc}[{j}]"))).collect()
}

fn parse_variable(entry: &Value, loc: &str) -> Result<(Distribution, usize), Error> {
    let obj = entry.as_object().ok_or_else(|| parse_err(loc, "expected an object"))?;
    let kinds: Vec<&str> = ["atoms", "uniform", "exponential"]
        .into_iter()
        .filter(|k| obj.contains_key(*k))
        .collect();
    if kinds.len() != 1 {
        return Err(parse_err(loc, "expected exactly one of atoms, uniform, exponential"));
    }
    for key in obj.keys() {
        if !matches!(key.as_str(), "atoms" | "uniform" | "exponential" | "label" | "copies" | "points") {
            return Err(parse_err(loc, format!("unknown field {key:?}")));
        }
    }
    let copies = match obj.get("copies") {
        None => 1,
        Some(v) => match v.as_u64() {
            Some(c) if c >= 1 => c as usize,
            _ => return Err(parse_err(format!("{loc}.copies"), "expected a positive integer")),
        },
    };
    let points = match obj.get("points") {
        None => DEFAULT_DISCRETIZATION,
        Some(v) => match v.as_u64() {
            Some(p) if p >= 1 => p as usize,
            _ => return Err(parse_err(format!("{loc}.points"), "expected a positive integer")),
        },
    };
    let wrap = |e: Error| parse_err(loc, e.to_string());
    let dist = match kinds[0] {
        "atoms" => {
            let aloc = format!("{loc}.atoms");
            let arr = obj["atoms"].as_array().ok_or_else(|| parse_err(&aloc, "expected an array"))?;
            if arr.is_empty() {
                return Err(parse_err(&aloc, "no atoms"));
            }
            let mut atoms = Vec::with_capacity(arr.len());
            for (j, pair) in arr.iter().enumerate() {
                let ploc = format!("{aloc}[{j}]");
                let p = pair
                    .as_array()
                    .filter(|p| p.len() == 2)
                    .ok_or_else(|| parse_err(&ploc, "expected [value, mass]"))?;
                let (v, m) = (number(&p[0], &ploc)?, number(&p[1], &ploc)?);
                if v < 0.0 {
                    return Err(parse_err(&ploc, format!("negative value {v}")));
                }
                if m < 0.0 {
                    return Err(parse_err(&ploc, format!("negative mass {m}")));
                }
                atoms.push((v, m));
            }
            let total: f64 = atoms.iter().map(|a| a.1).sum();
            if (total - 1.0).abs() > MASS_TOL {
                return Err(parse_err(&aloc, format!("masses sum to {total}, not 1")));
            }
            Distribution::new(atoms).map_err(wrap)?
        }
        "uniform" => {
            let p = params(obj, "uniform", 2, loc)?;
            Parametric::uniform(p[0], p[1]).and_then(|d| d.discretize(points)).map_err(wrap)?
        }
        _ => {
            let p = params(obj, "exponential", 1, loc)?;
            Parametric::exponential(p[0]).and_then(|d| d.discretize(points)).map_err(wrap)?
        }
    };
    let dist = match obj.get("label") {
        None => dist,
        Some(Value::String(s)) => dist.with_label(s.clone()),
        Some(_) => return Err(parse_err(format!("{loc}.label"), "expected a string")),
    };
    Ok((dist, copies))
}

/// Parses an instance from JSON text. Errors name the offending element.
pub fn parse_instance(text: &str) -> Result<Instance, Error> {
    let root: Value = serde_json::from_str(text)
        .map_err(|e| parse_err(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
    let vars = root
        .get("variables")
        .and_then(Value::as_array)
        .ok_or_else(|| parse_err("variables", "expected an array of variables"))?;
    if vars.is_empty() {
        return Err(parse_err("variables", "instance has no variables"));
    }
    let mut out = Vec::new();
    for (i, entry) in vars.iter().enumerate() {
        let (d, copies) = parse_variable(entry, &format!("variables[{i}]"))?;
        out.extend(std::iter::repeat(d).take(copies));
    }
    Instance::new(out).map_err(|e| parse_err("variables", e.to_string()))
}

pub fn read_instance(path: &Path) -> Result<Instance, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_instance(&text).map_err(|e| match e {
        Error::Parse { location, message } => Error::Parse {
            location: format!("{}: {location}", path.display()),
            message,
        },
        other => other,
    })
    .map_err(CliError::from)
}

/// JSON form of an instance; runs of equal variables become one entry with
/// `copies`.
pub fn instance_to_json(inst: &Instance) -> Value {
    let vars = inst.variables();
    let mut entries = Vec::new();
    let mut i = 0;
    while i < vars.len() {
        let mut j = i + 1;
        while j < vars.len() && vars[j] == vars[i] && vars[j].label() == vars[i].label() {
            j += 1;
        }
        let atoms: Vec<Value> = vars[i].atoms().map(|(v, m)| json!([v, m])).collect();
        let mut entry = Map::new();
        entry.insert("atoms".into(), Value::Array(atoms));
        if !vars[i].label().is_empty() {
            entry.insert("label".into(), Value::String(vars[i].label().to_string()));
        }
        if j - i > 1 {
            entry.insert("copies".into(), json!(j - i));
        }
        entries.push(Value::Object(entry));
        i = j;
    }
    json!({ "variables": entries })
}

pub fn write_instance(path: &Path, inst: &Instance) -> Result<(), CliError> {
    let text = serde_json::to_string(&instance_to_json(inst)).expect("serializable") + "\n";
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}
