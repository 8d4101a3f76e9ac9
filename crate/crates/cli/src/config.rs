//! `--config` handling. The file holds one JSON object whose keys are flag names (either
//! `snake_case` or `kebab-case`) or the fields of a core descriptor such as
//! `{"k": 3, "omega": 1}` or `{"class_tag": "II", "ell": -0.6666666666666666, "params": {...}}`.
//! Flags given on the command line override file values.

use std::path::Path;

use lienard_core::hamiltonian::{HamiltonianModel, ModelDescriptor};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::{validation, CliResult};

pub fn load(path: Option<&Path>) -> CliResult<Option<Map<String, Value>>> {
    let Some(path) = path else {
        return Ok(None);
    };
    let text = std::fs::read_to_string(path)
        .or_else(|e| validation(format!("cannot read config {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .or_else(|e| validation(format!("config {} is not valid JSON: {e}", path.display())))?;
    match value {
        Value::Object(map) => normalize(map).map(Some),
        _ => validation("config must be a JSON object"),
    }
}

/// Flattens descriptors into flag-named keys.
fn normalize(map: Map<String, Value>) -> CliResult<Map<String, Value>> {
    if map.contains_key("class_tag") && map.contains_key("params") && map.contains_key("ell") {
        let desc: ModelDescriptor = serde_json::from_value(Value::Object(map.clone()))
            .or_else(|e| validation(format!("invalid model descriptor: {e}")))?;
        HamiltonianModel::try_from(desc)?;
    }
    let mut out = Map::new();
    for (key, value) in map {
        match key.as_str() {
            "params" => {
                let Value::Object(inner) = value else {
                    return validation("config field 'params' must be an object");
                };
                for (k, v) in normalize(inner)? {
                    out.insert(k, v);
                }
            }
            // Consistency with the class was checked above.
            "ell" => {}
            // Generalized families only support s = 1; anything else is rejected by the core.
            "s" if value.as_f64() == Some(1.0) => {}
            "class_tag" => {
                out.insert("class".into(), value);
            }
            "name" => {
                out.insert("preset".into(), value);
            }
            _ => {
                out.insert(key.replace('_', "-"), value);
            }
        }
    }
    Ok(out)
}

/// Overlays the flags given on the command line on the config values.
pub fn merge<T: Serialize + DeserializeOwned>(cli: &T, config: Option<&Map<String, Value>>) -> CliResult<T> {
    let Some(config) = config else {
        return serde_json::from_value(serde_json::to_value(cli).expect("args serialize"))
            .or_else(|e| validation(e.to_string()));
    };
    let Value::Object(flags) = serde_json::to_value(cli).expect("args serialize") else {
        unreachable!("argument structs serialize to objects")
    };
    if let Some(unknown) = config.keys().find(|k| !flags.contains_key(*k)) {
        let mut known: Vec<&str> = flags.keys().map(String::as_str).collect();
        known.sort_unstable();
        return validation(format!(
            "config: unknown parameter '{unknown}' (expected one of: {})",
            known.join(", ")
        ));
    }
    let mut merged = config.clone();
    for (k, v) in flags {
        if !v.is_null() {
            merged.insert(k, v);
        }
    }
    serde_json::from_value(Value::Object(merged)).or_else(|e| validation(format!("config: {e}")))
}

/// Unwraps a required parameter.
pub fn req<T: Copy>(v: Option<T>, flag: &str) -> CliResult<T> {
    v.map_or_else(|| validation(format!("missing required parameter --{flag}")), Ok)
}
