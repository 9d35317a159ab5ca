use std::collections::BTreeSet;

use serde_json::{json, Value};
use strichartz_lab::parse_config;

fn schema() -> Value {
    serde_json::from_str(include_str!("../schema/config.schema.json")).unwrap()
}

/// Each kind with only its required parameters.
fn minimal() -> Vec<(&'static str, Value)> {
    vec![
        ("kernel-sweep", json!({"theta": 3, "n": [8]})),
        ("vdc-oracle", json!({"theta": 3, "b": 2, "t": [10]})),
        (
            "strichartz-fit",
            json!({"theta": 2, "p": 6, "q": 6, "n": [4], "prediction": {"estimate": "torus-classical"}}),
        ),
        (
            "ons-sweep",
            json!({"theta": 3, "p": 6, "q": 2, "n": 8, "alpha_dual": 2,
                   "prediction": {"estimate": "theta-admissible-ons"}, "sweep": {"axis": "n", "values": [8]}}),
        ),
        ("duality-check", json!({"n": 2, "theta": 2, "alpha": [1]})),
        ("hartree-run", json!({"initial": {"weights": [1]}, "theta": 2, "t_final": 1, "dt": 0.5})),
        (
            "fixed-point",
            json!({"initial": {"weights": [1]}, "theta": 2, "t_final": 0.05, "time_points": 6, "p": 4, "q": 2}),
        ),
    ]
}

fn keys(v: &Value) -> BTreeSet<String> {
    v.as_object().unwrap().keys().cloned().collect()
}

fn echo(kind: &str, params: &Value) -> Result<Value, String> {
    let text = json!({"experiment": {kind: params}}).to_string();
    let cfg = parse_config(&text).map_err(|e| e.to_string())?;
    Ok(serde_json::to_value(cfg).unwrap())
}

#[test]
fn schema_lists_every_kind() {
    let s = schema();
    let listed = keys(&s["properties"]["experiment"]["properties"]);
    let expected: BTreeSet<String> = minimal().iter().map(|(k, _)| k.to_string()).collect();
    assert_eq!(listed, expected);
}

#[test]
fn schema_properties_match_the_echoed_config() {
    let s = schema();
    for (kind, params) in minimal() {
        let def = &s["$defs"][kind];
        let echoed = echo(kind, &params).unwrap();
        let fields = &echoed["experiment"][kind];
        assert_eq!(keys(&def["properties"]), keys(fields), "{kind}");

        let required: BTreeSet<String> = def["required"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_str().unwrap().to_string())
            .collect();
        assert_eq!(required, keys(&params), "{kind}");

        for (name, prop) in def["properties"].as_object().unwrap() {
            if let Some(default) = prop.get("default") {
                assert_eq!(&fields[name], default, "{kind}.{name}");
            }
        }
    }
}

#[test]
fn every_required_field_is_required() {
    for (kind, params) in minimal() {
        for field in keys(&params) {
            let mut partial = params.clone();
            partial.as_object_mut().unwrap().remove(&field);
            let err = echo(kind, &partial).unwrap_err();
            assert!(err.contains(&field), "{kind}: {err}");
        }
    }
}

#[test]
fn top_level_defaults_match() {
    let s = schema();
    let echoed = echo("kernel-sweep", &json!({"theta": 3, "n": [8]})).unwrap();
    assert_eq!(echoed["seed"], s["properties"]["seed"]["default"]);
    for name in ["results", "summary", "manifest", "dir"] {
        assert_eq!(
            echoed["output"][name],
            s["properties"]["output"]["default"].get(name).cloned().unwrap_or_else(|| {
                s["properties"]["output"]["properties"][name]["default"].clone()
            }),
            "output.{name}"
        );
    }
}

#[test]
fn shipped_configs_are_valid() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        parse_config(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        count += 1;
    }
    assert!(count >= 7);
}
