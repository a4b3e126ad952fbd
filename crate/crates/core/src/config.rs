//! JSON run configuration with dotted-path overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::diagnostics::DiagnosticsOptions;
use crate::error::{Error, Result};
use crate::scenarios::ScenarioSpec;
use crate::solver::Numerics;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioSpec,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub diagnostics: DiagnosticsOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

fn at_path(path: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| Error::Config {
        path: path.into(),
        message: e.to_string(),
    }
}

impl RunConfig {
    /// Checks every precondition that can be checked before computing.
    pub fn validate(&self) -> Result<()> {
        let s = &self.scenario;
        s.gas.constants().map_err(at_path("scenario.gas"))?;
        s.grid.validate().map_err(at_path("scenario.grid"))?;
        s.profile.validate().map_err(at_path("scenario.profile"))?;
        s.validate().map_err(at_path("scenario"))?;
        self.numerics.validate().map_err(at_path("numerics"))?;
        self.diagnostics.validate().map_err(at_path("diagnostics"))
    }

    pub fn from_value(value: Value) -> Result<Self> {
        let cfg: RunConfig =
            serde_path_to_error::deserialize(value).map_err(|e| Error::Config {
                path: e.path().to_string(),
                message: e.inner().to_string(),
            })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str, overrides: &[String]) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        let mut value: Value =
            serde_path_to_error::deserialize(&mut de).map_err(|e| Error::Config {
                path: e.path().to_string(),
                message: e.inner().to_string(),
            })?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        Self::from_value(value)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, overrides)
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

/// Parses a command-line value: JSON if it parses, `a/b` as a quotient,
/// otherwise a string.
pub fn parse_value(raw: &str) -> Value {
    if let Ok(v) = serde_json::from_str::<Value>(raw) {
        return v;
    }
    if let Some((a, b)) = raw.split_once('/') {
        if let (Ok(a), Ok(b)) = (a.trim().parse::<f64>(), b.trim().parse::<f64>()) {
            if let Some(n) = serde_json::Number::from_f64(a / b) {
                return Value::Number(n);
            }
        }
    }
    Value::String(raw.to_string())
}

/// Applies `KEY=VALUE` with a dotted key, creating missing objects.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment.split_once('=').ok_or_else(|| Error::Config {
        path: assignment.into(),
        message: "override must have the form KEY=VALUE".into(),
    })?;
    set_path(root, key.trim(), parse_value(raw.trim()))
}

pub fn set_path(root: &mut Value, key: &str, value: Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config {
            path: key.into(),
            message: "empty path segment".into(),
        });
    }
    let mut node = root;
    for (i, part) in parts.iter().enumerate() {
        let obj = match node {
            Value::Object(map) => map,
            Value::Null => {
                *node = Value::Object(Default::default());
                node.as_object_mut().expect("just created")
            }
            _ => {
                return Err(Error::Config {
                    path: parts[..i].join("."),
                    message: "not an object".into(),
                })
            }
        };
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert(Value::Null);
    }
    unreachable!("loop returns on the last segment")
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "scenario": {
            "name": "rarefaction",
            "gas": {"gamma": 3},
            "grid": {"x_min": -100, "x_max": 100, "n": 256},
            "profile": {"kind": "rarefaction", "amplitude": 2, "width": 5},
            "horizon": 10,
            "snapshot_interval": 1
        }
    }"#;

    #[test]
    fn loads_with_defaults() {
        let c = RunConfig::from_json(BASE, &[]).unwrap();
        assert_eq!(c.numerics, Numerics::default());
        assert_eq!(c.scenario.grid.n, 256);
    }

    #[test]
    fn unknown_key_reports_path() {
        let text = BASE.replace("\"width\": 5", "\"width\": 5, \"widht\": 5");
        let err = RunConfig::from_json(&text, &[]).unwrap_err().to_string();
        assert!(err.contains("scenario.profile"), "{err}");
        let err = RunConfig::from_json(BASE, &["numerics.cfll=0.3".into()])
            .unwrap_err()
            .to_string();
        assert!(err.contains("numerics"), "{err}");
    }

    #[test]
    fn invalid_gamma_names_the_field() {
        let err = RunConfig::from_json(BASE, &["scenario.gas.gamma=0.9".into()])
            .unwrap_err()
            .to_string();
        assert!(err.contains("gamma"), "{err}");
    }

    #[test]
    fn overrides_apply() {
        let c = RunConfig::from_json(
            BASE,
            &[
                "numerics.cfl=0.2".into(),
                "scenario.gas.gamma=5/3".into(),
                "scenario.name=other".into(),
                "diagnostics.M=2.5".into(),
            ],
        )
        .unwrap();
        assert_eq!(c.numerics.cfl, 0.2);
        assert!((c.scenario.gas.gamma - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(c.scenario.name, "other");
        assert_eq!(c.diagnostics.level, Some(2.5));
        assert!(RunConfig::from_json(BASE, &["novalue".into()]).is_err());
        assert!(RunConfig::from_json(BASE, &["scenario.name.x=1".into()]).is_err());
    }

    #[test]
    fn round_trips_through_json() {
        let c = RunConfig::from_json(BASE, &[]).unwrap();
        let back = RunConfig::from_value(c.to_value()).unwrap();
        assert_eq!(c, back);
    }
}
