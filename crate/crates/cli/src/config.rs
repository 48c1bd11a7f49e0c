//! Run configuration: file values overlaid with command-line flags.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

/// Every parameter any subcommand reads. Unset fields take the
/// subcommand's default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gate: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orbit: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frame: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m0: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub emit: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub merit: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_range: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_range: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_unit: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub composite: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub knob: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub range: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_samples: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Thread count for sweeps. Results do not depend on it, so it is not echoed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl RunConfig {
    /// The config as echoed into sidecars.
    pub fn echoed(&self) -> Value {
        let mut c = self.clone();
        c.workers = None;
        serde_json::to_value(c).expect("config serializes")
    }
}

/// Parse a config file. TOML by default; JSON when the extension is `.json`,
/// in which case a sidecar's `config` object is used if present.
pub fn load_file(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let value: Value = if path.extension().is_some_and(|e| e == "json") {
        let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        match v {
            Value::Object(mut m) if m.contains_key("config") => m.remove("config").unwrap_or_default(),
            other => other,
        }
    } else {
        let t: toml::Value = toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        serde_json::to_value(t).map_err(|e| CliError::Usage(e.to_string()))?
    };
    match value {
        Value::Object(m) => Ok(m),
        _ => Err(CliError::Usage(format!("{}: config must be a table", path.display()))),
    }
}

/// Overlay `flags` onto `base`; keys present in `flags` win.
pub fn merge(mut base: Map<String, Value>, flags: Value) -> Result<RunConfig, CliError> {
    if let Value::Object(m) = flags {
        for (key, v) in m {
            if !v.is_null() {
                base.insert(key, v);
            }
        }
    }
    serde_json::from_value(Value::Object(base)).map_err(|e| CliError::Usage(format!("config: {e}")))
}
