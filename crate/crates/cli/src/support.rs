use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use oadse::{builtin_network, load_network, load_tech, DnnModel, TechParams};
use serde::Serialize;
use serde_json::Value;

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_SEARCH: u8 = 3;

/// Exit status for a failed command: 3 when a search found nothing
/// feasible, 2 for everything else.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<oadse::Error>() {
        Some(oadse::Error::NoFeasibleDesign { .. }) => EXIT_SEARCH,
        _ => EXIT_INPUT,
    }
}

pub fn parse_threshold(s: &str) -> Result<(f64, f64), String> {
    let (cd, tpe) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `CD,TPE`, got `{s}`"))?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    let pair = (parse(cd)?, parse(tpe)?);
    if pair.0.is_nan() || pair.1.is_nan() {
        return Err("thresholds must not be NaN".into());
    }
    Ok(pair)
}

/// A path if it exists, otherwise a built-in network name.
pub fn network(arg: &str) -> Result<(DnnModel, String)> {
    let path = Path::new(arg);
    if path.exists() {
        return Ok((load_network(path)?, path.display().to_string()));
    }
    match builtin_network(arg) {
        Some(m) => Ok((m, format!("builtin:{arg}"))),
        None => anyhow::bail!(
            "`{arg}` is neither an existing file nor a built-in network ({})",
            oadse::model_ir::BUILTIN_NETWORKS.join(", ")
        ),
    }
}

pub fn tech(arg: Option<&Path>) -> Result<(TechParams, String)> {
    match arg {
        Some(p) => Ok((load_tech(p)?, p.display().to_string())),
        None => Ok((TechParams::default(), "builtin:default".into())),
    }
}

pub fn display(p: &Path) -> String {
    p.display().to_string()
}

/// Provenance embedded in every JSON output.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: &'static str,
    pub inputs: Vec<(&'static str, String)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub tool_version: &'static str,
    pub timestamp: String,
    pub schema_version: u32,
}

impl RunManifest {
    pub fn new(command: &'static str) -> Self {
        RunManifest {
            command,
            inputs: Vec::new(),
            seed: None,
            tool_version: env!("CARGO_PKG_VERSION"),
            timestamp: timestamp(),
            schema_version: oadse::report::SCHEMA_VERSION,
        }
    }

    pub fn input(mut self, role: &'static str, value: impl Into<String>) -> Self {
        self.inputs.push((role, value.into()));
        self
    }

    pub fn to_json(&self) -> Value {
        let mut inputs = serde_json::Map::new();
        for (k, v) in &self.inputs {
            let v = Value::String(v.clone());
            match inputs.get_mut(*k) {
                Some(Value::Array(list)) => list.push(v),
                Some(first) => *first = Value::Array(vec![first.clone(), v]),
                None => {
                    inputs.insert(k.to_string(), v);
                }
            }
        }
        let mut v = serde_json::to_value(self).expect("manifest serializes");
        v["inputs"] = Value::Object(inputs);
        v
    }
}

/// RFC 3339 time of the run; `SOURCE_DATE_EPOCH` pins it for reproducible output.
fn timestamp() -> String {
    let pinned = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.parse::<i64>().ok())
        .and_then(|secs| chrono::DateTime::from_timestamp(secs, 0));
    pinned.unwrap_or_else(chrono::Utc::now).to_rfc3339()
}

pub fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

pub fn emit(out: Option<&Path>, contents: &str) -> Result<()> {
    match out {
        Some(p) => write(p, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

pub fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

pub fn out_dir(p: &Path) -> Result<PathBuf> {
    fs::create_dir_all(p).with_context(|| format!("creating {}", p.display()))?;
    Ok(p.to_path_buf())
}

/// `<out>.manifest.json` next to a data file.
pub fn sidecar(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}
