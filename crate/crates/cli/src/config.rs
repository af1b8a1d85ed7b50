//! Campaign configuration from flags and JSON files.
//!
//! Layers, lowest first: built-in defaults, a base file (for `simulate`, the
//! design directory's `config.json`), command-line flags, then `--config`.

use std::path::{Path, PathBuf};

use clap::Args;
use serde_json::{json, Map, Value};

use mrb::campaign::{CampaignConfig, ModelSource};
use mrb::sampling::SamplerSpec;

use crate::CliError;

/// One flag per `CampaignConfig` field.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// JSON campaign config; its fields override the flags below
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Lattice rows [default: 4]
    #[arg(long)]
    pub rows: Option<usize>,
    /// Lattice columns [default: 4]
    #[arg(long)]
    pub cols: Option<usize>,
    /// Number of benchmarked qubits [default: 4]
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated device qubits (row-major lattice indices) instead of a compact block
    #[arg(long, value_delimiter = ',')]
    pub qubits: Option<Vec<usize>>,
    /// Layer sampler: edge_grab:XI, single_cnot or single_cnot:PROB [default: edge_grab:0.125]
    #[arg(long, value_parser = parse_sampler)]
    pub sampler: Option<SamplerSpec>,
    /// Comma-separated even benchmark depths [default: 0,2,4,8,16,32,64]
    #[arg(long, value_delimiter = ',')]
    pub depths: Option<Vec<usize>>,
    /// Circuits per depth, K [default: 30]
    #[arg(long)]
    pub circuits_per_depth: Option<usize>,
    /// Shots per circuit, N [default: 100]
    #[arg(long)]
    pub shots: Option<usize>,
    /// Error model: noiseless, random, model1, model2 or file:PATH [default: model1]
    #[arg(long, value_parser = parse_model)]
    pub model: Option<ModelSource>,
    /// Master seed (required, here or in the config file)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Layers sampled for the epsilon estimate [default: 1000]
    #[arg(long)]
    pub epsilon_layers: Option<usize>,
    /// Monte Carlo samples per layer for the epsilon estimate [default: 1000]
    #[arg(long)]
    pub epsilon_samples: Option<usize>,
    /// Count Pauli-layer gate errors in each layer's infidelity [default: true]
    #[arg(long)]
    pub include_pauli_layer: Option<bool>,
    /// Bootstrap replicates for fit uncertainties [default: 200]
    #[arg(long)]
    pub bootstrap: Option<usize>,
    /// Inverse-variance weighted fit [default: true]
    #[arg(long)]
    pub weighted: Option<bool>,
}

pub fn parse_sampler(s: &str) -> Result<SamplerSpec, String> {
    let (kind, arg) = match s.split_once(':') {
        Some((k, a)) => (k, Some(a.parse::<f64>().map_err(|e| format!("bad number {a:?}: {e}"))?)),
        None => (s, None),
    };
    match (kind, arg) {
        ("edge_grab", Some(xi)) => Ok(SamplerSpec::edge_grab(xi)),
        ("edge_grab", None) => Ok(SamplerSpec::edge_grab(0.125)),
        ("single_cnot", Some(p)) => Ok(SamplerSpec::SingleCnot { cnot_probability: p }),
        ("single_cnot", None) => Ok(SamplerSpec::single_cnot()),
        _ => Err(format!("unknown sampler {s:?}; expected edge_grab:XI or single_cnot[:PROB]")),
    }
}

pub fn parse_model(s: &str) -> Result<ModelSource, String> {
    let v = match s {
        "noiseless" | "random" | "model1" | "model2" => json!({ "kind": s }),
        _ => match s.strip_prefix("file:") {
            Some(p) => json!({ "kind": "file", "path": p }),
            None => return Err(format!("unknown model {s:?}; expected noiseless, random, model1, model2 or file:PATH")),
        },
    };
    serde_json::from_value(v).map_err(|e| e.to_string())
}

fn read_json(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(CliError::Usage(format!("{}: config must be a JSON object", path.display()))),
        Err(e) => Err(CliError::Usage(format!("{}: {e}", path.display()))),
    }
}

/// Relative model-file paths are resolved against the file's directory.
fn resolve_model_path(map: &mut Map<String, Value>, base: &Path) {
    if let Some(Value::Object(m)) = map.get_mut("model") {
        if m.get("kind").and_then(Value::as_str) == Some("file") {
            if let Some(Value::String(p)) = m.get("path") {
                let p = Path::new(p);
                if p.is_relative() {
                    let joined = base.join(p).to_string_lossy().into_owned();
                    m.insert("path".into(), Value::String(joined));
                }
            }
        }
    }
}

impl ConfigArgs {
    fn flag_map(&self) -> Map<String, Value> {
        let mut m = Map::new();
        let mut put = |k: &str, v: Option<Value>| {
            if let Some(v) = v {
                m.insert(k.into(), v);
            }
        };
        put("rows", self.rows.map(Value::from));
        put("cols", self.cols.map(Value::from));
        put("n", self.n.map(Value::from));
        put("qubits", self.qubits.clone().map(Value::from));
        put("sampler", self.sampler.map(|s| serde_json::to_value(s).expect("serializable")));
        put("depths", self.depths.clone().map(Value::from));
        put("circuits_per_depth", self.circuits_per_depth.map(Value::from));
        put("shots", self.shots.map(Value::from));
        put("model", self.model.clone().map(|s| serde_json::to_value(s).expect("serializable")));
        put("seed", self.seed.map(Value::from));
        put("epsilon_layers", self.epsilon_layers.map(Value::from));
        put("epsilon_samples", self.epsilon_samples.map(Value::from));
        put("include_pauli_layer", self.include_pauli_layer.map(Value::from));
        put("bootstrap", self.bootstrap.map(Value::from));
        put("weighted", self.weighted.map(Value::from));
        m
    }

    /// Resolves the layered configuration. `base` sits below the flags.
    pub fn resolve(&self, base: Option<&Path>) -> Result<CampaignConfig, CliError> {
        let mut merged = Map::new();
        if let Some(b) = base {
            let mut m = read_json(b)?;
            resolve_model_path(&mut m, b.parent().unwrap_or(Path::new(".")));
            merged.extend(m);
        }
        merged.extend(self.flag_map());
        if let Some(path) = &self.config {
            let mut m = read_json(path)?;
            resolve_model_path(&mut m, path.parent().unwrap_or(Path::new(".")));
            merged.extend(m);
        }
        if !merged.contains_key("seed") {
            return Err(CliError::Usage("a seed is required: pass --seed or set \"seed\" in the config file".into()));
        }
        serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Usage(format!("invalid config: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flag_values() {
        assert_eq!(parse_sampler("edge_grab:0.25").unwrap(), SamplerSpec::edge_grab(0.25));
        assert_eq!(parse_sampler("single_cnot").unwrap(), SamplerSpec::single_cnot());
        assert!(parse_sampler("grab").is_err());
        assert!(matches!(parse_model("model2").unwrap(), ModelSource::Model2 { .. }));
        assert_eq!(parse_model("file:m.json").unwrap(), ModelSource::File { path: "m.json".into() });
        assert!(parse_model("model3").is_err());
    }

    #[test]
    fn file_overrides_flags() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.json");
        std::fs::write(&cfg, r#"{"n": 8, "model": {"kind": "file", "path": "m.json"}}"#).unwrap();
        let args = ConfigArgs { config: Some(cfg), n: Some(2), shots: Some(7), seed: Some(1), ..Default::default() };
        let c = args.resolve(None).unwrap();
        assert_eq!((c.n, c.shots, c.seed), (8, 7, 1));
        assert_eq!(c.model, ModelSource::File { path: dir.path().join("m.json") });
        let no_seed = ConfigArgs::default();
        assert!(matches!(no_seed.resolve(None), Err(CliError::Usage(_))));
    }
}
