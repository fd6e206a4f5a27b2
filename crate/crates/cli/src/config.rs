//! Flat key-value run configuration. Lines are `key = value`; `#` starts a
//! comment. Unknown keys are rejected by name. A run manifest uses the same
//! format plus provenance keys, so a manifest is itself a valid config.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ammlab_core::sim::{MakerSpec, ScenarioConfig};

use crate::{CliError, Result};

/// Everything a run needs: scenario knobs plus file locations.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub feed: PathBuf,
    pub out_dir: PathBuf,
    pub scenario: ScenarioConfig,
    /// Expected feed checksum; verified before running when present.
    pub feed_sha256: Option<String>,
}

pub const KNOWN_KEYS: &[&str] = &[
    "feed",
    "out_dir",
    "swaps_per_hour",
    "mean_swap_usd",
    "swap_usd_sd",
    "seed",
    "makers",
    "k_values",
    "feed_sha256",
    "tool_version",
];

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|e| CliError::Validation(format!("config key {key}: {e}")))
}

fn parse_u64(key: &str, value: &str) -> Result<u64> {
    value
        .parse::<u64>()
        .map_err(|e| CliError::Validation(format!("config key {key}: {e}")))
}

pub fn parse_makers(value: &str) -> Result<Vec<MakerSpec>> {
    let mut makers = Vec::new();
    for name in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let spec = MakerSpec::parse(name)
            .map_err(|_| CliError::Validation(format!("unknown maker {name:?}")))?;
        if makers.contains(&spec) {
            return Err(CliError::Validation(format!("maker {name:?} listed twice")));
        }
        makers.push(spec);
    }
    if makers.is_empty() {
        return Err(CliError::Validation("makers list is empty".into()));
    }
    Ok(makers)
}

pub fn parse_k_values(value: &str) -> Result<Vec<f64>> {
    let mut ks = Vec::new();
    for part in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let k = parse_f64("k_values", part)?;
        if !(k > 0.0 && k < 1.0) {
            return Err(CliError::Validation(format!(
                "k value {part} outside (0, 1)"
            )));
        }
        if ks.contains(&k) {
            return Err(CliError::Validation(format!("k value {part} listed twice")));
        }
        ks.push(k);
    }
    Ok(ks)
}

/// Parses a config file into key/value pairs, rejecting unknown keys.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Validation(format!(
                "config line {}: expected `key = value`",
                i + 1
            )));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(CliError::Validation(format!("invalid config key {key:?}")));
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(CliError::Validation(format!(
                "config key {key:?} set twice"
            )));
        }
    }
    Ok(map)
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub makers: Option<String>,
    pub k_values: Option<String>,
    pub swaps_per_hour: Option<u64>,
}

/// Loads a run spec from a config file plus overrides. Paths in the config
/// are resolved relative to the config file's directory.
pub fn load_run_spec(path: &Path, overrides: &Overrides) -> Result<RunSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let kv = parse_kv(&text)?;
    let base = path.parent().unwrap_or(Path::new("."));

    let feed_raw = kv
        .get("feed")
        .ok_or_else(|| CliError::Validation("config key \"feed\" is required".into()))?;
    let feed = base.join(feed_raw);

    let out_dir = overrides
        .out_dir
        .clone()
        .or_else(|| kv.get("out_dir").map(|v| base.join(v)))
        .unwrap_or_else(|| PathBuf::from("ammlab-out"));

    let swaps_per_hour = match overrides.swaps_per_hour {
        Some(v) => v,
        None => kv
            .get("swaps_per_hour")
            .map(|v| parse_u64("swaps_per_hour", v))
            .transpose()?
            .unwrap_or(20),
    } as usize;

    let mean_swap_usd = kv
        .get("mean_swap_usd")
        .map(|v| parse_f64("mean_swap_usd", v))
        .transpose()?
        .unwrap_or(10_000.0);

    let swap_usd_sd = kv
        .get("swap_usd_sd")
        .map(|v| parse_f64("swap_usd_sd", v))
        .transpose()?
        .unwrap_or(mean_swap_usd / 3.0);

    let seed = match overrides.seed {
        Some(v) => v,
        None => kv
            .get("seed")
            .map(|v| parse_u64("seed", v))
            .transpose()?
            .unwrap_or(0),
    };

    let makers_str = overrides
        .makers
        .clone()
        .or_else(|| kv.get("makers").cloned())
        .unwrap_or_else(|| "csmm,cpmm,pmm,mcsmm,mcpmm,mpmm".to_string());
    let makers = parse_makers(&makers_str)?;

    let k_str = overrides
        .k_values
        .clone()
        .or_else(|| kv.get("k_values").cloned())
        .unwrap_or_else(|| "0.05,0.25,0.5,0.75".to_string());
    let k_values = parse_k_values(&k_str)?;

    let scenario = ScenarioConfig {
        swaps_per_hour,
        mean_swap_usd,
        swap_usd_sd,
        seed,
        makers,
        k_values,
    };
    scenario
        .validate()
        .map_err(|e| CliError::Validation(format!("invalid scenario: {e}")))?;

    Ok(RunSpec {
        feed,
        out_dir,
        scenario,
        feed_sha256: kv.get("feed_sha256").cloned(),
    })
}
