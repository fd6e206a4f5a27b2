//! The three commands behind the binary, as library functions so tests can
//! drive them directly.

use std::path::{Path, PathBuf};

use ammlab_core::feed::{self, Defect, Feed, SynthKind, SynthParams, SynthTokenSpec};
use ammlab_core::sim;

use crate::config::{load_run_spec, Overrides};
use crate::feed_io::{format_hour, read_feed, write_feed};
use crate::manifest;
use crate::outputs;
use crate::{CliError, Result};

/// Validates a feed file and renders a report. Any defect makes this an
/// `Err(Validation)` carrying the full report.
pub fn cmd_validate(path: &Path) -> Result<String> {
    let (rows, parse_defects) = read_feed(path)?;
    let report = feed::validate_rows(&rows);
    let mut lines = Vec::new();
    lines.push(format!("feed: {}", path.display()));
    lines.push(format!("rows: {}", report.row_count + parse_defects.len()));
    lines.push(format!(
        "tokens: {}",
        report
            .tokens
            .iter()
            .map(|t| t.as_str().to_string())
            .collect::<Vec<_>>()
            .join(", ")
    ));
    if let Some((lo, hi)) = report.hour_range {
        lines.push(format!("range: {} .. {}", format_hour(lo), format_hour(hi)));
    }
    let total_defects = parse_defects.len() + report.defects.len();
    lines.push(format!("{total_defects} defects"));
    for d in &parse_defects {
        lines.push(format!("  line {}: {}", d.line, d.message));
    }
    for d in &report.defects {
        // map row indices back to file lines (header is line 1)
        let msg = match d {
            Defect::NonPositivePrice { row } => {
                format!("  line {}: non-positive price", row + 2)
            }
            Defect::NonPositiveMarketCap { row } => {
                format!("  line {}: non-positive market cap", row + 2)
            }
            Defect::NegativeVolume { row } => format!("  line {}: negative volume", row + 2),
            Defect::OutOfOrder { row } => {
                format!("  line {}: timestamps out of order", row + 2)
            }
            Defect::DuplicateTimestamp { row } => {
                format!("  line {}: duplicate timestamp", row + 2)
            }
            Defect::Gap { token, hour } => {
                format!("  token {token}: missing {}", format_hour(*hour))
            }
            Defect::ShortSeries { token } => format!("  token {token}: fewer than two rows"),
            Defect::Coverage { token, hour } => {
                format!("  token {token}: no data at {}", format_hour(*hour))
            }
        };
        lines.push(msg);
    }
    let text = lines.join("\n");
    if total_defects > 0 {
        Err(CliError::Validation(text))
    } else {
        Ok(text)
    }
}

/// Options of the `synth` command.
#[derive(Debug, Clone)]
pub struct SynthOptions {
    pub kind: String,
    pub hours: usize,
    pub tokens: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub start: String,
    pub prices: Option<Vec<f64>>,
    pub caps: Option<Vec<f64>>,
    pub volumes: Option<Vec<f64>>,
    pub drift: f64,
    pub drifts: Option<Vec<f64>>,
    pub volatility: f64,
    pub volume_growth: Option<f64>,
    pub cap_growth: Option<f64>,
    pub crash_token: Option<String>,
    pub crash_start_hour: Option<usize>,
    pub crash_depth: f64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            kind: "random_walk".into(),
            hours: 24 * 30,
            tokens: 4,
            seed: 0,
            out: PathBuf::from("feed.csv"),
            start: "2024-01-01T00:00:00Z".into(),
            prices: None,
            caps: None,
            volumes: None,
            drift: 0.0,
            drifts: None,
            volatility: 0.005,
            volume_growth: None,
            cap_growth: None,
            crash_token: None,
            crash_start_hour: None,
            crash_depth: 0.01,
        }
    }
}

fn spread<T: Copy>(list: &Option<Vec<T>>, n: usize, default: T, what: &str) -> Result<Vec<T>> {
    match list {
        None => Ok(vec![default; n]),
        Some(v) if v.len() == 1 => Ok(vec![v[0]; n]),
        Some(v) if v.len() == n => Ok(v.clone()),
        Some(v) => Err(CliError::Validation(format!(
            "{what}: expected 1 or {n} values, got {}",
            v.len()
        ))),
    }
}

/// Generates a synthetic feed file.
pub fn cmd_synth(opts: &SynthOptions) -> Result<()> {
    let kind = SynthKind::parse(&opts.kind)
        .map_err(|_| CliError::Validation(format!("unknown kind {:?}", opts.kind)))?;
    let prices = spread(&opts.prices, opts.tokens, 1.0, "--prices")?;
    let caps = spread(&opts.caps, opts.tokens, 1e9, "--caps")?;
    let volumes = spread(&opts.volumes, opts.tokens, 1e6, "--volumes")?;
    let specs: Vec<SynthTokenSpec> = (0..opts.tokens)
        .map(|i| SynthTokenSpec {
            symbol: format!("TK{i:02}"),
            initial_price: prices[i],
            market_cap: caps[i],
            daily_volume: volumes[i],
        })
        .collect();
    let mut params = SynthParams::defaults(kind, specs.clone(), opts.hours);
    params.drift_per_hour = opts.drift;
    if let Some(drifts) = &opts.drifts {
        let per_token = spread(&Some(drifts.clone()), opts.tokens, 0.0, "--drifts")?;
        params.drift_overrides = specs
            .iter()
            .zip(per_token)
            .map(|(s, d)| (s.symbol.clone(), d))
            .collect();
    }
    params.volatility_per_hour = opts.volatility;
    if let Some(g) = opts.volume_growth {
        params.volume_growth = g;
    }
    if let Some(g) = opts.cap_growth {
        params.cap_growth = g;
    }
    params.crash_token = opts.crash_token.clone();
    if let Some(h) = opts.crash_start_hour {
        params.crash_start_hour = h;
    }
    params.crash_depth = opts.crash_depth;

    let mut rows =
        feed::synth_feed(&params, opts.seed).map_err(|e| CliError::Validation(e.to_string()))?;
    let offset = crate::feed_io::parse_hour(&opts.start).map_err(CliError::Validation)?;
    for row in &mut rows {
        row.hour += offset;
    }
    write_feed(&opts.out, &rows)
}

/// Runs a scenario from a config (or manifest) file and writes the outputs
/// and manifest into the output directory. Returns the printable summary.
pub fn cmd_run(config_path: &Path, overrides: &Overrides) -> Result<String> {
    let mut spec = load_run_spec(config_path, overrides)?;
    spec.feed = spec
        .feed
        .canonicalize()
        .map_err(|e| CliError::Validation(format!("{}: {e}", spec.feed.display())))?;

    let checksum = manifest::sha256_file(&spec.feed)?;
    if let Some(expected) = &spec.feed_sha256 {
        if expected != &checksum {
            return Err(CliError::Validation(format!(
                "feed checksum mismatch: manifest has {expected}, file is {checksum}"
            )));
        }
    }

    let (rows, parse_defects) = read_feed(&spec.feed)?;
    if let Some(d) = parse_defects.first() {
        return Err(CliError::Validation(format!(
            "{}: line {}: {}",
            spec.feed.display(),
            d.line,
            d.message
        )));
    }
    let feed = Feed::from_rows(&rows).map_err(|e| CliError::Validation(e.to_string()))?;

    let output =
        sim::run_scenario(&feed, &spec.scenario).map_err(|e| CliError::Runtime(e.to_string()))?;

    std::fs::create_dir_all(&spec.out_dir)?;
    outputs::write_swaps(&spec.out_dir.join("swaps.csv"), &output, feed.start_hour())?;
    outputs::write_il(&spec.out_dir.join("il.csv"), &output, feed.start_hour())?;
    outputs::write_summary(&spec.out_dir.join("summary.csv"), &output)?;
    std::fs::write(
        spec.out_dir.join("manifest.txt"),
        manifest::render(&spec, &checksum),
    )?;
    Ok(outputs::summary_table(&output))
}
