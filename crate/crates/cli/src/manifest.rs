//! Run manifest: the resolved configuration plus provenance, written next
//! to the outputs in the same flat key-value format a config uses, so a
//! run can be reproduced exactly by pointing `run` at its manifest.

use std::io::Read;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::config::RunSpec;
use crate::{CliError, Result};

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut file = std::fs::File::open(path)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

fn fmt_k_values(ks: &[f64]) -> String {
    ks.iter()
        .map(|k| k.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Renders the manifest text for a resolved run.
pub fn render(spec: &RunSpec, feed_sha256: &str) -> String {
    let sc = &spec.scenario;
    let makers = sc
        .makers
        .iter()
        .map(|m| m.name())
        .collect::<Vec<_>>()
        .join(",");
    format!(
        "# run manifest; reusable as a run config\n\
         feed = {feed}\n\
         out_dir = {out_dir}\n\
         swaps_per_hour = {sph}\n\
         mean_swap_usd = {mean}\n\
         swap_usd_sd = {sd}\n\
         seed = {seed}\n\
         makers = {makers}\n\
         k_values = {ks}\n\
         feed_sha256 = {feed_sha256}\n\
         tool_version = {version}\n",
        feed = spec.feed.display(),
        out_dir = spec.out_dir.display(),
        sph = sc.swaps_per_hour,
        mean = sc.mean_swap_usd,
        sd = sc.swap_usd_sd,
        seed = sc.seed,
        ks = fmt_k_values(&sc.k_values),
        version = env!("CARGO_PKG_VERSION"),
    )
}
