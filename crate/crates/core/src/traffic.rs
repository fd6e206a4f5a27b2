//! Seed-driven swap traffic: volume-weighted pair sampling with normally
//! distributed dollar sizes.

use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::makers::TokenId;
use crate::num;

/// One sampled swap: who trades what for what, and how many dollars go in.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficEvent {
    pub hour: usize,
    pub token_in: TokenId,
    pub token_out: TokenId,
    pub usd_amount: f64,
}

/// Traffic-shape parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficParams {
    pub swaps_per_hour: usize,
    pub mean_swap_usd: f64,
    pub swap_usd_sd: f64,
}

impl TrafficParams {
    pub fn validate(&self) -> Result<()> {
        if !num::is_pos_finite(self.mean_swap_usd) {
            return Err(Error::InvalidInput("mean swap size must be positive"));
        }
        if !(self.swap_usd_sd.is_finite() && self.swap_usd_sd >= 0.0) {
            return Err(Error::InvalidInput(
                "swap size deviation must be non-negative",
            ));
        }
        Ok(())
    }
}

/// Result of sampling one hour of traffic. `degenerate` flags hours whose
/// volume weights could not support pair sampling (fewer than two tokens
/// with positive volume).
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficSample {
    pub events: Vec<TrafficEvent>,
    pub degenerate: bool,
}

/// Draws an index weighted by `weights` (all positive, cumulative walk).
fn weighted_draw(weights: &[f64], rng: &mut ChaCha12Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u: f64 = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        u -= w;
        if u < 0.0 {
            return i;
        }
    }
    weights.len() - 1
}

/// Samples the hour's swap events: for each event two distinct tokens are
/// drawn without replacement, weighted by hourly volume (the first draw is
/// the input token), and the input dollar size is drawn from the configured
/// normal distribution, redrawn until positive. Deterministic given the rng
/// state.
pub fn sample_traffic(
    hour: usize,
    volumes: &[(TokenId, f64)],
    params: &TrafficParams,
    rng: &mut ChaCha12Rng,
) -> Result<TrafficSample> {
    params.validate()?;
    for (_, v) in volumes {
        if !(v.is_finite() && *v >= 0.0) {
            return Err(Error::InvalidInput("volumes must be non-negative"));
        }
    }
    let active: Vec<(&TokenId, f64)> = volumes
        .iter()
        .filter(|(_, v)| *v > 0.0)
        .map(|(t, v)| (t, *v))
        .collect();
    if active.len() < 2 {
        return Ok(TrafficSample {
            events: Vec::new(),
            degenerate: true,
        });
    }
    let normal = Normal::new(params.mean_swap_usd, params.swap_usd_sd)
        .map_err(|_| Error::InvalidInput("invalid swap size distribution"))?;

    let mut events = Vec::with_capacity(params.swaps_per_hour);
    for _ in 0..params.swaps_per_hour {
        let weights: Vec<f64> = active.iter().map(|(_, v)| *v).collect();
        let first = weighted_draw(&weights, rng);
        let mut rest_weights = weights.clone();
        rest_weights.remove(first);
        let mut rest_tokens: Vec<&TokenId> = active.iter().map(|(t, _)| *t).collect();
        rest_tokens.remove(first);
        let second = weighted_draw(&rest_weights, rng);

        let mut usd = normal.sample(rng);
        while usd <= 0.0 {
            usd = normal.sample(rng);
        }
        events.push(TrafficEvent {
            hour,
            token_in: active[first].0.clone(),
            token_out: rest_tokens[second].clone(),
            usd_amount: usd,
        });
    }
    Ok(TrafficSample {
        events,
        degenerate: false,
    })
}
