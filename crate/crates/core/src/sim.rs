//! Scenario driver: initializes every configured maker from the feed's
//! first timestep, replays the identical seed-driven traffic against all of
//! them, and records capital-efficiency and impermanent-loss series plus a
//! quartile summary.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::curve::PmmParams;
use crate::error::{Error, Result};
use crate::feed::Feed;
use crate::makers::{self, BoxedMaker, Cpmm, Csmm, Mcpmm, Mcsmm, Mpmm, PairKey, Pmm, TokenId};
use crate::num;
use crate::traffic::{self, TrafficParams};

/// Fraction of a token's market cap provisioned to single-token pools.
pub const CAP_FRACTION: f64 = 0.01;

/// Maker families a scenario can run. Proactive kinds are instantiated once
/// per swept `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MakerSpec {
    Csmm,
    Cpmm,
    Pmm,
    Mcsmm,
    Mcpmm,
    Mpmm,
}

impl MakerSpec {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "csmm" => MakerSpec::Csmm,
            "cpmm" => MakerSpec::Cpmm,
            "pmm" => MakerSpec::Pmm,
            "mcsmm" => MakerSpec::Mcsmm,
            "mcpmm" => MakerSpec::Mcpmm,
            "mpmm" => MakerSpec::Mpmm,
            _ => return Err(Error::InvalidInput("unknown maker name")),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            MakerSpec::Csmm => "csmm",
            MakerSpec::Cpmm => "cpmm",
            MakerSpec::Pmm => "pmm",
            MakerSpec::Mcsmm => "mcsmm",
            MakerSpec::Mcpmm => "mcpmm",
            MakerSpec::Mpmm => "mpmm",
        }
    }

    fn is_swept(&self) -> bool {
        matches!(self, MakerSpec::Pmm | MakerSpec::Mpmm)
    }
}

/// Scenario knobs beyond the feed itself.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub swaps_per_hour: usize,
    pub mean_swap_usd: f64,
    pub swap_usd_sd: f64,
    pub seed: u64,
    pub makers: Vec<MakerSpec>,
    pub k_values: Vec<f64>,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        TrafficParams {
            swaps_per_hour: self.swaps_per_hour,
            mean_swap_usd: self.mean_swap_usd,
            swap_usd_sd: self.swap_usd_sd,
        }
        .validate()?;
        if self.makers.is_empty() {
            return Err(Error::InvalidInput("at least one maker required"));
        }
        if self.makers.iter().any(MakerSpec::is_swept) && self.k_values.is_empty() {
            return Err(Error::InvalidInput(
                "k sweep must not be empty for pmm/mpmm",
            ));
        }
        for &k in &self.k_values {
            PmmParams::new(k)?;
        }
        Ok(())
    }
}

/// Builds every maker at the feed's first timestep.
///
/// Sizing rules: single-token-provision makers (CSMM, MCSMM, PMM, MPMM)
/// hold each token at `CAP_FRACTION` of its market cap, with pairwise
/// makers splitting that value evenly across the token's pair pools; each
/// CPMM pair pool holds each side at `mc(t1) * mc(t2) / mc(total)`; MCPMM
/// applies the single-token rule to its one big pool. Token amounts come
/// from the first timestep's prices, and curve anchors start at the
/// deposits.
pub fn init_pools(feed: &Feed, makers: &[MakerSpec], k_values: &[f64]) -> Result<Vec<BoxedMaker>> {
    let tokens = feed.tokens();
    if tokens.len() < 2 {
        return Err(Error::InvalidInput("a scenario needs at least two tokens"));
    }
    let prices = feed.price_map(0)?;
    let caps = feed.initial_market_caps();
    for (_, mc) in &caps {
        if !num::is_pos_finite(*mc) {
            return Err(Error::InvalidInput("market caps must be positive"));
        }
    }
    let cap_of: BTreeMap<&TokenId, f64> = caps.iter().map(|(t, m)| (t, *m)).collect();
    let total_cap: f64 = caps.iter().map(|(_, m)| m).sum();
    let pair_count_per_token = (tokens.len() - 1) as f64;

    let mut pairs: Vec<PairKey> = Vec::new();
    for (i, a) in tokens.iter().enumerate() {
        for b in tokens.iter().skip(i + 1) {
            pairs.push(PairKey::new(a, b)?);
        }
    }

    // amount of `token` worth `value` at the first timestep
    let amount = |token: &TokenId, value: f64| -> Result<f64> { Ok(value / prices.get(token)?) };

    let single_split_pools = |split: f64| -> Result<Vec<(PairKey, [f64; 2])>> {
        pairs
            .iter()
            .map(|key| {
                let b = amount(key.base(), CAP_FRACTION * cap_of[key.base()] / split)?;
                let q = amount(key.quote(), CAP_FRACTION * cap_of[key.quote()] / split)?;
                Ok((key.clone(), [b, q]))
            })
            .collect()
    };

    let single_holdings = || -> Result<Vec<(TokenId, f64)>> {
        tokens
            .iter()
            .map(|t| Ok((t.clone(), amount(t, CAP_FRACTION * cap_of[t])?)))
            .collect()
    };

    let mut built: Vec<BoxedMaker> = Vec::new();
    for spec in makers {
        match spec {
            MakerSpec::Csmm => {
                built.push(alloc::boxed::Box::new(Csmm::new(
                    single_split_pools(pair_count_per_token)?,
                    &prices,
                )?));
            }
            MakerSpec::Cpmm => {
                let pools = pairs
                    .iter()
                    .map(|key| {
                        let value = cap_of[key.base()] * cap_of[key.quote()] / total_cap;
                        Ok((
                            key.clone(),
                            [amount(key.base(), value)?, amount(key.quote(), value)?],
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?;
                built.push(alloc::boxed::Box::new(Cpmm::new(pools, &prices)?));
            }
            MakerSpec::Mcsmm => {
                built.push(alloc::boxed::Box::new(Mcsmm::new(
                    single_holdings()?,
                    &prices,
                )?));
            }
            MakerSpec::Mcpmm => {
                built.push(alloc::boxed::Box::new(Mcpmm::new(
                    single_holdings()?,
                    &prices,
                )?));
            }
            MakerSpec::Pmm => {
                for &k in k_values {
                    let params = PmmParams::new(k)?;
                    built.push(alloc::boxed::Box::new(Pmm::new(
                        single_split_pools(pair_count_per_token)?,
                        params,
                        &prices,
                    )?));
                }
            }
            MakerSpec::Mpmm => {
                for &k in k_values {
                    let holdings = single_holdings()?
                        .into_iter()
                        .map(|(t, a)| (t, a, k))
                        .collect();
                    built.push(alloc::boxed::Box::new(Mpmm::new(holdings, &prices)?));
                }
            }
        }
    }
    Ok(built)
}

/// Capital efficiency of one swap: `(dI/dO) / (P_O/P_I)`, computed as the
/// market-rate output over the realized output so constant-sum swaps score
/// exactly one. `None` when the swap produced no output.
pub fn capital_efficiency(amount_in: f64, amount_out: f64, p_in: f64, p_out: f64) -> Option<f64> {
    if amount_out <= 0.0 {
        return None;
    }
    Some(makers::market_rate_out(amount_in, p_in, p_out) / amount_out)
}

/// One accepted swap with its capital efficiency.
#[derive(Debug, Clone, PartialEq)]
pub struct SwapRecord {
    pub swap_index: usize,
    pub hour: usize,
    pub maker: String,
    pub token_in: TokenId,
    pub token_out: TokenId,
    pub amount_in: f64,
    pub amount_out: f64,
    pub capital_efficiency: f64,
}

/// Impermanent loss of one accounting unit after one swap.
#[derive(Debug, Clone, PartialEq)]
pub struct IlRecord {
    pub swap_index: usize,
    pub hour: usize,
    pub maker: String,
    pub unit: String,
    pub value: f64,
}

/// Per-maker, per-metric quartiles.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub maker: String,
    pub metric: String,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub count: usize,
}

/// Everything a scenario run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub swaps: Vec<SwapRecord>,
    pub il: Vec<IlRecord>,
    pub summary: Vec<SummaryRow>,
    pub maker_labels: Vec<String>,
    pub events_sampled: usize,
    pub refusals: BTreeMap<String, usize>,
    pub zero_output_skips: usize,
    pub degenerate_hours: usize,
}

/// First, second and third quartiles by linear interpolation between order
/// statistics.
pub fn quartiles(values: &[f64]) -> Option<(f64, f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let at = |p: f64| -> f64 {
        let h = p * (sorted.len() - 1) as f64;
        let lo = h as usize;
        let frac = h - lo as f64;
        if lo + 1 < sorted.len() {
            sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
        } else {
            sorted[lo]
        }
    };
    Some((at(0.25), at(0.5), at(0.75)))
}

fn summary_row(maker: &str, metric: &str, values: &[f64]) -> SummaryRow {
    let (q1, median, q3) = quartiles(values).unwrap_or((f64::NAN, f64::NAN, f64::NAN));
    SummaryRow {
        maker: maker.to_string(),
        metric: metric.to_string(),
        q1,
        median,
        q3,
        count: values.len(),
    }
}

/// Replays the feed's traffic against every configured maker.
///
/// Every maker sees the identical event sequence; a refusal by one maker
/// does not affect what the others receive. Oracle prices update hourly.
/// The run is fully deterministic given the feed and config.
pub fn run_scenario(feed: &Feed, config: &ScenarioConfig) -> Result<RunOutput> {
    config.validate()?;
    let mut makers = init_pools(feed, &config.makers, &config.k_values)?;
    let maker_labels: Vec<String> = makers.iter().map(|m| m.label().to_string()).collect();
    let traffic_params = TrafficParams {
        swaps_per_hour: config.swaps_per_hour,
        mean_swap_usd: config.mean_swap_usd,
        swap_usd_sd: config.swap_usd_sd,
    };
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);

    let mut swaps = Vec::new();
    let mut il = Vec::new();
    let mut refusals: BTreeMap<String, usize> =
        maker_labels.iter().map(|l| (l.clone(), 0)).collect();
    let mut zero_output_skips = 0usize;
    let mut degenerate_hours = 0usize;
    let mut swap_index = 0usize;

    for hour in 0..feed.hours() {
        let prices = feed.price_map(hour)?;
        let volumes = feed.hourly_volumes(hour)?;
        let sample = traffic::sample_traffic(hour, &volumes, &traffic_params, &mut rng)?;
        if sample.degenerate {
            degenerate_hours += 1;
            continue;
        }
        for event in sample.events {
            let p_in = prices.get(&event.token_in)?;
            let p_out = prices.get(&event.token_out)?;
            let amount_in = event.usd_amount / p_in;
            for maker in makers.iter_mut() {
                match maker.execute(&event.token_in, &event.token_out, amount_in, &prices) {
                    Ok(outcome) => {
                        match capital_efficiency(outcome.amount_in, outcome.amount_out, p_in, p_out)
                        {
                            Some(ce) => swaps.push(SwapRecord {
                                swap_index,
                                hour,
                                maker: maker.label().to_string(),
                                token_in: event.token_in.clone(),
                                token_out: event.token_out.clone(),
                                amount_in: outcome.amount_in,
                                amount_out: outcome.amount_out,
                                capital_efficiency: ce,
                            }),
                            None => zero_output_skips += 1,
                        }
                        for unit in maker.units_touched(&event.token_in, &event.token_out)? {
                            let value = maker.impermanent_loss(&unit, &prices)?;
                            il.push(IlRecord {
                                swap_index,
                                hour,
                                maker: maker.label().to_string(),
                                unit: unit.as_str().to_string(),
                                value,
                            });
                        }
                    }
                    Err(Error::SwapRefused) | Err(Error::DustFloor) => {
                        *refusals.get_mut(maker.label()).expect("label known") += 1;
                    }
                    Err(e) => return Err(e),
                }
            }
            swap_index += 1;
        }
    }

    let mut summary = Vec::new();
    for label in &maker_labels {
        let ce: Vec<f64> = swaps
            .iter()
            .filter(|s| &s.maker == label)
            .map(|s| s.capital_efficiency)
            .collect();
        summary.push(summary_row(label, "capital_efficiency", &ce));
        let ils: Vec<f64> = il
            .iter()
            .filter(|r| &r.maker == label)
            .map(|r| r.value)
            .collect();
        summary.push(summary_row(label, "impermanent_loss", &ils));
    }

    Ok(RunOutput {
        swaps,
        il,
        summary,
        maker_labels,
        events_sampled: swap_index,
        refusals,
        zero_output_skips,
        degenerate_hours,
    })
}
