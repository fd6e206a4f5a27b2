//! Price/volume feeds: ingestion of hourly (or daily) rows, linear
//! interpolation to a gap-free hourly grid, and synthetic feed generators
//! for scripted market scenarios.
//!
//! Timestamps are plain hour indices here; the CLI layer maps them to and
//! from calendar timestamps. A token's rows must be evenly spaced at either
//! one hour or one day; daily series get their hours filled by linear
//! interpolation, mirroring how per-day transaction volumes are spread
//! across the day.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::makers::{PriceMap, TokenId};
use crate::num;

pub const HOURS_PER_DAY: u64 = 24;

/// One feed observation.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedRow {
    pub hour: u64,
    pub token: TokenId,
    pub price: f64,
    pub daily_volume: f64,
    pub market_cap: f64,
}

/// A defect found while validating feed rows. Row indices are zero-based
/// positions in the input row list.
#[derive(Debug, Clone, PartialEq)]
pub enum Defect {
    NonPositivePrice {
        row: usize,
    },
    NonPositiveMarketCap {
        row: usize,
    },
    NegativeVolume {
        row: usize,
    },
    OutOfOrder {
        row: usize,
    },
    DuplicateTimestamp {
        row: usize,
    },
    /// A token's rows are not evenly spaced at one hour or one day; `hour`
    /// is the first missing timestamp.
    Gap {
        token: TokenId,
        hour: u64,
    },
    /// Fewer than two rows for a token spanning a multi-hour feed.
    ShortSeries {
        token: TokenId,
    },
    /// The token's rows do not span the feed's full time range.
    Coverage {
        token: TokenId,
        hour: u64,
    },
}

impl core::fmt::Display for Defect {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Defect::NonPositivePrice { row } => write!(f, "row {row}: non-positive price"),
            Defect::NonPositiveMarketCap { row } => {
                write!(f, "row {row}: non-positive market cap")
            }
            Defect::NegativeVolume { row } => write!(f, "row {row}: negative volume"),
            Defect::OutOfOrder { row } => write!(f, "row {row}: timestamps out of order"),
            Defect::DuplicateTimestamp { row } => write!(f, "row {row}: duplicate timestamp"),
            Defect::Gap { token, hour } => write!(f, "token {token}: missing hour {hour}"),
            Defect::ShortSeries { token } => {
                write!(f, "token {token}: fewer than two rows")
            }
            Defect::Coverage { token, hour } => {
                write!(f, "token {token}: no data at hour {hour}")
            }
        }
    }
}

/// Summary of a validation pass over raw rows.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub row_count: usize,
    pub tokens: Vec<TokenId>,
    pub hour_range: Option<(u64, u64)>,
    pub defects: Vec<Defect>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.defects.is_empty()
    }
}

/// Checks raw rows without building a feed: value sanity, ordering,
/// duplicates, spacing, and coverage.
pub fn validate_rows(rows: &[FeedRow]) -> ValidationReport {
    let mut defects = Vec::new();
    let mut tokens: Vec<TokenId> = Vec::new();
    let mut hour_range: Option<(u64, u64)> = None;

    let mut last_hour: Option<u64> = None;
    for (i, row) in rows.iter().enumerate() {
        if !num::is_pos_finite(row.price) {
            defects.push(Defect::NonPositivePrice { row: i });
        }
        if !num::is_pos_finite(row.market_cap) {
            defects.push(Defect::NonPositiveMarketCap { row: i });
        }
        if !(row.daily_volume.is_finite() && row.daily_volume >= 0.0) {
            defects.push(Defect::NegativeVolume { row: i });
        }
        if let Some(prev) = last_hour {
            if row.hour < prev {
                defects.push(Defect::OutOfOrder { row: i });
            }
        }
        last_hour = Some(row.hour);
        hour_range = Some(match hour_range {
            None => (row.hour, row.hour),
            Some((lo, hi)) => (lo.min(row.hour), hi.max(row.hour)),
        });
        if !tokens.contains(&row.token) {
            tokens.push(row.token.clone());
        }
    }
    tokens.sort();

    // Per-token spacing and coverage.
    if let Some((feed_lo, feed_hi)) = hour_range {
        let mut per_token: BTreeMap<&TokenId, Vec<(usize, u64)>> = BTreeMap::new();
        for (i, row) in rows.iter().enumerate() {
            per_token.entry(&row.token).or_default().push((i, row.hour));
        }
        for (token, entries) in per_token {
            let mut hours: Vec<(usize, u64)> = entries;
            hours.sort_by_key(|&(_, h)| h);
            for w in hours.windows(2) {
                if w[1].1 == w[0].1 {
                    defects.push(Defect::DuplicateTimestamp { row: w[1].0 });
                }
            }
            hours.dedup_by_key(|&mut (_, h)| h);
            if hours.len() < 2 && feed_hi > feed_lo {
                defects.push(Defect::ShortSeries {
                    token: token.clone(),
                });
                continue;
            }
            let step = if hours.len() >= 2 && hours[1].1 - hours[0].1 >= HOURS_PER_DAY {
                HOURS_PER_DAY
            } else {
                1
            };
            for w in hours.windows(2) {
                if w[1].1 - w[0].1 != step {
                    defects.push(Defect::Gap {
                        token: token.clone(),
                        hour: w[0].1 + step,
                    });
                }
            }
            if hours.first().map(|&(_, h)| h) != Some(feed_lo) {
                defects.push(Defect::Coverage {
                    token: token.clone(),
                    hour: feed_lo,
                });
            }
            // A series may stop short of the final hour only by less than
            // one step (a daily series ending inside the last day); the
            // tail is held flat when the feed is built.
            if let Some(&(_, last)) = hours.last() {
                if feed_hi >= last + step {
                    defects.push(Defect::Coverage {
                        token: token.clone(),
                        hour: last + step,
                    });
                }
            }
        }
    }

    ValidationReport {
        row_count: rows.len(),
        tokens,
        hour_range,
        defects,
    }
}

/// Piecewise-linear interpolation of a sparse series onto every hour
/// between its first and last points. Endpoints match the inputs exactly.
pub fn interpolate_hourly(points: &[(u64, f64)]) -> Result<Vec<f64>> {
    if points.len() < 2 {
        return Err(Error::InvalidInput(
            "interpolation needs at least two points",
        ));
    }
    for w in points.windows(2) {
        if w[1].0 == w[0].0 {
            return Err(Error::InvalidInput("duplicate timestamps"));
        }
        if w[1].0 < w[0].0 {
            return Err(Error::InvalidInput("unsorted timestamps"));
        }
    }
    let first = points[0].0;
    let last = points[points.len() - 1].0;
    let mut out = Vec::with_capacity((last - first + 1) as usize);
    let mut seg = 0usize;
    for hour in first..=last {
        while points[seg + 1].0 < hour {
            seg += 1;
        }
        let (h0, v0) = points[seg];
        let (h1, v1) = points[seg + 1];
        if hour == h0 {
            out.push(v0);
        } else if hour == h1 {
            out.push(v1);
        } else {
            let t = (hour - h0) as f64 / (h1 - h0) as f64;
            out.push(v0 + (v1 - v0) * t);
        }
    }
    Ok(out)
}

/// A validated, gap-free hourly feed.
#[derive(Debug, Clone)]
pub struct Feed {
    start_hour: u64,
    hours: usize,
    tokens: Vec<TokenId>,
    prices: BTreeMap<TokenId, Vec<f64>>,
    volumes: BTreeMap<TokenId, Vec<f64>>,
    caps: BTreeMap<TokenId, Vec<f64>>,
}

impl Feed {
    /// Builds a feed from raw rows, failing on the first defect. Daily
    /// series get prices and market caps interpolated per hour; per-day
    /// volumes are interpolated between consecutive days' values for every
    /// token.
    pub fn from_rows(rows: &[FeedRow]) -> Result<Self> {
        let report = validate_rows(rows);
        if let Some(defect) = report.defects.first() {
            return Err(match defect {
                Defect::Gap { hour, .. } | Defect::Coverage { hour, .. } => {
                    Error::FeedGap { hour: *hour }
                }
                _ => Error::InvalidInput("feed rows failed validation"),
            });
        }
        let (start_hour, end_hour) = report.hour_range.ok_or(Error::InvalidInput("empty feed"))?;
        let hours = (end_hour - start_hour + 1) as usize;

        let mut prices = BTreeMap::new();
        let mut volumes = BTreeMap::new();
        let mut caps = BTreeMap::new();
        for token in &report.tokens {
            let mut price_pts = Vec::new();
            let mut cap_pts = Vec::new();
            let mut day_volume_pts: Vec<(u64, f64)> = Vec::new();
            for row in rows.iter().filter(|r| &r.token == token) {
                price_pts.push((row.hour, row.price));
                cap_pts.push((row.hour, row.market_cap));
                let day_hour = row.hour - (row.hour - start_hour) % HOURS_PER_DAY;
                if day_volume_pts.last().map(|&(h, _)| h) != Some(day_hour) {
                    day_volume_pts.push((day_hour, row.daily_volume));
                }
            }
            price_pts.sort_by_key(|&(h, _)| h);
            cap_pts.sort_by_key(|&(h, _)| h);

            let mut series = if hours == 1 || price_pts.len() == 1 {
                alloc::vec![price_pts[0].1]
            } else {
                interpolate_hourly(&price_pts)?
            };
            let mut cap_series = if hours == 1 || cap_pts.len() == 1 {
                alloc::vec![cap_pts[0].1]
            } else {
                interpolate_hourly(&cap_pts)?
            };
            // Daily series may stop inside the last day; hold flat.
            let last_price = *series.last().expect("non-empty");
            series.resize(hours, last_price);
            let last_cap = *cap_series.last().expect("non-empty");
            cap_series.resize(hours, last_cap);
            let vol_series = if day_volume_pts.len() < 2 {
                alloc::vec![day_volume_pts[0].1; hours]
            } else {
                let mut v = interpolate_hourly(&day_volume_pts)?;
                // Hold the last day's value through its remaining hours.
                let last = *v.last().expect("non-empty");
                v.resize(hours, last);
                v
            };
            prices.insert(token.clone(), series);
            caps.insert(token.clone(), cap_series);
            volumes.insert(token.clone(), vol_series);
        }
        Ok(Self {
            start_hour,
            hours,
            tokens: report.tokens,
            prices,
            volumes,
            caps,
        })
    }

    pub fn hours(&self) -> usize {
        self.hours
    }

    pub fn start_hour(&self) -> u64 {
        self.start_hour
    }

    pub fn tokens(&self) -> &[TokenId] {
        &self.tokens
    }

    /// Oracle prices at hour offset `h` from the feed start.
    pub fn price_map(&self, h: usize) -> Result<PriceMap> {
        if h >= self.hours {
            return Err(Error::FeedGap {
                hour: self.start_hour + h as u64,
            });
        }
        let mut map = PriceMap::new();
        for token in &self.tokens {
            map.set(token.clone(), self.prices[token][h])?;
        }
        Ok(map)
    }

    /// Interpolated per-token volume weights at hour offset `h`.
    pub fn hourly_volumes(&self, h: usize) -> Result<Vec<(TokenId, f64)>> {
        if h >= self.hours {
            return Err(Error::FeedGap {
                hour: self.start_hour + h as u64,
            });
        }
        Ok(self
            .tokens
            .iter()
            .map(|t| (t.clone(), self.volumes[t][h]))
            .collect())
    }

    /// Market caps at the first timestep, for pool sizing.
    pub fn initial_market_caps(&self) -> Vec<(TokenId, f64)> {
        self.tokens
            .iter()
            .map(|t| (t.clone(), self.caps[t][0]))
            .collect()
    }

    /// Total market cap at hour offset `h`.
    pub fn total_market_cap(&self, h: usize) -> Result<f64> {
        if h >= self.hours {
            return Err(Error::FeedGap {
                hour: self.start_hour + h as u64,
            });
        }
        Ok(self.tokens.iter().map(|t| self.caps[t][h]).sum())
    }
}

// ---------------------------------------------------------------------------
// Synthetic feeds
// ---------------------------------------------------------------------------

/// Scenario shape of a synthetic feed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthKind {
    /// Constant prices and volumes.
    Flat,
    /// Geometric random walk with configurable drift and volatility.
    RandomWalk,
    /// Upward market: total market cap ends at `cap_growth` times its start
    /// (default 2.33), volumes ramp by `volume_growth` (default +78%).
    Bull,
    /// Downward market: cap factor default 0.36, volumes default -67%.
    Bear,
    /// One token decays to `crash_depth` of its initial price over the tail
    /// of the window; the rest follow a random walk.
    Crash,
}

impl SynthKind {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "flat" => SynthKind::Flat,
            "random_walk" => SynthKind::RandomWalk,
            "bull" => SynthKind::Bull,
            "bear" => SynthKind::Bear,
            "crash" => SynthKind::Crash,
            _ => return Err(Error::InvalidInput("unknown synthetic feed kind")),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            SynthKind::Flat => "flat",
            SynthKind::RandomWalk => "random_walk",
            SynthKind::Bull => "bull",
            SynthKind::Bear => "bear",
            SynthKind::Crash => "crash",
        }
    }
}

/// Initial conditions of one synthetic token.
#[derive(Debug, Clone)]
pub struct SynthTokenSpec {
    pub symbol: String,
    pub initial_price: f64,
    pub market_cap: f64,
    pub daily_volume: f64,
}

/// Parameters of a synthetic feed.
#[derive(Debug, Clone)]
pub struct SynthParams {
    pub kind: SynthKind,
    pub tokens: Vec<SynthTokenSpec>,
    pub hours: usize,
    /// Log-price drift per hour (random-walk and crash kinds).
    pub drift_per_hour: f64,
    /// Per-token drift overrides by symbol, on top of `drift_per_hour`.
    pub drift_overrides: Vec<(String, f64)>,
    /// Log-price standard deviation per hour; must be positive for every
    /// kind except `Flat`.
    pub volatility_per_hour: f64,
    /// Total relative change of daily volumes across the window.
    pub volume_growth: f64,
    /// Total market-cap factor pinned at the window end (bull/bear kinds).
    pub cap_growth: f64,
    /// Token that crashes (crash kind); defaults to the last token.
    pub crash_token: Option<String>,
    /// Hour at which the crash decay starts.
    pub crash_start_hour: usize,
    /// Fraction of the initial price the crashed token ends at.
    pub crash_depth: f64,
}

impl SynthParams {
    /// Baseline parameters for a kind: callers override fields as needed.
    pub fn defaults(kind: SynthKind, tokens: Vec<SynthTokenSpec>, hours: usize) -> Self {
        let (volume_growth, cap_growth) = match kind {
            SynthKind::Bull => (0.78, 2.33),
            SynthKind::Bear => (-0.67, 0.36),
            _ => (0.0, 1.0),
        };
        Self {
            kind,
            tokens,
            hours,
            drift_per_hour: 0.0,
            drift_overrides: Vec::new(),
            volatility_per_hour: 0.005,
            volume_growth,
            cap_growth,
            crash_token: None,
            crash_start_hour: hours / 2,
            crash_depth: 0.01,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.tokens.len() < 2 {
            return Err(Error::InvalidInput("a feed needs at least two tokens"));
        }
        if self.hours < 2 {
            return Err(Error::InvalidInput("a feed needs at least two hours"));
        }
        for t in &self.tokens {
            if !num::is_pos_finite(t.initial_price) {
                return Err(Error::InvalidInput("initial price must be positive"));
            }
            if !num::is_pos_finite(t.market_cap) {
                return Err(Error::InvalidInput("market cap must be positive"));
            }
            if !(t.daily_volume.is_finite() && t.daily_volume >= 0.0) {
                return Err(Error::InvalidInput("daily volume must be non-negative"));
            }
        }
        if self.kind != SynthKind::Flat && !num::is_pos_finite(self.volatility_per_hour) {
            return Err(Error::InvalidInput("volatility must be positive"));
        }
        if self.kind == SynthKind::Crash {
            if !(self.crash_depth > 0.0 && self.crash_depth <= 0.01) {
                return Err(Error::InvalidInput("crash depth must lie in (0, 0.01]"));
            }
            if self.crash_start_hour + 1 >= self.hours {
                return Err(Error::InvalidInput(
                    "crash must start before the final hour",
                ));
            }
        }
        Ok(())
    }
}

/// Generates a deterministic synthetic feed: one row per token per hour,
/// hour-major, tokens alphabetical.
pub fn synth_feed(params: &SynthParams, seed: u64) -> Result<Vec<FeedRow>> {
    params.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let hours = params.hours;
    let steps = hours - 1;

    let mut specs: Vec<&SynthTokenSpec> = params.tokens.iter().collect();
    specs.sort_by(|a, b| a.symbol.cmp(&b.symbol));

    let crash_symbol = match params.kind {
        SynthKind::Crash => Some(
            params
                .crash_token
                .clone()
                .unwrap_or_else(|| specs.last().expect("non-empty").symbol.clone()),
        ),
        _ => None,
    };
    if let Some(sym) = &crash_symbol {
        if !specs.iter().any(|s| &s.symbol == sym) {
            return Err(Error::InvalidInput("crash token not in universe"));
        }
    }

    // Per-token log-price paths, drawn in alphabetical order.
    let mut paths: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for spec in &specs {
        let drift = params
            .drift_overrides
            .iter()
            .find(|(sym, _)| sym == &spec.symbol)
            .map(|&(_, d)| d)
            .unwrap_or(params.drift_per_hour);
        let mut log_noise = Vec::with_capacity(hours);
        log_noise.push(0.0);
        let mut acc = 0.0;
        for _ in 0..steps {
            let z: f64 = StandardNormal.sample(&mut rng);
            acc += params.volatility_per_hour * z;
            log_noise.push(acc);
        }
        let path = match params.kind {
            SynthKind::Flat => alloc::vec![spec.initial_price; hours],
            SynthKind::RandomWalk => (0..hours)
                .map(|h| spec.initial_price * num::exp(drift * h as f64 + log_noise[h]))
                .collect(),
            SynthKind::Bull | SynthKind::Bear => {
                // Brownian bridge pins the noise to zero at both ends, so
                // the terminal cap factor is hit exactly while the interior
                // still wiggles.
                let end = log_noise[steps];
                let trend = num::ln(params.cap_growth) / steps as f64;
                (0..hours)
                    .map(|h| {
                        let bridge = log_noise[h] - end * h as f64 / steps as f64;
                        spec.initial_price * num::exp(trend * h as f64 + bridge)
                    })
                    .collect()
            }
            SynthKind::Crash => {
                if crash_symbol.as_deref() == Some(spec.symbol.as_str()) {
                    let start = params.crash_start_hour;
                    let pre: Vec<f64> = (0..=start)
                        .map(|h| spec.initial_price * num::exp(drift * h as f64 + log_noise[h]))
                        .collect();
                    let p_start = pre[start];
                    let target = params.crash_depth * spec.initial_price;
                    let span = (hours - 1 - start) as f64;
                    let mut path = pre;
                    for h in start + 1..hours {
                        let t = (h - start) as f64 / span;
                        // exponential decay pinned to the target price
                        path.push(p_start * num::exp(num::ln(target / p_start) * t));
                    }
                    path
                } else {
                    (0..hours)
                        .map(|h| spec.initial_price * num::exp(drift * h as f64 + log_noise[h]))
                        .collect()
                }
            }
        };
        paths.insert(spec.symbol.as_str(), path);
    }

    let days = hours.div_ceil(HOURS_PER_DAY as usize);
    let mut rows = Vec::with_capacity(hours * specs.len());
    // hour-major so rows come out sorted by timestamp
    #[allow(clippy::needless_range_loop)]
    for hour in 0..hours {
        let day = hour / HOURS_PER_DAY as usize;
        let day_frac = if days > 1 {
            day as f64 / (days - 1) as f64
        } else {
            0.0
        };
        for spec in &specs {
            let price = paths[spec.symbol.as_str()][hour];
            let supply = spec.market_cap / spec.initial_price;
            rows.push(FeedRow {
                hour: hour as u64,
                token: TokenId::new(spec.symbol.clone()),
                price,
                daily_volume: spec.daily_volume * (1.0 + params.volume_growth * day_frac),
                market_cap: price * supply,
            });
        }
    }
    Ok(rows)
}
