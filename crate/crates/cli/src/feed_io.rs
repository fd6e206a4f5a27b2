//! CSV feed files: `timestamp,token,price,daily_volume,market_cap` with
//! ISO-8601 timestamps at hourly resolution. Internally timestamps become
//! hours since the Unix epoch.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ammlab_core::feed::FeedRow;
use ammlab_core::makers::TokenId;
use chrono::{DateTime, TimeZone, Utc};

use crate::{CliError, Result};

pub const FEED_HEADER: &str = "timestamp,token,price,daily_volume,market_cap";

/// Converts an RFC 3339 timestamp to hours since the epoch; rejects
/// sub-hour offsets.
pub fn parse_hour(ts: &str) -> std::result::Result<u64, String> {
    let dt = DateTime::parse_from_rfc3339(ts).map_err(|e| format!("bad timestamp: {e}"))?;
    let secs = dt.timestamp();
    if secs < 0 {
        return Err("timestamps before 1970 are not supported".into());
    }
    if secs % 3600 != 0 {
        return Err("timestamp is not on an hour boundary".into());
    }
    Ok((secs / 3600) as u64)
}

/// Hour index back to an RFC 3339 timestamp.
pub fn format_hour(hour: u64) -> String {
    let dt = Utc
        .timestamp_opt(hour as i64 * 3600, 0)
        .single()
        .expect("hour index within chrono range");
    dt.format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

/// A parse failure tied to a file line (1-based; line 1 is the header).
#[derive(Debug, Clone)]
pub struct ParseDefect {
    pub line: usize,
    pub message: String,
}

/// Reads a feed file into rows. Unparseable lines are returned as defects
/// alongside whatever parsed cleanly, so validation can report them all.
pub fn read_feed(path: &Path) -> Result<(Vec<FeedRow>, Vec<ParseDefect>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    {
        let headers = reader
            .headers()
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        let expected: Vec<&str> = FEED_HEADER.split(',').collect();
        let got: Vec<&str> = headers.iter().collect();
        if got != expected {
            return Err(CliError::Validation(format!(
                "{}: malformed header {:?}, expected {FEED_HEADER:?}",
                path.display(),
                got.join(",")
            )));
        }
    }
    let mut rows = Vec::new();
    let mut defects = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                defects.push(ParseDefect {
                    line,
                    message: e.to_string(),
                });
                continue;
            }
        };
        if record.len() != 5 {
            defects.push(ParseDefect {
                line,
                message: "expected 5 fields".into(),
            });
            continue;
        }
        let hour = match parse_hour(&record[0]) {
            Ok(h) => h,
            Err(m) => {
                defects.push(ParseDefect { line, message: m });
                continue;
            }
        };
        let mut nums = [0f64; 3];
        let mut bad = false;
        for (slot, idx) in [(0usize, 2usize), (1, 3), (2, 4)] {
            match record[idx].parse::<f64>() {
                Ok(v) => nums[slot] = v,
                Err(e) => {
                    defects.push(ParseDefect {
                        line,
                        message: format!("field {}: {e}", idx + 1),
                    });
                    bad = true;
                }
            }
        }
        if bad {
            continue;
        }
        rows.push(FeedRow {
            hour,
            token: TokenId::new(&record[1]),
            price: nums[0],
            daily_volume: nums[1],
            market_cap: nums[2],
        });
    }
    Ok((rows, defects))
}

/// Writes rows as a feed file.
pub fn write_feed(path: &Path, rows: &[FeedRow]) -> Result<()> {
    let file =
        File::create(path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{FEED_HEADER}")?;
    for row in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            format_hour(row.hour),
            row.token,
            row.price,
            row.daily_volume,
            row.market_cap
        )?;
    }
    w.flush()?;
    Ok(())
}
