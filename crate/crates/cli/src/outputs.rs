//! CSV outputs of a run: per-swap efficiency, per-unit impermanent loss,
//! and the per-maker quartile summary, plus the printable summary table.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ammlab_core::sim::RunOutput;

use crate::feed_io::format_hour;
use crate::Result;

pub const SWAPS_HEADER: &str =
    "swap_index,timestamp,maker,token_in,token_out,amount_in,amount_out,capital_efficiency";
pub const IL_HEADER: &str = "swap_index,timestamp,maker,unit,impermanent_loss";
pub const SUMMARY_HEADER: &str = "maker,metric,q1,median,q3,count";

pub fn write_swaps(path: &Path, out: &RunOutput, start_hour: u64) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{SWAPS_HEADER}")?;
    for s in &out.swaps {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            s.swap_index,
            format_hour(start_hour + s.hour as u64),
            s.maker,
            s.token_in,
            s.token_out,
            s.amount_in,
            s.amount_out,
            s.capital_efficiency
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_il(path: &Path, out: &RunOutput, start_hour: u64) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{IL_HEADER}")?;
    for r in &out.il {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.swap_index,
            format_hour(start_hour + r.hour as u64),
            r.maker,
            r.unit,
            r.value
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary(path: &Path, out: &RunOutput) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{SUMMARY_HEADER}")?;
    for row in &out.summary {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            row.maker, row.metric, row.q1, row.median, row.q3, row.count
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Human-readable quartile table, one line per maker and metric.
pub fn summary_table(out: &RunOutput) -> String {
    let mut text = String::new();
    let _ = writeln!(
        text,
        "{:<14} {:<20} {:>14} {:>14} {:>14} {:>9}",
        "maker", "metric", "q1", "median", "q3", "count"
    );
    for row in &out.summary {
        let _ = writeln!(
            text,
            "{:<14} {:<20} {:>14.8} {:>14.8} {:>14.8} {:>9}",
            row.maker, row.metric, row.q1, row.median, row.q3, row.count
        );
    }
    for (maker, n) in &out.refusals {
        if *n > 0 {
            let _ = writeln!(text, "refused swaps ({maker}): {n}");
        }
    }
    if out.degenerate_hours > 0 {
        let _ = writeln!(
            text,
            "hours without tradable volume: {}",
            out.degenerate_hours
        );
    }
    text
}
