//! Per-run schedule traces as line-oriented `key=value` text.
//!
//! One header line, one line per round, one closing line. Lists are
//! comma-separated node-ordered values; commits are `node:channel:power`.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use mtm_core::measure::{Outcome, Variant};
use mtm_core::scheduler::{RoundKind, RoundRecord, ScheduleTrace};

use crate::error::{Result, SimError};

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(",")
}

fn kind(k: RoundKind) -> &'static str {
    match k {
        RoundKind::Init => "init",
        RoundKind::Channel => "channel",
        RoundKind::Full => "full",
    }
}

fn round_line(r: &RoundRecord) -> String {
    let mut s = String::new();
    let commits = join(&r.committed, |p| {
        format!("{}:{}:{}", p.node.index(), p.new_channel.0, p.new_power.0)
    });
    // write! into a String cannot fail
    let _ = write!(
        s,
        "round={} kind={} epoch={} epoch_start={} proposals={} committed={} power_updated={} \
         tax={:.9e} tax_step={:.9e} aggregate_interference={:.9e} next_tax={:.9e} \
         commits={} channels={} power={}",
        r.round,
        kind(r.kind),
        r.epoch,
        r.epoch_start,
        r.proposals.len(),
        r.committed.len(),
        r.power_updated,
        r.tax,
        r.tax_step,
        r.aggregate_interference,
        r.next_tax,
        if commits.is_empty() { "-" } else { &commits },
        join(&r.channels, |c| c.0.to_string()),
        join(&r.power, |p| p.0.to_string()),
    );
    s
}

pub fn write_trace<W: Write>(
    out: &mut W,
    variant: Variant,
    seed: u64,
    trace: &ScheduleTrace,
    outcome: Outcome,
) -> std::io::Result<()> {
    let nodes = trace.rounds.first().map_or(0, |r| r.channels.len());
    writeln!(out, "variant={} seed={seed} nodes={nodes}", variant.as_str())?;
    for r in &trace.rounds {
        writeln!(out, "{}", round_line(r))?;
    }
    writeln!(
        out,
        "termination={} rounds={}",
        outcome.as_str(),
        trace.round_count()
    )
}

/// File name of one run's trace inside a trace directory.
pub fn trace_path(dir: &Path, variant: Variant, seed: u64) -> PathBuf {
    dir.join(format!("{}_seed{seed}.trace", variant.as_str()))
}

pub fn emit_trace(
    path: &Path,
    variant: Variant,
    seed: u64,
    trace: &ScheduleTrace,
    outcome: Outcome,
) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
    }
    let file = std::fs::File::create(path).map_err(|e| SimError::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    write_trace(&mut out, variant, seed, trace, outcome)
        .and_then(|_| out.flush())
        .map_err(|e| SimError::io(path, e))
}
