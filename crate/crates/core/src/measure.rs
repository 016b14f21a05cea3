//! Sweep rows, per-run measurement and with/without-MTM gain summaries.
//!
//! One schedule is computed per `(variant, seed)` and measured at every load;
//! the routing pair samples depend on the seed only, so both variants of a
//! seed are measured on the same pairs.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::metric::total_mtm;
use crate::routing::RoutingContext;
use crate::scheduler::{run_schedule, Limits, ScheduleTrace, Termination};
use crate::world::World;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variant {
    WithMtm,
    WithoutMtm,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::WithMtm, Variant::WithoutMtm];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::WithMtm => "with_mtm",
            Variant::WithoutMtm => "without_mtm",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "with_mtm" => Some(Variant::WithMtm),
            "without_mtm" => Some(Variant::WithoutMtm),
            _ => None,
        }
    }

    pub fn uses_mtm(self) -> bool {
        self == Variant::WithMtm
    }
}

/// How a run ended, as recorded in a sweep row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    FixedPoint,
    MaxPower,
    Diverged,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::FixedPoint => "fixed_point",
            Outcome::MaxPower => "max_power",
            Outcome::Diverged => "diverged",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fixed_point" => Some(Outcome::FixedPoint),
            "max_power" => Some(Outcome::MaxPower),
            "diverged" => Some(Outcome::Diverged),
            _ => None,
        }
    }
}

impl From<Termination> for Outcome {
    fn from(t: Termination) -> Self {
        match t {
            Termination::FixedPoint => Outcome::FixedPoint,
            Termination::MaxPower => Outcome::MaxPower,
        }
    }
}

/// One `(load, variant, seed)` measurement. Diverged rows carry zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub load: f64,
    pub variant: Variant,
    pub seed: u64,
    pub traffic_requirement_proxy: f64,
    pub max_hops: usize,
    pub total_mtm: f64,
    pub rounds: usize,
    pub shortfall: f64,
    pub outcome: Outcome,
}

impl SweepRow {
    /// Row order: load, then variant, then seed.
    pub fn order(a: &Self, b: &Self) -> core::cmp::Ordering {
        a.load
            .total_cmp(&b.load)
            .then(a.variant.cmp(&b.variant))
            .then(a.seed.cmp(&b.seed))
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn sort(&mut self) {
        self.rows.sort_by(SweepRow::order);
    }
}

/// Rows of one `(variant, seed)` schedule and the trace that produced them.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub rows: Vec<SweepRow>,
    pub trace: ScheduleTrace,
}

/// Schedules `world` once for `variant` and measures every load.
///
/// The schedule and the routing pairs both use `seed`. A diverged schedule
/// yields rows flagged [`Outcome::Diverged`] rather than an error.
pub fn evaluate(
    world: &World,
    variant: Variant,
    seed: u64,
    loads: &[f64],
    limits: &Limits,
) -> Result<Evaluation> {
    let (assignment, trace) = match run_schedule(world, seed, variant.uses_mtm(), limits) {
        Ok(done) => done,
        Err(Error::Divergence { rounds, trace }) => {
            let rows = loads
                .iter()
                .map(|&load| SweepRow {
                    load,
                    variant,
                    seed,
                    traffic_requirement_proxy: 0.0,
                    max_hops: 0,
                    total_mtm: 0.0,
                    rounds,
                    shortfall: 0.0,
                    outcome: Outcome::Diverged,
                })
                .collect();
            return Ok(Evaluation { rows, trace: *trace });
        }
        Err(e) => return Err(e),
    };
    let outcome = trace
        .termination
        .map(Outcome::from)
        .ok_or_else(|| Error::Protocol("schedule returned without a termination rule".into()))?;
    let total = total_mtm(&assignment, world)?;
    let ctx = RoutingContext::new(world, &assignment, seed)?;
    let mut rows = Vec::with_capacity(loads.len());
    for &load in loads {
        let req = ctx.traffic_requirement(load)?;
        rows.push(SweepRow {
            load,
            variant,
            seed,
            traffic_requirement_proxy: req.proxy,
            max_hops: ctx.max_permitted_hops(load),
            total_mtm: total,
            rounds: trace.round_count(),
            shortfall: req.shortfall,
            outcome,
        });
    }
    Ok(Evaluation { rows, trace })
}

/// Per-load means over the non-diverged rows of one variant.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LoadMeans {
    pub traffic: f64,
    pub hops: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoadComparison {
    pub load: f64,
    pub with_mtm: LoadMeans,
    pub without_mtm: LoadMeans,
    /// (without − with) / without × 100; 0 when the baseline mean is 0.
    pub traffic_gain: f64,
    /// (with − without) / without × 100; 0 when the baseline mean is 0.
    pub hops_gain: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub max_traffic_gain_percent: f64,
    pub max_hops_gain_percent: f64,
    /// Load attaining the traffic maximum; the lowest such load on ties.
    pub argmax_load: f64,
    pub per_load: Vec<LoadComparison>,
}

fn gain(baseline: f64, delta: f64) -> f64 {
    if baseline == 0.0 {
        0.0
    } else {
        delta / baseline * 100.0
    }
}

/// Per-load mean gains of `with_mtm` over `without_mtm` and their maxima.
pub fn improvement_summary(table: &SweepTable) -> Result<Summary> {
    let mut sums: BTreeMap<(u64, Variant), (f64, f64, f64, usize)> = BTreeMap::new();
    for row in table.rows.iter().filter(|r| r.outcome != Outcome::Diverged) {
        let key = (row.load.to_bits(), row.variant);
        let e = sums.entry(key).or_insert((row.load, 0.0, 0.0, 0));
        e.1 += row.traffic_requirement_proxy;
        e.2 += row.max_hops as f64;
        e.3 += 1;
    }
    let mut loads: Vec<f64> = sums.values().map(|e| e.0).collect();
    loads.sort_by(f64::total_cmp);
    loads.dedup();
    if loads.is_empty() {
        return Err(Error::Summary("table has no completed rows".into()));
    }
    let means = |load: f64, v: Variant| -> Result<LoadMeans> {
        let (_, t, h, n) = sums.get(&(load.to_bits(), v)).ok_or_else(|| {
            Error::Summary(format!("no {} rows at load {load}", v.as_str()))
        })?;
        Ok(LoadMeans {
            traffic: t / *n as f64,
            hops: h / *n as f64,
            count: *n,
        })
    };
    let mut per_load = Vec::with_capacity(loads.len());
    for load in loads {
        let with_mtm = means(load, Variant::WithMtm)?;
        let without_mtm = means(load, Variant::WithoutMtm)?;
        per_load.push(LoadComparison {
            load,
            traffic_gain: gain(without_mtm.traffic, without_mtm.traffic - with_mtm.traffic),
            hops_gain: gain(without_mtm.hops, with_mtm.hops - without_mtm.hops),
            with_mtm,
            without_mtm,
        });
    }
    let mut best = &per_load[0];
    for c in &per_load[1..] {
        if c.traffic_gain > best.traffic_gain {
            best = c;
        }
    }
    let max_hops = per_load
        .iter()
        .map(|c| c.hops_gain)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(Summary {
        max_traffic_gain_percent: best.traffic_gain,
        max_hops_gain_percent: max_hops,
        argmax_load: best.load,
        per_load,
    })
}
