//! Seeded sweeps over `(variant, seed)` runs, single runs and connectivity sweeps.
//!
//! Runs execute in parallel; results are merged and sorted before anything
//! is returned, so output never depends on thread scheduling.

use mtm_core::measure::{evaluate, Evaluation, Outcome, SweepTable, Variant};
use mtm_core::radio::poisson_boolean_connected;
use mtm_core::scheduler::ScheduleTrace;
use rayon::prelude::*;

use crate::config::Config;
use crate::error::Result;

/// One schedule's trace, kept for exclusiveness audits and trace files.
#[derive(Clone, Debug)]
pub struct RunTrace {
    pub variant: Variant,
    pub seed: u64,
    pub outcome: Outcome,
    pub trace: ScheduleTrace,
}

#[derive(Clone, Debug)]
pub struct SweepOutput {
    pub table: SweepTable,
    /// Ordered by (variant, seed).
    pub traces: Vec<RunTrace>,
}

fn outcome_of(eval: &Evaluation) -> Outcome {
    eval.rows.first().map_or(Outcome::Diverged, |r| r.outcome)
}

/// Every `(load, variant, seed)` row of `config`'s sweep.
///
/// Both variants of a seed share the world built from that seed, so their
/// rows differ only through the scheduler.
pub fn run_sweep(config: &Config) -> Result<SweepOutput> {
    config.validate()?;
    let variants = config.variants()?;
    let limits = config.limits();
    let jobs: Vec<(Variant, u64)> = variants
        .iter()
        .flat_map(|&v| config.sweep.seeds.iter().map(move |&s| (v, s)))
        .collect();
    let results: Vec<Result<Finished>> = jobs
        .par_iter()
        .map(|&(variant, seed)| {
            let world = config.world(seed)?;
            let eval = evaluate(&world, variant, seed, &config.sweep.loads, &limits)?;
            log::debug!(
                "{} seed {seed}: {} rounds, {}",
                variant.as_str(),
                eval.trace.round_count(),
                outcome_of(&eval).as_str()
            );
            Ok(Finished { variant, seed, eval })
        })
        .collect();
    let mut table = SweepTable::default();
    let mut traces = Vec::with_capacity(results.len());
    for r in results {
        let Finished { variant, seed, eval } = r?;
        let outcome = outcome_of(&eval);
        if outcome == Outcome::Diverged {
            log::warn!("{} seed {seed} diverged", variant.as_str());
        }
        table.rows.extend(eval.rows);
        traces.push(RunTrace {
            variant,
            seed,
            outcome,
            trace: eval.trace,
        });
    }
    table.sort();
    traces.sort_by_key(|t| (t.variant, t.seed));
    Ok(SweepOutput { table, traces })
}

struct Finished {
    variant: Variant,
    seed: u64,
    eval: Evaluation,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub variant: Variant,
    pub seed: u64,
    pub outcome: Outcome,
    pub total_mtm: f64,
    pub rounds: usize,
    pub evaluation: Evaluation,
}

/// One schedule of `variant` on the world of `seed`, measured at the sweep loads.
pub fn run_single(config: &Config, seed: u64, variant: Variant) -> Result<RunOutput> {
    config.validate()?;
    let world = config.world(seed)?;
    let evaluation = evaluate(&world, variant, seed, &config.sweep.loads, &config.limits())?;
    let outcome = outcome_of(&evaluation);
    let total_mtm = evaluation.rows.first().map_or(0.0, |r| r.total_mtm);
    Ok(RunOutput {
        variant,
        seed,
        outcome,
        total_mtm,
        rounds: evaluation.trace.round_count(),
        evaluation,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConnectivityRow {
    pub radius: f64,
    pub seed: u64,
    pub component_count: usize,
    pub connected: bool,
    pub giant_fraction: f64,
}

/// Boolean-disc connectivity of each seed's placement at each configured radius.
/// Rows are ordered by (seed, radius).
pub fn run_connectivity(config: &Config) -> Result<Vec<ConnectivityRow>> {
    config.validate()?;
    let mut radii = config.connectivity.radii.clone();
    radii.sort_by(f64::total_cmp);
    let per_seed: Vec<Result<Vec<ConnectivityRow>>> = config
        .sweep
        .seeds
        .par_iter()
        .map(|&seed| {
            let topology = config.topology(seed)?;
            radii
                .iter()
                .map(|&radius| {
                    let c = poisson_boolean_connected(&topology, radius)?;
                    Ok(ConnectivityRow {
                        radius,
                        seed,
                        component_count: c.component_count,
                        connected: c.connected,
                        giant_fraction: c.giant_fraction,
                    })
                })
                .collect()
        })
        .collect();
    let mut rows = Vec::new();
    for r in per_seed {
        rows.extend(r?);
    }
    Ok(rows)
}
