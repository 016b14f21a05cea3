//! Distributed cross-layer channel assignment with power control.
//!
//! A run has three parts:
//!
//! 1. **Init.** Every node draws a round-0 priority `Prand(j)·W(j)` and nodes
//!    are assigned in descending priority. A node linked to an already
//!    assigned node of a neighboring cell inherits that node's channel;
//!    otherwise it takes its argmin-MTM channel (or a seeded uniform channel
//!    when MTM is disabled). Negotiation rounds follow only while some
//!    channel is overloaded.
//! 2. **Channel rounds.** Eligible nodes propose their best channel; the
//!    proposals are negotiated so that no two committed nodes share an
//!    interference area; each cell's clusterhead then recovers the members
//!    that may propose next round. An epoch ends when nobody is eligible and
//!    the next epoch redraws every priority.
//! 3. **Power rounds.** Each node best-responds to the current tax, then the
//!    tax takes a damped projected subgradient step. Once powers have been
//!    unchanged for `stable_rounds` records and the tax has settled, the
//!    power game freezes.
//!
//! The run ends when channels are settled (a full epoch-start evaluation
//! produced no proposal) and the power game is frozen: with every node at max
//! power that is [`Termination::MaxPower`], otherwise
//! [`Termination::FixedPoint`].

mod power;
mod state;

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use power::{power_best_response, update_tax, PowerGame};
pub(crate) use state::NetworkState;

use crate::assignment::{ChannelAssignment, ChannelId, PowerLevel};
use crate::error::{Error, Result};
use crate::rng;
use crate::topology::{CellId, NodeId};
use crate::world::World;

/// Relative margin a candidate must beat the current MTM by.
const IMPROVEMENT_MARGIN: f64 = 1e-12;

fn improves(current: f64, after: f64) -> bool {
    after < current * (1.0 - IMPROVEMENT_MARGIN)
}

/// A node's priority; `value == None` is the empty priority Φ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Priority {
    pub node: NodeId,
    pub value: Option<f64>,
}

impl Priority {
    pub fn is_empty(&self) -> bool {
        self.value.is_none()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Priorities {
    /// Round-0 draws; they fix the clusterheads for the whole run.
    pub round0: Vec<f64>,
    pub current: Vec<Priority>,
}

impl Priorities {
    /// `Prand(j)·W(j)` for every node, in ascending node order.
    pub fn draw<R: Rng>(world: &World, rng: &mut R) -> Self {
        let round0: Vec<f64> = world
            .topology
            .node_ids()
            .map(|j| rng::unit_open_closed(rng) * world.weight(j))
            .collect();
        let current = round0
            .iter()
            .enumerate()
            .map(|(j, &v)| Priority {
                node: NodeId::from(j),
                value: Some(v),
            })
            .collect();
        Self { round0, current }
    }

    pub fn get(&self, node: NodeId) -> Priority {
        self.current[node.index()]
    }

    pub fn clear(&mut self, node: NodeId) {
        self.current[node.index()].value = None;
    }

    /// Clusterhead of `cell`: highest round-0 priority among its members, ties to the lower id.
    pub fn clusterhead(&self, world: &World, cell: CellId) -> Option<NodeId> {
        world.topology.members(cell).fold(None, |best, j| match best {
            Some(b) if self.round0[b.index()] >= self.round0[j.index()] => Some(b),
            _ => Some(j),
        })
    }
}

/// A proposed cross-layer adjustment of one node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Proposal {
    pub node: NodeId,
    pub new_channel: ChannelId,
    pub new_power: PowerLevel,
    /// MTM of the node under the change, everything else fixed.
    pub mtm_after: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RoundKind {
    /// Round 0: priorities drawn and initial channels set.
    Init,
    /// Overload-resolution negotiation inside init; no power update.
    Channel,
    /// Channel negotiation followed by a power/tax update.
    Full,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    pub kind: RoundKind,
    pub epoch: usize,
    /// Every node was eligible this round.
    pub epoch_start: bool,
    pub proposals: Vec<Proposal>,
    /// Proposals applied this round, in commit order.
    pub committed: Vec<Proposal>,
    /// Power levels in force during the channel negotiation.
    pub channel_power: Vec<PowerLevel>,
    /// Whether the power/tax update ran this round.
    pub power_updated: bool,
    /// Tax the best responses were computed against.
    pub tax: f64,
    pub tax_step: f64,
    pub aggregate_interference: f64,
    pub next_tax: f64,
    /// Power levels at the end of the round.
    pub power: Vec<PowerLevel>,
    /// Channels at the end of the round.
    pub channels: Vec<ChannelId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    /// Rule (a): channels settled and powers converged below max.
    FixedPoint,
    /// Rule (b): channels settled and every node transmits at max power.
    MaxPower,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ScheduleTrace {
    pub rounds: Vec<RoundRecord>,
    pub termination: Option<Termination>,
}

impl ScheduleTrace {
    /// Rounds executed after round 0.
    pub fn round_count(&self) -> usize {
        self.rounds.last().map_or(0, |r| r.round)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Limits {
    pub max_rounds: usize,
    /// Largest per-node power change, in watts, still counted as unchanged.
    pub power_tolerance: f64,
    /// Largest tax change still counted as settled.
    pub tax_tolerance: f64,
    pub tax_step: f64,
    /// Step of power round `k` is `tax_step · tax_decay^k`, or 0 once that
    /// falls below `tax_tolerance`.
    pub tax_decay: f64,
    /// Target mean interferer count per node.
    pub tax_cap: f64,
    /// Records with identical powers needed before the power game freezes.
    pub stable_rounds: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_rounds: 500,
            power_tolerance: 1e-9,
            tax_tolerance: 1e-6,
            tax_step: 5e-4,
            tax_decay: 0.9,
            tax_cap: 20.0,
            stable_rounds: 3,
        }
    }
}

impl Limits {
    pub fn validate(&self) -> Result<()> {
        if self.max_rounds == 0 {
            return Err(Error::Config("max_rounds must be at least 1".into()));
        }
        if !(self.tax_step > 0.0) || !self.tax_step.is_finite() {
            return Err(Error::Config("tax step must be positive".into()));
        }
        if !(self.tax_decay > 0.0 && self.tax_decay <= 1.0) {
            return Err(Error::Config("tax decay must lie in (0, 1]".into()));
        }
        if !(self.tax_cap >= 0.0) {
            return Err(Error::Config("tax cap must be non-negative".into()));
        }
        if !(self.power_tolerance >= 0.0) || !(self.tax_tolerance >= 0.0) {
            return Err(Error::Config("tolerances must be non-negative".into()));
        }
        if self.stable_rounds == 0 {
            return Err(Error::Config("stable_rounds must be at least 1".into()));
        }
        Ok(())
    }
}

/// Most MTM-reducing (channel, power) candidate of node `i` over every pair;
/// `None` when no candidate strictly lowers its MTM.
pub fn select_candidate(
    i: NodeId,
    assignment: &ChannelAssignment,
    world: &World,
) -> Result<Option<Proposal>> {
    check_assignment(assignment, world)?;
    world.topology.try_position(i)?;
    let state = NetworkState::new(world, assignment.clone());
    Ok(best_candidate(&state, i, world.radio.levels()))
}

fn best_candidate(
    state: &NetworkState<'_>,
    i: NodeId,
    levels: impl Iterator<Item = PowerLevel> + Clone,
) -> Option<Proposal> {
    let current = state.mtm_now(i);
    let mut best: Option<Proposal> = None;
    for c in state.world.radio.channels() {
        for level in levels.clone() {
            let after = state.mtm_after(i, c, level);
            if best.map_or(true, |b| after < b.mtm_after) {
                best = Some(Proposal {
                    node: i,
                    new_channel: c,
                    new_power: level,
                    mtm_after: after,
                });
            }
        }
    }
    best.filter(|b| improves(current, b.mtm_after))
}

fn check_assignment(assignment: &ChannelAssignment, world: &World) -> Result<()> {
    if assignment.len() != world.node_count() || !assignment.is_valid_for(&world.radio) {
        return Err(Error::Parameter(
            "assignment does not match the world's nodes, channels and power levels".into(),
        ));
    }
    Ok(())
}

/// Interference radius a proposal claims: the larger of the current and proposed power.
fn claim_radius(p: &Proposal, world: &World, assignment: &ChannelAssignment) -> f64 {
    let level = p.new_power.max(assignment.power(p.node));
    world.radio.interference_range(level)
}

/// Greedy exclusive commit: by ascending `mtm_after` (ties to the lower node
/// id), a proposal commits iff its node is outside the interference area of
/// every node committed before it, and vice versa.
pub fn negotiate(
    proposals: &[Proposal],
    world: &World,
    assignment: &ChannelAssignment,
) -> Vec<Proposal> {
    let mut order: Vec<Proposal> = proposals.to_vec();
    order.sort_by(|a, b| {
        a.mtm_after
            .total_cmp(&b.mtm_after)
            .then(a.node.cmp(&b.node))
    });
    let mut committed: Vec<(Proposal, f64)> = Vec::new();
    for p in order {
        let r = claim_radius(&p, world, assignment);
        let here = world.topology.position(p.node);
        let clear = committed.iter().all(|(q, rq)| {
            let d = world.topology.position(q.node).distance(here);
            d > r && d > *rq
        });
        if clear {
            committed.push((p, r));
        }
    }
    committed.into_iter().map(|(p, _)| p).collect()
}

/// Clusterhead `i` recovers the members of its cell: for each member `j`
/// (ascending) a fresh `Prand` is drawn, and if it is below `W(j)` and `j`'s
/// priority is not Φ, `j` gets a new priority `Prand(j)·W(j)` and is returned.
pub fn clusterhead_recover<R: Rng>(
    i: NodeId,
    priorities: &mut Priorities,
    world: &World,
    rng: &mut R,
) -> Result<Vec<NodeId>> {
    world.topology.try_position(i)?;
    let cell = world.topology.cell_of(i);
    if priorities.clusterhead(world, cell) != Some(i) {
        return Err(Error::Protocol(format!(
            "{i} is not the clusterhead of cell {cell}"
        )));
    }
    let mut recovered = Vec::new();
    for j in world.topology.members(cell).filter(|&j| j != i) {
        let draw = rng::unit_open_closed(rng);
        if draw < world.weight(j) && !priorities.get(j).is_empty() {
            priorities.current[j.index()].value = Some(rng::unit_open_closed(rng) * world.weight(j));
            recovered.push(j);
        }
    }
    Ok(recovered)
}

/// Epoch/eligibility bookkeeping of the channel negotiation.
struct ChannelPhase {
    priorities: Priorities,
    eligible: Vec<bool>,
    clusterheads: Vec<NodeId>,
    epoch: usize,
    priority_rng: ChaCha8Rng,
    recovery_rng: ChaCha8Rng,
}

struct ChannelOutcome {
    epoch_start: bool,
    proposals: Vec<Proposal>,
    committed: Vec<Proposal>,
}

impl ChannelPhase {
    fn new(world: &World, seed: u64) -> Self {
        let mut priority_rng = rng::stream(seed, rng::PRIORITY);
        let priorities = Priorities::draw(world, &mut priority_rng);
        let clusterheads = world
            .topology
            .cells()
            .iter()
            .filter_map(|c| priorities.clusterhead(world, c.id))
            .collect();
        Self {
            priorities,
            eligible: vec![true; world.node_count()],
            clusterheads,
            epoch: 0,
            priority_rng,
            recovery_rng: rng::stream(seed, rng::RECOVERY),
        }
    }

    fn force_new_epoch(&mut self) {
        self.eligible.iter_mut().for_each(|e| *e = false);
    }

    fn round(&mut self, state: &mut NetworkState<'_>) -> ChannelOutcome {
        let world = state.world;
        let mut epoch_start = false;
        if !self.eligible.iter().any(|&e| e) {
            self.epoch += 1;
            epoch_start = true;
            for j in world.topology.node_ids() {
                let v = rng::unit_open_closed(&mut self.priority_rng) * world.weight(j);
                self.priorities.current[j.index()].value = Some(v);
            }
            self.eligible.iter_mut().for_each(|e| *e = true);
        }

        let mut proposals = Vec::new();
        for j in world.topology.node_ids() {
            if !self.eligible[j.index()] {
                continue;
            }
            let level = state.assignment.power(j);
            match best_candidate(state, j, core::iter::once(level)) {
                Some(p) => proposals.push(p),
                None => self.priorities.clear(j),
            }
        }

        let mut committed = Vec::new();
        for p in negotiate(&proposals, world, &state.assignment) {
            // earlier commits this round may have moved the node's reuse factor
            let now = state.mtm_now(p.node);
            let after = state.mtm_after(p.node, p.new_channel, p.new_power);
            if improves(now, after) {
                state.set_channel(p.node, p.new_channel);
                self.priorities.clear(p.node);
                committed.push(Proposal {
                    mtm_after: after,
                    ..p
                });
            }
        }

        self.eligible.iter_mut().for_each(|e| *e = false);
        for &h in &self.clusterheads {
            if !self.priorities.get(h).is_empty() {
                self.eligible[h.index()] = true;
            }
            let recovered =
                clusterhead_recover(h, &mut self.priorities, world, &mut self.recovery_rng)
                    .expect("clusterheads are fixed at round 0");
            for j in recovered {
                self.eligible[j.index()] = true;
            }
        }
        state.assignment.epoch = self.epoch;

        ChannelOutcome {
            epoch_start,
            proposals,
            committed,
        }
    }
}

/// "Some channel carries more than ceil(m / L) of the m nodes in some node's interference area."
pub(crate) fn overloaded(state: &NetworkState<'_>) -> bool {
    let world = state.world;
    let l = world.radio.channel_count;
    let mut area = Vec::new();
    let mut counts = vec![0usize; l + 1];
    for i in world.topology.node_ids() {
        state.area(i, &mut area);
        counts.iter_mut().for_each(|c| *c = 0);
        for &j in &area {
            counts[state.channel(j).index()] += 1;
        }
        let limit = area.len().div_ceil(l);
        if counts[..l].iter().any(|&c| c > limit) {
            return true;
        }
    }
    false
}

fn record(
    round: usize,
    kind: RoundKind,
    phase: &ChannelPhase,
    outcome: ChannelOutcome,
    state: &NetworkState<'_>,
    channel_power: Vec<PowerLevel>,
    tax: f64,
) -> RoundRecord {
    RoundRecord {
        round,
        kind,
        epoch: phase.epoch,
        epoch_start: outcome.epoch_start,
        proposals: outcome.proposals,
        committed: outcome.committed,
        power: channel_power.clone(),
        channel_power,
        power_updated: false,
        tax,
        tax_step: 0.0,
        aggregate_interference: 0.0,
        next_tax: tax,
        channels: state.assignment.channels().to_vec(),
    }
}

struct Init<'w> {
    state: NetworkState<'w>,
    phase: ChannelPhase,
    trace: ScheduleTrace,
}

fn initialize<'w>(world: &'w World, seed: u64, use_mtm: bool, limits: &Limits) -> Result<Init<'w>> {
    world.validate()?;
    limits.validate()?;
    let n = world.node_count();
    let unassigned = NetworkState::unassigned(world);
    let start = ChannelAssignment::uniform(n, unassigned, world.radio.max_level());
    let mut state = NetworkState::new(world, start);
    let mut phase = ChannelPhase::new(world, seed);
    let mut baseline_rng = rng::stream(seed, rng::BASELINE_CHANNEL);

    let round0 = &phase.priorities.round0;
    let mut order: Vec<NodeId> = world.topology.node_ids().collect();
    order.sort_by(|a, b| {
        round0[b.index()]
            .partial_cmp(&round0[a.index()])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(b))
    });
    for &j in &order {
        let cell = world.topology.cell_of(j);
        let inherited = state
            .links
            .neighbors(j)
            .filter(|&k| world.topology.cell_of(k) != cell && state.channel(k) != unassigned)
            .fold(None::<NodeId>, |best, k| match best {
                Some(b) if round0[b.index()] >= round0[k.index()] => Some(b),
                _ => Some(k),
            });
        let channel = if let Some(k) = inherited {
            state.channel(k)
        } else if use_mtm {
            let level = state.assignment.power(j);
            let mut best = (ChannelId(0), f64::INFINITY);
            for c in world.radio.channels() {
                let v = state.mtm_after(j, c, level);
                if v < best.1 {
                    best = (c, v);
                }
            }
            best.0
        } else {
            ChannelId(baseline_rng.gen_range(0..world.radio.channel_count) as u16)
        };
        state.set_channel(j, channel);
    }

    let powers = state.assignment.powers().to_vec();
    let mut trace = ScheduleTrace::default();
    trace.rounds.push(RoundRecord {
        round: 0,
        kind: RoundKind::Init,
        epoch: 0,
        epoch_start: true,
        proposals: Vec::new(),
        committed: Vec::new(),
        channel_power: powers.clone(),
        power_updated: false,
        tax: 0.0,
        tax_step: 0.0,
        aggregate_interference: 0.0,
        next_tax: 0.0,
        power: powers,
        channels: state.assignment.channels().to_vec(),
    });

    if use_mtm {
        let mut round = 0;
        while overloaded(&state) {
            round += 1;
            if round > limits.max_rounds {
                return Err(Error::Divergence {
                    rounds: limits.max_rounds,
                    trace: Box::new(trace),
                });
            }
            let outcome = phase.round(&mut state);
            let settled = outcome.epoch_start && outcome.proposals.is_empty();
            let powers = state.assignment.powers().to_vec();
            trace
                .rounds
                .push(record(round, RoundKind::Channel, &phase, outcome, &state, powers, 0.0));
            if settled {
                break;
            }
        }
    }
    Ok(Init {
        state,
        phase,
        trace,
    })
}

/// Init(): round-0 priorities, neighbor-cluster inheritance, initial channel
/// choice and negotiation while any channel is overloaded.
pub fn init_assignment(
    world: &World,
    seed: u64,
    use_mtm: bool,
    limits: &Limits,
) -> Result<(ChannelAssignment, ScheduleTrace)> {
    let init = initialize(world, seed, use_mtm, limits)?;
    Ok((init.state.assignment, init.trace))
}

/// Full schedule: init, then channel negotiation and power/tax rounds until a
/// termination rule fires or `limits.max_rounds` is exhausted.
///
/// With `use_mtm == false` no MTM value is ever computed: channels stay as
/// initialized and only the power game runs.
pub fn run_schedule(
    world: &World,
    seed: u64,
    use_mtm: bool,
    limits: &Limits,
) -> Result<(ChannelAssignment, ScheduleTrace)> {
    let Init {
        mut state,
        mut phase,
        mut trace,
    } = initialize(world, seed, use_mtm, limits)?;
    let game = PowerGame::new(world);
    let radio = &world.radio;
    let n = world.node_count();

    // the init rounds' view of the channels is stale once power rounds begin
    phase.force_new_epoch();
    let mut tax = 0.0;
    let mut power_round = 0usize;
    let mut frozen = false;
    let mut round = trace.round_count();

    loop {
        round += 1;
        if round > limits.max_rounds {
            return Err(Error::Divergence {
                rounds: limits.max_rounds,
                trace: Box::new(trace),
            });
        }
        let channel_power = state.assignment.powers().to_vec();
        let outcome = if use_mtm {
            phase.round(&mut state)
        } else {
            ChannelOutcome {
                epoch_start: true,
                proposals: Vec::new(),
                committed: Vec::new(),
            }
        };
        let settled = outcome.epoch_start && outcome.proposals.is_empty();
        let mut rec = record(round, RoundKind::Full, &phase, outcome, &state, channel_power, tax);

        let mut tax_settled = true;
        if !frozen {
            let responses: Vec<PowerLevel> = (0..n)
                .map(|i| game.best_response(NodeId::from(i), tax))
                .collect();
            let aggregate = game.aggregate_interference(&responses);
            let mut step = limits.tax_step * libm::pow(limits.tax_decay, power_round as f64);
            if step < limits.tax_tolerance {
                // a vanishing step would keep nudging the tax across a best-response threshold
                step = 0.0;
            }
            let next = update_tax(tax, aggregate, limits.tax_cap, step);
            power_round += 1;
            if state.set_powers(&responses) {
                phase.force_new_epoch();
            }
            rec.power_updated = true;
            rec.tax_step = step;
            rec.aggregate_interference = aggregate;
            rec.next_tax = next;
            rec.power = responses;
            tax_settled = (next - tax).abs() <= limits.tax_tolerance;
            tax = next;
        }
        trace.rounds.push(rec);

        if !frozen && tax_settled && powers_stable(&trace, limits, radio) {
            frozen = true;
        }
        if settled && frozen {
            let all_max = state
                .assignment
                .powers()
                .iter()
                .all(|&p| p == radio.max_level());
            trace.termination = Some(if all_max {
                Termination::MaxPower
            } else {
                Termination::FixedPoint
            });
            return Ok((state.assignment, trace));
        }
    }
}

fn powers_stable(trace: &ScheduleTrace, limits: &Limits, radio: &crate::radio::RadioParams) -> bool {
    let k = limits.stable_rounds;
    if trace.rounds.len() < k {
        return false;
    }
    let window = &trace.rounds[trace.rounds.len() - k..];
    let last = &window[k - 1].power;
    window.iter().all(|r| {
        r.power
            .iter()
            .zip(last)
            .all(|(a, b)| (radio.watts(*a) - radio.watts(*b)).abs() <= limits.power_tolerance)
    })
}

/// Committed pairs of one round whose nodes share an interference area.
pub fn exclusiveness_violations(record: &RoundRecord, world: &World) -> Vec<(NodeId, NodeId)> {
    let radio = &world.radio;
    let radius = |p: &Proposal| {
        radio.interference_range(p.new_power.max(record.channel_power[p.node.index()]))
    };
    let mut bad = Vec::new();
    for (k, a) in record.committed.iter().enumerate() {
        for b in &record.committed[k + 1..] {
            let d = world.topology.distance(a.node, b.node);
            if d <= radius(a) || d <= radius(b) {
                bad.push((a.node, b.node));
            }
        }
    }
    bad
}

/// Per-node MTM under `assignment`, in node order.
pub fn node_mtms(assignment: &ChannelAssignment, world: &World) -> Result<Vec<f64>> {
    check_assignment(assignment, world)?;
    let state = NetworkState::new(world, assignment.clone());
    Ok(world.topology.node_ids().map(|i| state.mtm_now(i)).collect())
}

/// Channel usage histogram, for reporting.
pub fn channel_histogram(assignment: &ChannelAssignment) -> BTreeMap<ChannelId, usize> {
    let mut h = BTreeMap::new();
    for &c in assignment.channels() {
        *h.entry(c).or_insert(0) += 1;
    }
    h
}
