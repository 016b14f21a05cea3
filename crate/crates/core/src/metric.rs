//! Machine check time metric.
//!
//! For node `i`:
//!
//! ```text
//! MTM_i = Σ_c Σ_l  r_i^c · RT^c · F^c · Q_l / CF^c
//! ```
//!
//! where `l` ranges over the co-channel links in `i`'s interference view on
//! channel `c`. Lower is better. Terms are accumulated in ascending channel
//! order, then ascending `(from, to)` link order, so results are bit-stable.

use alloc::collections::BTreeMap;
use alloc::format;

use crate::assignment::{ChannelAssignment, ChannelId};
use crate::error::{Error, Result};
use crate::radio::{self, interference_view, link_quality, InterferenceView, LinkSet, RadioParams};
use crate::topology::NodeId;
use crate::world::World;

#[derive(Clone, Debug, PartialEq)]
pub struct MtmReport {
    pub node: NodeId,
    pub per_channel: BTreeMap<ChannelId, f64>,
    pub total: f64,
    /// r_i^c used for every configured channel.
    pub rate_r: BTreeMap<ChannelId, f64>,
}

/// Sum of the MTM terms of one channel.
pub(crate) fn channel_sum(
    rate: f64,
    round_trip: f64,
    factor: f64,
    reuse: f64,
    qualities: impl IntoIterator<Item = f64>,
) -> f64 {
    qualities
        .into_iter()
        .fold(0.0, |acc, q| acc + rate * round_trip * factor * q / reuse)
}

fn checked_rate(rates: &[f64], channel: ChannelId) -> Result<f64> {
    let r = *rates
        .get(channel.index())
        .ok_or_else(|| Error::Parameter(format!("no rate configured for channel {channel}")))?;
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::Parameter(format!(
            "rate {r} for channel {channel} is outside (0, 1]"
        )));
    }
    Ok(r)
}

/// MTM of node `i` over its interference view.
pub fn mtm(
    i: NodeId,
    view: &InterferenceView,
    links: &LinkSet,
    assignment: &ChannelAssignment,
    params: &RadioParams,
    rates: &[f64],
) -> Result<MtmReport> {
    if view.node != i {
        return Err(Error::Parameter(format!(
            "interference view belongs to {}, not {i}",
            view.node
        )));
    }
    let mut rate_r = BTreeMap::new();
    for c in params.channels() {
        rate_r.insert(c, checked_rate(rates, c)?);
    }
    let mut per_channel = BTreeMap::new();
    let mut total = 0.0;
    for (&c, listed) in &view.per_channel {
        let rate = checked_rate(rates, c)?;
        let (rt, f) = channel_tables(params, c)?;
        let cf = radio::channel_reuse_factor(c, links, assignment, view);
        let value = channel_sum(rate, rt, f, cf, listed.iter().map(|l| link_quality(l, params)));
        per_channel.insert(c, value);
        total += value;
    }
    Ok(MtmReport {
        node: i,
        per_channel,
        total,
        rate_r,
    })
}

fn channel_tables(params: &RadioParams, c: ChannelId) -> Result<(f64, f64)> {
    match (params.round_trip.get(c.index()), params.channel_factor.get(c.index())) {
        (Some(&rt), Some(&f)) => Ok((rt, f)),
        _ => Err(Error::Parameter(format!("channel {c} has no RT/F entry"))),
    }
}

/// Network-wide MTM: the sum of every node's total. Evaluation only.
pub fn total_mtm(assignment: &ChannelAssignment, world: &World) -> Result<f64> {
    let links = radio::build_links(&world.topology, assignment, &world.radio);
    let mut sum = 0.0;
    for i in world.topology.node_ids() {
        let view = interference_view(i, &world.topology, &links, assignment, &world.radio)?;
        sum += mtm(i, &view, &links, assignment, &world.radio, &world.rates)?.total;
    }
    Ok(sum)
}
