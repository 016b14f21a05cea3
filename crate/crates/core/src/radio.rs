//! Disc propagation, links, interference views and connectivity.
//!
//! A directed link `u -> v` carries `u`'s transmissions, so it occupies the
//! channel `u` is assigned to. The link set is symmetric: `u -> v` exists iff
//! `v -> u` does, iff the distance is within both endpoints' ranges.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::assignment::{ChannelAssignment, ChannelId, PowerLevel};
use crate::error::{Error, Result};
use crate::geom::Grid;
use crate::topology::{NodeId, Topology};

/// Lower clamp of [`link_quality`].
pub const QUALITY_FLOOR: f64 = 0.05;

#[derive(Clone, Debug, PartialEq)]
pub struct RadioParams {
    pub channel_count: usize,
    /// Communication range at the highest power level, meters.
    pub comm_range: f64,
    /// Interference range = factor × communication range.
    pub interference_factor: f64,
    pub path_loss_exponent: f64,
    /// Discrete transmit powers in watts, strictly increasing.
    pub power_levels: Vec<f64>,
    /// Round-trip factor RT per channel.
    pub round_trip: Vec<f64>,
    /// Channel factor F per channel.
    pub channel_factor: Vec<f64>,
}

impl RadioParams {
    /// Eight channels, 800 m range, four power levels from 0.25 W to 1 W.
    pub fn desk() -> Self {
        Self::with_channels(8)
    }

    pub fn with_channels(channel_count: usize) -> Self {
        Self {
            channel_count,
            comm_range: 800.0,
            interference_factor: 2.0,
            path_loss_exponent: 2.0,
            power_levels: vec![0.25, 0.5, 0.75, 1.0],
            round_trip: vec![1.0; channel_count],
            channel_factor: vec![1.0; channel_count],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.channel_count == 0 || self.channel_count > u16::MAX as usize {
            return Err(Error::Config(format!(
                "channel count must be in 1..=65535, got {}",
                self.channel_count
            )));
        }
        if !(self.comm_range > 0.0) || !self.comm_range.is_finite() {
            return Err(Error::Config("communication range must be positive".into()));
        }
        if !(self.interference_factor >= 1.0) || !self.interference_factor.is_finite() {
            return Err(Error::Config("interference factor must be at least 1".into()));
        }
        if !(self.path_loss_exponent > 0.0) {
            return Err(Error::Config("path-loss exponent must be positive".into()));
        }
        if self.power_levels.is_empty() || self.power_levels.len() > u8::MAX as usize {
            return Err(Error::Config("need between 1 and 255 power levels".into()));
        }
        if !(self.power_levels[0] > 0.0) || self.power_levels.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config(
                "power levels must be positive and strictly increasing".into(),
            ));
        }
        for (name, table) in [("round_trip", &self.round_trip), ("channel_factor", &self.channel_factor)] {
            if table.len() != self.channel_count {
                return Err(Error::Config(format!(
                    "{name} table has {} entries for {} channels",
                    table.len(),
                    self.channel_count
                )));
            }
            if table.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                return Err(Error::Config(format!("{name} entries must be positive")));
            }
        }
        Ok(())
    }

    pub fn max_level(&self) -> PowerLevel {
        PowerLevel((self.power_levels.len() - 1) as u8)
    }

    pub fn max_power(&self) -> f64 {
        self.power_levels[self.power_levels.len() - 1]
    }

    pub fn levels(&self) -> impl Iterator<Item = PowerLevel> + Clone {
        (0..self.power_levels.len()).map(|k| PowerLevel(k as u8))
    }

    pub fn channels(&self) -> impl Iterator<Item = ChannelId> + Clone {
        (0..self.channel_count).map(|c| ChannelId(c as u16))
    }

    pub fn watts(&self, level: PowerLevel) -> f64 {
        self.power_levels[level.index()]
    }

    /// Communication range at a configured level.
    pub fn range(&self, level: PowerLevel) -> f64 {
        range_for(self.watts(level), self)
    }

    pub fn interference_range(&self, level: PowerLevel) -> f64 {
        self.interference_factor * self.range(level)
    }
}

fn range_for(power: f64, params: &RadioParams) -> f64 {
    let ratio = power / params.max_power();
    let scale = if params.path_loss_exponent == 2.0 {
        libm::sqrt(ratio)
    } else {
        libm::pow(ratio, 1.0 / params.path_loss_exponent)
    };
    params.comm_range * scale
}

/// Range reached by `power` watts: `R_max · (p / p_max)^(1/α)`.
pub fn communication_range(power: f64, params: &RadioParams) -> Result<f64> {
    if !params.power_levels.iter().any(|&p| p == power) {
        return Err(Error::Parameter(format!(
            "{power} W is not a configured power level"
        )));
    }
    Ok(range_for(power, params))
}

/// A directed link; `from` transmits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Link {
    pub from: NodeId,
    pub to: NodeId,
    /// Meters.
    pub length: f64,
}

impl Link {
    pub fn touches(&self, node: NodeId) -> bool {
        self.from == node || self.to == node
    }
}

/// Symmetric directed link set, sorted by `(from, to)` with per-node slices.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct LinkSet {
    links: Vec<Link>,
    offsets: Vec<usize>,
}

impl LinkSet {
    /// Builds from an arbitrary list of directed links over `node_count` nodes.
    /// Reverse directions are added; duplicates collapse.
    pub fn from_links(node_count: usize, links: impl IntoIterator<Item = Link>) -> Self {
        let mut all = Vec::new();
        for l in links {
            all.push(l);
            all.push(Link {
                from: l.to,
                to: l.from,
                length: l.length,
            });
        }
        all.sort_by(|a, b| (a.from, a.to).cmp(&(b.from, b.to)));
        all.dedup_by(|a, b| a.from == b.from && a.to == b.to);
        Self::from_sorted(node_count, all)
    }

    fn from_sorted(node_count: usize, links: Vec<Link>) -> Self {
        let mut offsets = vec![0usize; node_count + 1];
        for l in &links {
            offsets[l.from.index() + 1] += 1;
        }
        for i in 0..node_count {
            offsets[i + 1] += offsets[i];
        }
        Self { links, offsets }
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Link> {
        self.links.iter()
    }

    pub fn as_slice(&self) -> &[Link] {
        &self.links
    }

    /// Links transmitted by `node`, ascending by receiver.
    pub fn outgoing(&self, node: NodeId) -> &[Link] {
        let i = node.index();
        if i + 1 >= self.offsets.len() {
            return &[];
        }
        &self.links[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.outgoing(node).len()
    }

    pub fn neighbors(&self, node: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.outgoing(node).iter().map(|l| l.to)
    }

    pub fn index_of(&self, from: NodeId, to: NodeId) -> Option<usize> {
        let out = self.outgoing(from);
        out.binary_search_by(|l| l.to.cmp(&to))
            .ok()
            .map(|k| self.offsets[from.index()] + k)
    }

    pub fn contains(&self, from: NodeId, to: NodeId) -> bool {
        self.index_of(from, to).is_some()
    }

    pub fn get(&self, index: usize) -> &Link {
        &self.links[index]
    }
}

/// Disc-model links: `u -> v` iff `dist(u, v) ≤ min(range(p_u), range(p_v))`.
pub fn build_links(
    topology: &Topology,
    assignment: &ChannelAssignment,
    params: &RadioParams,
) -> LinkSet {
    let positions = topology.positions();
    let ranges: Vec<f64> = topology
        .node_ids()
        .map(|u| params.range(assignment.power(u)))
        .collect();
    let max_range = ranges.iter().copied().fold(0.0, f64::max);
    let grid = Grid::new(positions, max_range);
    let mut links = Vec::new();
    let mut near = Vec::new();
    for (u, &pu) in positions.iter().enumerate() {
        near.clear();
        grid.within(pu, ranges[u], &mut near);
        near.sort_unstable();
        for &v in &near {
            if v == u {
                continue;
            }
            let d = pu.distance(positions[v]);
            if d <= ranges[u].min(ranges[v]) {
                links.push(Link {
                    from: NodeId::from(u),
                    to: NodeId::from(v),
                    length: d,
                });
            }
        }
    }
    LinkSet::from_sorted(positions.len(), links)
}

/// Co-channel links inside one node's interference range, keyed by channel.
#[derive(Clone, Debug, PartialEq)]
pub struct InterferenceView {
    pub node: NodeId,
    /// Links sorted by `(from, to)` under each channel.
    pub per_channel: BTreeMap<ChannelId, Vec<Link>>,
}

impl InterferenceView {
    pub fn empty(node: NodeId) -> Self {
        Self {
            node,
            per_channel: BTreeMap::new(),
        }
    }

    pub fn links_on(&self, channel: ChannelId) -> &[Link] {
        self.per_channel.get(&channel).map_or(&[], Vec::as_slice)
    }

    pub fn is_empty(&self) -> bool {
        self.per_channel.values().all(Vec::is_empty)
    }
}

/// Links co-channel with node `i` that have an endpoint within `i`'s
/// interference range (boundary inclusive). Links incident to `i` are excluded.
pub fn interference_view(
    i: NodeId,
    topology: &Topology,
    links: &LinkSet,
    assignment: &ChannelAssignment,
    params: &RadioParams,
) -> Result<InterferenceView> {
    let here = topology.try_position(i)?;
    let channel = assignment.channel(i);
    let reach = params.interference_range(assignment.power(i));
    let listed = links
        .iter()
        .filter(|l| {
            !l.touches(i)
                && assignment.channel(l.from) == channel
                && (topology.position(l.from).distance(here) <= reach
                    || topology.position(l.to).distance(here) <= reach)
        })
        .copied()
        .collect();
    let mut view = InterferenceView::empty(i);
    view.per_channel.insert(channel, listed);
    Ok(view)
}

/// Q = 1 − length / R_max, clamped to `[QUALITY_FLOOR, 1]`.
pub fn link_quality(link: &Link, params: &RadioParams) -> f64 {
    (1.0 - link.length / params.comm_range).clamp(QUALITY_FLOOR, 1.0)
}

/// Number of links in the network transmitting on `channel`.
pub fn links_on_channel(channel: ChannelId, links: &LinkSet, assignment: &ChannelAssignment) -> usize {
    links
        .iter()
        .filter(|l| assignment.channel(l.from) == channel)
        .count()
}

/// CF = max(1, network co-channel links ÷ co-channel links in the view);
/// an empty view gives max(1, network co-channel links).
pub fn channel_reuse_factor(
    channel: ChannelId,
    links: &LinkSet,
    assignment: &ChannelAssignment,
    view: &InterferenceView,
) -> f64 {
    let total = links_on_channel(channel, links, assignment);
    reuse_ratio(total, view.links_on(channel).len())
}

pub(crate) fn reuse_ratio(total: usize, local: usize) -> f64 {
    if local == 0 {
        (total as f64).max(1.0)
    } else {
        (total as f64 / local as f64).max(1.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Connectivity {
    pub connected: bool,
    pub component_count: usize,
    /// Share of nodes in the largest component; 0 for an empty topology.
    pub giant_fraction: f64,
}

/// Boolean disc model: each node carries a disc of `radius`, overlapping discs connect.
pub fn poisson_boolean_connected(topology: &Topology, radius: f64) -> Result<Connectivity> {
    if !(radius >= 0.0) {
        return Err(Error::Parameter(format!("radius must be non-negative, got {radius}")));
    }
    let positions = topology.positions();
    let n = positions.len();
    if n == 0 {
        return Ok(Connectivity {
            connected: true,
            component_count: 0,
            giant_fraction: 0.0,
        });
    }
    let reach = 2.0 * radius;
    let grid = Grid::new(positions, reach);
    let mut sets = DisjointSet::new(n);
    let mut near = Vec::new();
    for (u, &p) in positions.iter().enumerate() {
        near.clear();
        grid.within(p, reach, &mut near);
        for &v in &near {
            if v > u {
                sets.union(u, v);
            }
        }
    }
    let mut sizes = BTreeMap::new();
    for u in 0..n {
        *sizes.entry(sets.find(u)).or_insert(0usize) += 1;
    }
    let largest = sizes.values().copied().max().unwrap_or(0);
    Ok(Connectivity {
        connected: sizes.len() == 1,
        component_count: sizes.len(),
        giant_fraction: largest as f64 / n as f64,
    })
}

/// Union-find with path halving and union by size.
#[derive(Clone, Debug)]
pub struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSet {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            core::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point;
    use crate::topology::{Cell, Scenario, TerrainConfig};

    fn line_topology(xs: &[f64]) -> Topology {
        let cells = vec![Cell {
            id: 1,
            center: Point::new(0.0, 0.0),
            radius: 1e6,
        }];
        let nodes = xs.iter().map(|&x| Point::new(x, 0.0)).collect();
        Topology::from_parts(TerrainConfig::desk(), Scenario::Terrain, cells, nodes).unwrap()
    }

    #[test]
    fn max_power_reaches_full_range() {
        let p = RadioParams::desk();
        assert_eq!(communication_range(1.0, &p).unwrap(), 800.0);
        assert_eq!(communication_range(0.25, &p).unwrap(), 400.0);
        assert!(matches!(communication_range(0.3, &p), Err(Error::Parameter(_))));
    }

    #[test]
    fn ranges_follow_closed_form_for_other_exponents() {
        let mut p = RadioParams::desk();
        p.path_loss_exponent = 3.5;
        p.power_levels = vec![0.1, 0.2, 0.4, 0.8, 1.6];
        let mut last = 0.0;
        for &w in &p.power_levels {
            let r = communication_range(w, &p).unwrap();
            let direct = 800.0 * (w / 1.6f64).powf(1.0 / 3.5);
            assert!((r - direct).abs() <= 1e-9 * direct);
            assert!(r > last);
            last = r;
        }
    }

    #[test]
    fn validation_rejects_bad_tables() {
        let mut p = RadioParams::desk();
        p.power_levels = vec![1.0, 0.5];
        assert!(p.validate().is_err());
        let mut p = RadioParams::desk();
        p.round_trip.pop();
        assert!(p.validate().is_err());
        let mut p = RadioParams::desk();
        p.channel_count = 0;
        p.round_trip.clear();
        p.channel_factor.clear();
        assert!(p.validate().is_err());
        assert!(RadioParams::desk().validate().is_ok());
    }

    #[test]
    fn coincident_nodes_link_and_far_nodes_do_not() {
        let topo = line_topology(&[0.0, 0.0, 5000.0]);
        let p = RadioParams::desk();
        let a = ChannelAssignment::uniform(3, ChannelId(0), p.max_level());
        let links = build_links(&topo, &a, &p);
        assert!(links.contains(NodeId(0), NodeId(1)));
        assert!(links.contains(NodeId(1), NodeId(0)));
        assert!(!links.contains(NodeId(0), NodeId(2)));
        assert_eq!(links.len(), 2);
    }

    #[test]
    fn link_needs_both_ranges() {
        let topo = line_topology(&[0.0, 600.0]);
        let p = RadioParams::desk();
        let mut a = ChannelAssignment::uniform(2, ChannelId(0), p.max_level());
        assert_eq!(build_links(&topo, &a, &p).len(), 2);
        a.set_power(NodeId(1), PowerLevel(0));
        assert!(build_links(&topo, &a, &p).is_empty());
    }

    #[test]
    fn isolated_node_sees_nothing() {
        let topo = line_topology(&[0.0, 10_000.0, 10_100.0]);
        let p = RadioParams::desk();
        let a = ChannelAssignment::uniform(3, ChannelId(0), p.max_level());
        let links = build_links(&topo, &a, &p);
        let view = interference_view(NodeId(0), &topo, &links, &a, &p).unwrap();
        assert!(view.is_empty());
    }

    #[test]
    fn view_boundary_is_inclusive() {
        // interference range at max power is 1600 m
        let topo = line_topology(&[0.0, 1600.0, 2000.0, 1600.000001, 2400.0]);
        let p = RadioParams::desk();
        let a = ChannelAssignment::uniform(5, ChannelId(0), p.max_level());
        let links = build_links(&topo, &a, &p);
        let view = interference_view(NodeId(0), &topo, &links, &a, &p).unwrap();
        let listed: Vec<(u32, u32)> = view
            .links_on(ChannelId(0))
            .iter()
            .map(|l| (l.from.0, l.to.0))
            .collect();
        assert!(listed.contains(&(1, 2)));
        assert!(listed.contains(&(2, 1)));
        // (3, 4): neither endpoint within 1600 m
        assert!(!listed.contains(&(3, 4)));
        assert!(listed.iter().all(|&(u, v)| u != 0 && v != 0));
    }

    #[test]
    fn quality_clamps_and_scales() {
        let p = RadioParams::desk();
        let l = |length| Link { from: NodeId(0), to: NodeId(1), length };
        assert_eq!(link_quality(&l(0.0), &p), 1.0);
        assert_eq!(link_quality(&l(800.0), &p), QUALITY_FLOOR);
        assert_eq!(link_quality(&l(400.0), &p), 0.5);
        assert_eq!(link_quality(&l(790.0), &p), QUALITY_FLOOR);
    }

    #[test]
    fn reuse_factor_cases() {
        assert_eq!(reuse_ratio(6, 2), 3.0);
        assert_eq!(reuse_ratio(4, 4), 1.0);
        assert_eq!(reuse_ratio(0, 0), 1.0);
        assert_eq!(reuse_ratio(5, 0), 5.0);

        let topo = line_topology(&[0.0, 100.0, 200.0]);
        let p = RadioParams::desk();
        let a = ChannelAssignment::uniform(3, ChannelId(0), p.max_level());
        let links = build_links(&topo, &a, &p);
        let view = interference_view(NodeId(0), &topo, &links, &a, &p).unwrap();
        // every co-channel link not touching node 0 is in view: (1,2), (2,1)
        assert_eq!(view.links_on(ChannelId(0)).len(), 2);
        assert_eq!(channel_reuse_factor(ChannelId(0), &links, &a, &view), 6.0 / 2.0);

        let empty = LinkSet::default();
        let view = InterferenceView::empty(NodeId(0));
        let none = ChannelAssignment::uniform(0, ChannelId(0), PowerLevel(0));
        assert_eq!(channel_reuse_factor(ChannelId(0), &empty, &none, &view), 1.0);
    }

    #[test]
    fn connectivity_extremes() {
        let topo = line_topology(&[0.0, 10.0, 30.0, 70.0]);
        let c = poisson_boolean_connected(&topo, 0.0).unwrap();
        assert_eq!(c.component_count, 4);
        assert!(!c.connected);
        let c = poisson_boolean_connected(&topo, 100.0).unwrap();
        assert!(c.connected);
        assert_eq!(c.giant_fraction, 1.0);
        let c = poisson_boolean_connected(&topo, 5.0).unwrap();
        assert_eq!(c.component_count, 3);
        assert_eq!(c.giant_fraction, 0.5);
        assert!(poisson_boolean_connected(&topo, -1.0).is_err());
    }

    #[test]
    fn disjoint_set_merges() {
        let mut s = DisjointSet::new(5);
        assert!(s.union(0, 1));
        assert!(s.union(3, 4));
        assert!(!s.union(1, 0));
        assert_eq!(s.find(0), s.find(1));
        assert_ne!(s.find(0), s.find(3));
    }
}
