//! Cached per-instance network state for fast MTM-after evaluation.
//!
//! `mtm_after` visits the same links in the same order with the same
//! factors as [`crate::metric::mtm`], so both produce identical values.

use alloc::vec;
use alloc::vec::Vec;

use crate::assignment::{ChannelAssignment, ChannelId, PowerLevel};
use crate::geom::Grid;
use crate::metric::channel_sum;
use crate::radio::{build_links, link_quality, reuse_ratio, LinkSet};
use crate::topology::NodeId;
use crate::world::World;

pub(crate) struct NetworkState<'w> {
    pub(crate) world: &'w World,
    pub(crate) assignment: ChannelAssignment,
    pub(crate) links: LinkSet,
    /// Per node: links not touching it whose nearer endpoint lies within its
    /// max-power interference range, as (link index, nearer distance), ascending index.
    near: Vec<Vec<(u32, f64)>>,
    /// Per node: other nodes within max-power communication range, ascending id.
    reach: Vec<Vec<(u32, f64)>>,
    quality: Vec<f64>,
    /// Links per transmitting channel; the extra last slot holds unassigned nodes.
    links_on: Vec<usize>,
}

impl<'w> NetworkState<'w> {
    /// Sentinel channel for nodes not yet assigned during initialization.
    pub(crate) fn unassigned(world: &World) -> ChannelId {
        ChannelId(world.radio.channel_count as u16)
    }

    pub(crate) fn new(world: &'w World, assignment: ChannelAssignment) -> Self {
        let positions = world.topology.positions();
        let max_range = world.radio.comm_range;
        let grid = Grid::new(positions, max_range);
        let mut reach = Vec::with_capacity(positions.len());
        let mut buf = Vec::new();
        for (i, &p) in positions.iter().enumerate() {
            buf.clear();
            grid.within(p, max_range, &mut buf);
            buf.sort_unstable();
            reach.push(
                buf.iter()
                    .filter(|&&j| j != i)
                    .map(|&j| (j as u32, p.distance(positions[j])))
                    .collect(),
            );
        }
        let mut state = Self {
            world,
            assignment,
            links: LinkSet::default(),
            near: Vec::new(),
            reach,
            quality: Vec::new(),
            links_on: Vec::new(),
        };
        state.rebuild();
        state
    }

    fn rebuild(&mut self) {
        let world = self.world;
        let radio = &world.radio;
        self.links = build_links(&world.topology, &self.assignment, radio);
        self.quality = self.links.iter().map(|l| link_quality(l, radio)).collect();
        self.links_on = vec![0; radio.channel_count + 1];
        for l in self.links.iter() {
            self.links_on[self.assignment.channel(l.from).index()] += 1;
        }

        let positions = world.topology.positions();
        let int_range = radio.interference_range(radio.max_level());
        let grid = Grid::new(positions, int_range);
        let mut area = Vec::new();
        let mut idx = Vec::new();
        self.near = Vec::with_capacity(positions.len());
        for (i, &p) in positions.iter().enumerate() {
            let me = NodeId::from(i);
            area.clear();
            grid.within(p, int_range, &mut area);
            idx.clear();
            for &w in &area {
                let w = NodeId::from(w);
                for l in self.links.outgoing(w) {
                    if l.to != me && w != me {
                        idx.push(self.links.index_of(w, l.to).unwrap() as u32);
                        idx.push(self.links.index_of(l.to, w).unwrap() as u32);
                    }
                }
            }
            idx.sort_unstable();
            idx.dedup();
            let list = idx
                .iter()
                .filter_map(|&k| {
                    let l = self.links.get(k as usize);
                    let d = positions[l.from.index()]
                        .distance(p)
                        .min(positions[l.to.index()].distance(p));
                    (d <= int_range).then_some((k, d))
                })
                .collect();
            self.near.push(list);
        }
    }

    pub(crate) fn channel(&self, node: NodeId) -> ChannelId {
        self.assignment.channel(node)
    }

    pub(crate) fn set_channel(&mut self, node: NodeId, channel: ChannelId) {
        let old = self.assignment.channel(node);
        if old == channel {
            return;
        }
        let deg = self.links.degree(node);
        self.links_on[old.index()] -= deg;
        self.links_on[channel.index()] += deg;
        self.assignment.set_channel(node, channel);
    }

    /// Replaces the power vector, rebuilding links. Returns whether anything changed.
    pub(crate) fn set_powers(&mut self, powers: &[PowerLevel]) -> bool {
        let mut changed = false;
        for (i, &p) in powers.iter().enumerate() {
            let id = NodeId::from(i);
            if self.assignment.power(id) != p {
                self.assignment.set_power(id, p);
                changed = true;
            }
        }
        if changed {
            self.rebuild();
        }
        changed
    }

    pub(crate) fn mtm_now(&self, node: NodeId) -> f64 {
        self.mtm_after(node, self.channel(node), self.assignment.power(node))
    }

    /// MTM of `node` were it on `channel` at `level`, everything else fixed.
    pub(crate) fn mtm_after(&self, node: NodeId, channel: ChannelId, level: PowerLevel) -> f64 {
        let radio = &self.world.radio;
        let reach = radio.interference_range(level);
        let c = channel.index();
        let in_view = || {
            self.near[node.index()].iter().filter(move |&&(k, d)| {
                d <= reach && self.assignment.channel(self.links.get(k as usize).from) == channel
            })
        };
        let local = in_view().count();

        // links touching `node` on `channel` before and after the change
        let cur_deg = self.links.degree(node);
        let before = if self.channel(node) == channel { cur_deg } else { 0 }
            + self
                .links
                .neighbors(node)
                .filter(|&j| self.channel(j) == channel)
                .count();
        let my_range = radio.range(level);
        let mut new_deg = 0;
        let mut new_on_channel = 0;
        for &(j, d) in &self.reach[node.index()] {
            let j = NodeId(j);
            if d <= my_range.min(radio.range(self.assignment.power(j))) {
                new_deg += 1;
                if self.channel(j) == channel {
                    new_on_channel += 1;
                }
            }
        }
        let total = self.links_on[c] - before + new_deg + new_on_channel;
        let cf = reuse_ratio(total, local);
        channel_sum(
            self.world.rates[c],
            radio.round_trip[c],
            radio.channel_factor[c],
            cf,
            in_view().map(|&(k, _)| self.quality[k as usize]),
        )
    }

    /// Nodes inside `node`'s interference area at its current power, itself included.
    pub(crate) fn area(&self, node: NodeId, out: &mut Vec<NodeId>) {
        let radio = &self.world.radio;
        let r = radio.interference_range(self.assignment.power(node));
        let here = self.world.topology.position(node);
        out.clear();
        out.extend(
            self.world
                .topology
                .positions()
                .iter()
                .enumerate()
                .filter(|(_, p)| p.distance(here) <= r)
                .map(|(j, _)| NodeId::from(j)),
        );
    }
}
