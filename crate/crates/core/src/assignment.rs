use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::radio::RadioParams;
use crate::topology::NodeId;

/// Data channel index in `[0, L)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChannelId(pub u16);

impl ChannelId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

/// Index into [`RadioParams::power_levels`]; the highest index is max power.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PowerLevel(pub u8);

impl PowerLevel {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Per-node channel and transmit power: the protocol's mutable state.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelAssignment {
    channel: Vec<ChannelId>,
    power: Vec<PowerLevel>,
    /// Channel negotiation epoch the assignment was produced in.
    pub epoch: usize,
}

impl ChannelAssignment {
    /// Every node on `channel` at `power`.
    pub fn uniform(node_count: usize, channel: ChannelId, power: PowerLevel) -> Self {
        Self {
            channel: vec![channel; node_count],
            power: vec![power; node_count],
            epoch: 0,
        }
    }

    /// Panics when the vectors differ in length.
    pub fn from_parts(channel: Vec<ChannelId>, power: Vec<PowerLevel>) -> Self {
        assert_eq!(channel.len(), power.len(), "one channel and one power per node");
        Self {
            channel,
            power,
            epoch: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.channel.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channel.is_empty()
    }

    pub fn channel(&self, node: NodeId) -> ChannelId {
        self.channel[node.index()]
    }

    pub fn power(&self, node: NodeId) -> PowerLevel {
        self.power[node.index()]
    }

    pub fn power_watts(&self, node: NodeId, params: &RadioParams) -> f64 {
        params.power_levels[self.power(node).index()]
    }

    pub fn channels(&self) -> &[ChannelId] {
        &self.channel
    }

    pub fn powers(&self) -> &[PowerLevel] {
        &self.power
    }

    pub fn set_channel(&mut self, node: NodeId, channel: ChannelId) {
        self.channel[node.index()] = channel;
    }

    pub fn set_power(&mut self, node: NodeId, power: PowerLevel) {
        self.power[node.index()] = power;
    }

    /// True when every entry refers to a configured channel and power level.
    pub fn is_valid_for(&self, params: &RadioParams) -> bool {
        self.channel.iter().all(|c| c.index() < params.channel_count)
            && self.power.iter().all(|p| p.index() < params.power_levels.len())
    }
}
