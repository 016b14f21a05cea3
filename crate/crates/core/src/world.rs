use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::radio::RadioParams;
use crate::topology::{NodeId, Topology};

/// Routing and measurement parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct RoutingParams {
    /// Routes discovered per source/destination pair.
    pub routes_k: usize,
    /// Pairs sampled per hop distance and for the traffic requirement.
    pub pair_count: usize,
    /// Nominal capacity of one channel, Mb/s.
    pub channel_capacity: f64,
}

impl Default for RoutingParams {
    fn default() -> Self {
        Self {
            routes_k: 3,
            pair_count: 8,
            channel_capacity: 1000.0,
        }
    }
}

/// Everything static about one simulation instance.
#[derive(Clone, Debug, PartialEq)]
pub struct World {
    pub topology: Topology,
    pub radio: RadioParams,
    pub routing: RoutingParams,
    /// Node weights W(j) used for priorities, default 1.
    pub weights: Vec<f64>,
    /// Normalized rate r_i^c per channel, default 1.
    pub rates: Vec<f64>,
}

impl World {
    pub fn new(topology: Topology, radio: RadioParams) -> Result<Self> {
        let weights = vec![1.0; topology.node_count()];
        let rates = vec![1.0; radio.channel_count];
        let world = Self {
            topology,
            radio,
            routing: RoutingParams::default(),
            weights,
            rates,
        };
        world.validate()?;
        Ok(world)
    }

    pub fn validate(&self) -> Result<()> {
        self.radio.validate()?;
        if self.weights.len() != self.topology.node_count() {
            return Err(Error::Config(format!(
                "{} weights for {} nodes",
                self.weights.len(),
                self.topology.node_count()
            )));
        }
        if self.weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::Config("node weights must be positive".into()));
        }
        if self.rates.len() != self.radio.channel_count {
            return Err(Error::Config(format!(
                "{} rates for {} channels",
                self.rates.len(),
                self.radio.channel_count
            )));
        }
        if self.rates.iter().any(|r| !(*r > 0.0 && *r <= 1.0)) {
            return Err(Error::Config("rates must lie in (0, 1]".into()));
        }
        if self.routing.routes_k == 0 {
            return Err(Error::Config("routes_k must be at least 1".into()));
        }
        if !(self.routing.channel_capacity > 0.0) {
            return Err(Error::Config("channel capacity must be positive".into()));
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.topology.node_count()
    }

    pub fn weight(&self, node: NodeId) -> f64 {
        self.weights[node.index()]
    }
}
