//! Tax-priced power control.
//!
//! Each node plays a link player that picks, over the discrete levels, the
//! power maximizing
//!
//! ```text
//! u_i(p) = ln(1 + p · g_i) − tax · I_i(p)
//! ```
//!
//! with `g_i = 1 / (1 + d²)`, `d` the nearest-neighbor distance in units of
//! the max-power communication range (`g_i = 1` for a node alone in the
//! world), and `I_i(p)` the number of other nodes inside the interference
//! range at `p`. The tax follows a projected subgradient step on the mean
//! interferer count.

use alloc::vec::Vec;

use crate::assignment::PowerLevel;
use crate::geom::Grid;
use crate::topology::NodeId;
use crate::world::World;

/// Static per-node quantities of the power game.
#[derive(Clone, Debug)]
pub struct PowerGame {
    watts: Vec<f64>,
    gain: Vec<f64>,
    /// `interferers[i][k]`: other nodes within the interference range of level `k`.
    interferers: Vec<Vec<usize>>,
}

impl PowerGame {
    pub fn new(world: &World) -> Self {
        let radio = &world.radio;
        let positions = world.topology.positions();
        let ranges: Vec<f64> = radio.levels().map(|l| radio.interference_range(l)).collect();
        let max_reach = ranges.last().copied().unwrap_or(0.0);
        let grid = Grid::new(positions, max_reach);
        let mut gain = Vec::with_capacity(positions.len());
        let mut interferers = Vec::with_capacity(positions.len());
        let mut buf = Vec::new();
        for (i, &p) in positions.iter().enumerate() {
            buf.clear();
            grid.within(p, max_reach, &mut buf);
            let dists: Vec<f64> = buf
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| positions[j].distance(p))
                .collect();
            let mut nearest = dists.iter().copied().fold(f64::INFINITY, f64::min);
            if !nearest.is_finite() {
                nearest = positions
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, q)| q.distance(p))
                    .fold(f64::INFINITY, f64::min);
            }
            let g = if nearest.is_finite() {
                let d = nearest / radio.comm_range;
                1.0 / (1.0 + d * d)
            } else {
                1.0
            };
            gain.push(g);

            interferers.push(
                ranges
                    .iter()
                    .map(|&r| dists.iter().filter(|&&d| d <= r).count())
                    .collect(),
            );
        }
        Self {
            watts: radio.power_levels.clone(),
            gain,
            interferers,
        }
    }

    pub fn gain(&self, node: NodeId) -> f64 {
        self.gain[node.index()]
    }

    pub fn interferers(&self, node: NodeId, level: PowerLevel) -> usize {
        self.interferers[node.index()][level.index()]
    }

    pub fn utility(&self, node: NodeId, level: PowerLevel, tax: f64) -> f64 {
        let p = self.watts[level.index()];
        libm::log1p(p * self.gain(node)) - tax * self.interferers(node, level) as f64
    }

    /// Argmax of the utility over the levels; ties go to the lower power.
    pub fn best_response(&self, node: NodeId, tax: f64) -> PowerLevel {
        let mut best = PowerLevel(0);
        let mut best_u = self.utility(node, best, tax);
        for k in 1..self.watts.len() {
            let level = PowerLevel(k as u8);
            let u = self.utility(node, level, tax);
            if u > best_u {
                best = level;
                best_u = u;
            }
        }
        best
    }

    /// Mean interferer count per node under `powers`.
    pub fn aggregate_interference(&self, powers: &[PowerLevel]) -> f64 {
        if powers.is_empty() {
            return 0.0;
        }
        let sum: usize = powers
            .iter()
            .enumerate()
            .map(|(i, &p)| self.interferers[i][p.index()])
            .sum();
        sum as f64 / powers.len() as f64
    }
}

/// Best response of node `i` to `tax`.
pub fn power_best_response(i: NodeId, tax: f64, world: &World) -> PowerLevel {
    PowerGame::new(world).best_response(i, tax)
}

/// Projected subgradient price step: `max(0, tax + step · (interference − cap))`.
pub fn update_tax(tax: f64, aggregate_interference: f64, cap: f64, step: f64) -> f64 {
    (tax + step * (aggregate_interference - cap)).max(0.0)
}
