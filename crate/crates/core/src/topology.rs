//! Cross and seven-cell terrain scenarios.
//!
//! Cells follow the hexagonal flower layout: cell 1 sits at the terrain
//! center and cells 2..=7 ring it at distance `2 r cos 30°`. Nodes associate
//! with the nearest base station (hard handoff), ties going to the lowest
//! cell id.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::rng;

/// Identifier of a mobile host.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(i as u32)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u{}", self.0)
    }
}

/// Cell identifier. The reference layout numbers cells 1..=7.
pub type CellId = u32;

#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub id: CellId,
    pub center: Point,
    pub radius: f64,
}

impl Cell {
    pub fn contains(&self, p: Point) -> bool {
        self.center.distance(p) <= self.radius
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    /// Hosts every `spacing` meters along two perpendicular arms through cell 1.
    Cross,
    /// Hosts drawn uniformly over the union of the cell discs.
    Terrain,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TerrainConfig {
    /// Side of the square terrain, meters.
    pub side_length: f64,
    pub cell_radius: f64,
    /// Number of hosts in the terrain scenario (ignored by the cross scenario).
    pub node_count: usize,
    /// Lattice spacing D of the cross scenario, meters.
    pub spacing: f64,
    /// Arm length of the cross; defaults to half the side length.
    pub arm_length: Option<f64>,
    pub seed: u64,
}

impl TerrainConfig {
    /// 10 km square, radius 1.5 km cells, 200 hosts.
    pub fn desk() -> Self {
        Self {
            side_length: 10_000.0,
            cell_radius: 1_500.0,
            node_count: 200,
            spacing: 500.0,
            arm_length: None,
            seed: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.side_length > 0.0) || !self.side_length.is_finite() {
            return Err(Error::Config(format!(
                "side_length must be positive, got {}",
                self.side_length
            )));
        }
        if !(self.cell_radius > 0.0) || !self.cell_radius.is_finite() {
            return Err(Error::Config(format!(
                "cell_radius must be positive, got {}",
                self.cell_radius
            )));
        }
        Ok(())
    }

    fn center(&self) -> Point {
        let half = self.side_length / 2.0;
        Point::new(half, half)
    }
}

/// The seven-cell hexagonal flower centered on `center`.
pub fn seven_cell_layout(center: Point, radius: f64) -> Vec<Cell> {
    let ring = 2.0 * radius * libm::cos(PI / 6.0);
    let mut cells = Vec::with_capacity(7);
    cells.push(Cell {
        id: 1,
        center,
        radius,
    });
    for k in 0..6 {
        let angle = k as f64 * PI / 3.0;
        cells.push(Cell {
            id: k as CellId + 2,
            center: center.offset(ring * libm::cos(angle), ring * libm::sin(angle)),
            radius,
        });
    }
    cells
}

/// The spatial world: cells, their base stations and the hosts.
#[derive(Clone, Debug, PartialEq)]
pub struct Topology {
    config: TerrainConfig,
    scenario: Scenario,
    cells: Vec<Cell>,
    nodes: Vec<Point>,
    association: Vec<CellId>,
}

impl Topology {
    /// Assemble a topology from explicit parts and compute associations.
    pub fn from_parts(
        config: TerrainConfig,
        scenario: Scenario,
        mut cells: Vec<Cell>,
        nodes: Vec<Point>,
    ) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::Config("topology needs at least one cell".into()));
        }
        cells.sort_by_key(|c| c.id);
        if cells.windows(2).any(|w| w[0].id == w[1].id) {
            return Err(Error::Config("cell ids must be unique".into()));
        }
        if let Some(c) = cells.iter().find(|c| !(c.radius > 0.0)) {
            return Err(Error::Config(format!("cell {} has non-positive radius", c.id)));
        }
        let association = nodes.iter().map(|&p| nearest_cell(&cells, p)).collect();
        Ok(Self {
            config,
            scenario,
            cells,
            nodes,
            association,
        })
    }

    pub fn config(&self) -> &TerrainConfig {
        &self.config
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    /// Cells in ascending id order.
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn base_stations(&self) -> impl Iterator<Item = Point> + '_ {
        self.cells.iter().map(|c| c.center)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len()).map(NodeId::from)
    }

    pub fn positions(&self) -> &[Point] {
        &self.nodes
    }

    /// Position of `node`. Panics on an unknown id; see [`Topology::try_position`].
    pub fn position(&self, node: NodeId) -> Point {
        self.nodes[node.index()]
    }

    pub fn try_position(&self, node: NodeId) -> Result<Point> {
        self.nodes
            .get(node.index())
            .copied()
            .ok_or(Error::UnknownNode(node))
    }

    pub fn distance(&self, a: NodeId, b: NodeId) -> f64 {
        self.position(a).distance(self.position(b))
    }

    /// Cached association of every node, indexed by node.
    pub fn associations(&self) -> &[CellId] {
        &self.association
    }

    pub fn cell_of(&self, node: NodeId) -> CellId {
        self.association[node.index()]
    }

    /// Nodes associated with `cell`, ascending.
    pub fn members(&self, cell: CellId) -> impl Iterator<Item = NodeId> + '_ {
        self.association
            .iter()
            .enumerate()
            .filter(move |(_, &c)| c == cell)
            .map(|(i, _)| NodeId::from(i))
    }
}

fn nearest_cell(cells: &[Cell], p: Point) -> CellId {
    let mut best = cells[0].id;
    let mut best_d = f64::INFINITY;
    for c in cells {
        let d = c.center.distance_sq(p);
        if d < best_d {
            best_d = d;
            best = c.id;
        }
    }
    best
}

/// Hosts every D meters along the four arms of a cross through cell 1's base station.
pub fn build_cross_scenario(config: &TerrainConfig) -> Result<Topology> {
    config.validate()?;
    if !(config.spacing > 0.0) || !config.spacing.is_finite() {
        return Err(Error::Config(format!(
            "cross spacing must be positive, got {}",
            config.spacing
        )));
    }
    let half = config.side_length / 2.0;
    let arm = config.arm_length.unwrap_or(half);
    if !(arm >= 0.0) || arm > half {
        return Err(Error::Config(format!(
            "cross arm length {arm} does not fit a terrain of side {}",
            config.side_length
        )));
    }
    let per_arm = lattice_count(arm, config.spacing);
    let center = config.center();
    let mut nodes = Vec::with_capacity(4 * per_arm);
    for (dx, dy) in [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)] {
        for n in 1..=per_arm {
            let off = n as f64 * config.spacing;
            nodes.push(center.offset(dx * off, dy * off));
        }
    }
    let cells = seven_cell_layout(center, config.cell_radius);
    Topology::from_parts(config.clone(), Scenario::Cross, cells, nodes)
}

/// Number of lattice points n·D with 1 ≤ n and n·D ≤ arm.
fn lattice_count(arm: f64, spacing: f64) -> usize {
    let mut n = libm::floor(arm / spacing) as usize;
    while (n + 1) as f64 * spacing <= arm {
        n += 1;
    }
    while n > 0 && n as f64 * spacing > arm {
        n -= 1;
    }
    n
}

/// Hosts drawn uniformly over the union of the seven cell discs, clipped to the terrain.
pub fn build_terrain_scenario(config: &TerrainConfig) -> Result<Topology> {
    config.validate()?;
    if config.node_count == 0 {
        return Err(Error::Config("node_count must be at least 1".into()));
    }
    let cells = seven_cell_layout(config.center(), config.cell_radius);
    let nodes = sample_union(&cells, config)?;
    Topology::from_parts(config.clone(), Scenario::Terrain, cells, nodes)
}

fn sample_union(cells: &[Cell], config: &TerrainConfig) -> Result<Vec<Point>> {
    if cells.is_empty() {
        return Err(Error::Config("no cells to place hosts in".into()));
    }
    let side = config.side_length;
    let lo_x = cells.iter().map(|c| c.center.x - c.radius).fold(f64::INFINITY, f64::min).max(0.0);
    let hi_x = cells.iter().map(|c| c.center.x + c.radius).fold(f64::NEG_INFINITY, f64::max).min(side);
    let lo_y = cells.iter().map(|c| c.center.y - c.radius).fold(f64::INFINITY, f64::min).max(0.0);
    let hi_y = cells.iter().map(|c| c.center.y + c.radius).fold(f64::NEG_INFINITY, f64::max).min(side);

    let mut rng = rng::stream(config.seed, rng::TOPOLOGY);
    let mut nodes = Vec::with_capacity(config.node_count);
    while nodes.len() < config.node_count {
        let p = Point::new(
            lo_x + rng.gen::<f64>() * (hi_x - lo_x),
            lo_y + rng.gen::<f64>() * (hi_y - lo_y),
        );
        if cells.iter().any(|c| c.contains(p)) {
            nodes.push(p);
        }
    }
    Ok(nodes)
}

/// Hard-handoff association: the cell with the nearest base station, ties to the lowest id.
pub fn associate(node: NodeId, topology: &Topology) -> Result<CellId> {
    let p = topology.try_position(node)?;
    Ok(nearest_cell(&topology.cells, p))
}

/// Next mobility snapshot.
///
/// Terrain hosts are redrawn independently from `seed`; the cross lattice is
/// static. Associations are recomputed either way.
pub fn advance_mobility(topology: &Topology, seed: u64) -> Topology {
    match topology.scenario {
        Scenario::Cross => topology.clone(),
        Scenario::Terrain => {
            let mut config = topology.config.clone();
            config.seed = seed;
            let nodes = sample_union(&topology.cells, &config)
                .expect("existing topology has cells");
            let association = nodes.iter().map(|&p| nearest_cell(&topology.cells, p)).collect();
            Topology {
                config,
                scenario: Scenario::Terrain,
                cells: topology.cells.clone(),
                nodes,
                association,
            }
        }
    }
}
