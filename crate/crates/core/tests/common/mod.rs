#![allow(dead_code)]

pub mod oracle;

use mtm_core::geom::Point;
use mtm_core::topology::{Cell, CellId, Scenario, TerrainConfig, Topology};
use mtm_core::{ChannelAssignment, ChannelId, PowerLevel, RadioParams, World};
use rand::Rng;

pub fn topology(points: &[Point], cells: &[(CellId, Point)]) -> Topology {
    let cells = cells
        .iter()
        .map(|&(id, center)| Cell {
            id,
            center,
            radius: 1500.0,
        })
        .collect();
    Topology::from_parts(TerrainConfig::desk(), Scenario::Terrain, cells, points.to_vec()).unwrap()
}

pub fn world(points: &[Point], cells: &[(CellId, Point)], radio: RadioParams) -> World {
    World::new(topology(points, cells), radio).unwrap()
}

/// Hosts every `spacing` meters along the x axis, one cell.
pub fn line_world(n: usize, spacing: f64, channels: usize) -> World {
    let pts: Vec<Point> = (0..n).map(|k| Point::new(k as f64 * spacing, 0.0)).collect();
    world(&pts, &[(1, Point::new(0.0, 0.0))], RadioParams::with_channels(channels))
}

/// `cols × rows` lattice with the given spacing, one cell.
pub fn grid_world(cols: usize, rows: usize, spacing: f64, channels: usize) -> World {
    let pts: Vec<Point> = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| Point::new(c as f64 * spacing, r as f64 * spacing)))
        .collect();
    world(&pts, &[(1, Point::new(0.0, 0.0))], RadioParams::with_channels(channels))
}

pub struct Instance {
    pub world: World,
    pub assignment: ChannelAssignment,
}

/// Up to `max_nodes` hosts in a `side`-meter square, 1..=3 cells, random
/// channels, powers, rates and per-channel tables.
pub fn random_instance<R: Rng>(rng: &mut R, max_nodes: usize, max_channels: usize, side: f64) -> Instance {
    let n = rng.gen_range(1..=max_nodes);
    let channels = rng.gen_range(1..=max_channels);
    let pts: Vec<Point> = (0..n)
        .map(|_| Point::new(rng.gen::<f64>() * side, rng.gen::<f64>() * side))
        .collect();
    let cells: Vec<(CellId, Point)> = (0..rng.gen_range(1..=3))
        .map(|k| (k + 1, Point::new(rng.gen::<f64>() * side, rng.gen::<f64>() * side)))
        .collect();
    let mut radio = RadioParams::with_channels(channels);
    radio.round_trip = (0..channels).map(|_| rng.gen_range(0.5..2.0)).collect();
    radio.channel_factor = (0..channels).map(|_| rng.gen_range(0.5..2.0)).collect();
    let mut world = world(&pts, &cells, radio);
    world.rates = (0..channels).map(|_| 1.0 - rng.gen::<f64>()).collect();
    let levels = world.radio.power_levels.len();
    let assignment = ChannelAssignment::from_parts(
        (0..n).map(|_| ChannelId(rng.gen_range(0..channels) as u16)).collect(),
        (0..n).map(|_| PowerLevel(rng.gen_range(0..levels) as u8)).collect(),
    );
    Instance { world, assignment }
}

/// Same geometry with unit tables and rates, for scheduler runs.
pub fn random_world<R: Rng>(rng: &mut R, nodes: usize, channels: usize, side: f64) -> World {
    let pts: Vec<Point> = (0..nodes)
        .map(|_| Point::new(rng.gen::<f64>() * side, rng.gen::<f64>() * side))
        .collect();
    let cells: Vec<(CellId, Point)> = (0..rng.gen_range(1..=3))
        .map(|k| (k + 1, Point::new(rng.gen::<f64>() * side, rng.gen::<f64>() * side)))
        .collect();
    world(&pts, &cells, RadioParams::with_channels(channels))
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}
