//! Reference computations written from the model definitions alone, using
//! only raw positions, channels, powers and parameter tables.

use std::collections::VecDeque;

use mtm_core::{ChannelAssignment, World};

fn dist(world: &World, a: usize, b: usize) -> f64 {
    let p = world.topology.positions();
    ((p[a].x - p[b].x).powi(2) + (p[a].y - p[b].y).powi(2)).sqrt()
}

fn range(world: &World, watts: f64) -> f64 {
    let r = &world.radio;
    r.comm_range * (watts / r.max_power()).powf(1.0 / r.path_loss_exponent)
}

fn node_range(world: &World, a: &ChannelAssignment, i: usize) -> f64 {
    range(world, world.radio.power_levels[a.powers()[i].0 as usize])
}

/// Every ordered pair within both endpoints' ranges.
pub fn links(world: &World, a: &ChannelAssignment) -> Vec<(usize, usize)> {
    let n = world.node_count();
    let mut out = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && dist(world, u, v) <= node_range(world, a, u).min(node_range(world, a, v)) {
                out.push((u, v));
            }
        }
    }
    out
}

/// MTM of node `i`, term by term.
pub fn mtm(world: &World, a: &ChannelAssignment, i: usize) -> f64 {
    let radio = &world.radio;
    let ch = |k: usize| a.channels()[k].0 as usize;
    let c = ch(i);
    let reach = radio.interference_factor * node_range(world, a, i);
    let all = links(world, a);
    let network = all.iter().filter(|&&(u, _)| ch(u) == c).count() as f64;
    let view: Vec<(usize, usize)> = all
        .iter()
        .copied()
        .filter(|&(u, v)| {
            u != i
                && v != i
                && ch(u) == c
                && (dist(world, u, i) <= reach || dist(world, v, i) <= reach)
        })
        .collect();
    let cf = if view.is_empty() {
        network.max(1.0)
    } else {
        (network / view.len() as f64).max(1.0)
    };
    let mut sum = 0.0;
    for (u, v) in view {
        let q = (1.0 - dist(world, u, v) / radio.comm_range).clamp(0.05, 1.0);
        sum += world.rates[c] * radio.round_trip[c] * radio.channel_factor[c] * q / cf;
    }
    sum
}

pub fn total_mtm(world: &World, a: &ChannelAssignment) -> f64 {
    (0..world.node_count()).map(|i| mtm(world, a, i)).sum()
}

/// Connected components of the disc graph with edges at distance ≤ 2r, by BFS.
pub fn components(world: &World, radius: f64) -> usize {
    let n = world.node_count();
    let mut seen = vec![false; n];
    let mut count = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        count += 1;
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if !seen[v] && dist(world, u, v) <= 2.0 * radius {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    count
}

/// Hop distances from `src` over an adjacency list, by BFS.
pub fn bfs_hops(adj: &[Vec<usize>], src: usize) -> Vec<Option<usize>> {
    let mut d = vec![None; adj.len()];
    d[src] = Some(0);
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if d[v].is_none() {
                d[v] = Some(d[u].unwrap() + 1);
                queue.push_back(v);
            }
        }
    }
    d
}

pub fn adjacency(world: &World, a: &ChannelAssignment) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); world.node_count()];
    for (u, v) in links(world, a) {
        adj[u].push(v);
    }
    adj
}
