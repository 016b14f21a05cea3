//! Location-aided multi-route discovery, fractional flow splitting and the
//! maximal permitted hop count.
//!
//! Route discovery is a deterministic k-shortest-hop search: partial routes
//! are expanded in `(hop count, node sequence)` order, each node is settled at
//! most `k` times, and from a node `u` reached via `p` only neighbors strictly
//! closer to the destination than `p` are explored. When that rule leaves no
//! route, the search is repeated without it.

use alloc::collections::BinaryHeap;
use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use rand::seq::index;

use crate::assignment::ChannelAssignment;
use crate::error::{Error, Result};
use crate::radio::{build_links, LinkSet};
use crate::rng;
use crate::topology::NodeId;
use crate::world::World;

/// Slack used when comparing delivered throughput with a load.
pub const THROUGHPUT_SLACK: f64 = 1e-9;

/// A loop-free path; `hops[0]` is the source.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Route {
    pub hops: Vec<NodeId>,
}

impl Route {
    pub fn length_hops(&self) -> usize {
        self.hops.len().saturating_sub(1)
    }

    pub fn source(&self) -> NodeId {
        self.hops[0]
    }

    pub fn destination(&self) -> NodeId {
        self.hops[self.hops.len() - 1]
    }

    /// Consecutive `(from, to)` pairs.
    pub fn links(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.hops.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn is_simple(&self) -> bool {
        let mut seen = self.hops.clone();
        seen.sort_unstable();
        seen.windows(2).all(|w| w[0] != w[1])
    }
}

/// Demand split over routes; only positive allocations are listed.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowSplit {
    pub demand: f64,
    pub allocation: Vec<(Route, f64)>,
    /// Demand left unallocated once every route is saturated.
    pub shortfall: f64,
}

impl FlowSplit {
    pub fn allocated(&self) -> f64 {
        self.allocation.iter().map(|(_, a)| a).sum()
    }

    /// Σ allocation × hop count.
    pub fn hop_weighted(&self) -> f64 {
        self.allocation
            .iter()
            .map(|(r, a)| a * r.length_hops() as f64)
            .sum()
    }
}

/// Links of the scheduled network with their contention-degraded capacity.
///
/// `u -> v` on channel `ch(u)` has capacity `nominal / (1 + contenders)`,
/// where a contender is a node `w ∉ {u, v}` transmitting on `ch(u)` whose
/// interference range covers `u` or `v`.
#[derive(Clone, Debug)]
pub struct LinkCapacities {
    links: LinkSet,
    capacity: Vec<f64>,
}

impl LinkCapacities {
    pub fn new(world: &World, assignment: &ChannelAssignment) -> Self {
        let links = build_links(&world.topology, assignment, &world.radio);
        let topo = &world.topology;
        let radio = &world.radio;
        let reach: Vec<f64> = topo
            .node_ids()
            .map(|w| radio.interference_range(assignment.power(w)))
            .collect();
        let mut by_channel: Vec<Vec<NodeId>> = vec![Vec::new(); radio.channel_count];
        for w in topo.node_ids() {
            if let Some(list) = by_channel.get_mut(assignment.channel(w).index()) {
                list.push(w);
            }
        }
        let capacity = links
            .iter()
            .map(|l| {
                let channel = assignment.channel(l.from).index();
                let (pu, pv) = (topo.position(l.from), topo.position(l.to));
                let contenders = by_channel.get(channel).map_or(0, |ws| {
                    ws.iter()
                        .filter(|&&w| {
                            let pw = topo.position(w);
                            let r = reach[w.index()];
                            w != l.from && w != l.to && (pw.distance(pu) <= r || pw.distance(pv) <= r)
                        })
                        .count()
                });
                world.routing.channel_capacity / (1 + contenders) as f64
            })
            .collect();
        Self { links, capacity }
    }

    /// Capacities given directly, one per link in `links` order.
    pub fn from_parts(links: LinkSet, capacity: Vec<f64>) -> Result<Self> {
        if capacity.len() != links.len() || capacity.iter().any(|c| !(*c >= 0.0)) {
            return Err(Error::Parameter(
                "need one non-negative capacity per link".into(),
            ));
        }
        Ok(Self { links, capacity })
    }

    pub fn links(&self) -> &LinkSet {
        &self.links
    }

    pub fn capacity(&self, from: NodeId, to: NodeId) -> Option<f64> {
        self.links.index_of(from, to).map(|k| self.capacity[k])
    }

    /// Smallest link capacity along `route`; `None` if some hop is not a link.
    pub fn bottleneck(&self, route: &Route) -> Option<f64> {
        route
            .links()
            .map(|(u, v)| self.capacity(u, v))
            .try_fold(f64::INFINITY, |m, c| c.map(|c| m.min(c)))
    }
}

#[derive(PartialEq, Eq)]
struct Partial(Vec<NodeId>);

impl Ord for Partial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Partial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Up to `k` loop-free routes from `src` to `dst` over `links`, shortest-hop first.
pub fn discover_routes(
    src: NodeId,
    dst: NodeId,
    world: &World,
    links: &LinkSet,
    k: usize,
) -> Result<Vec<Route>> {
    let topo = &world.topology;
    topo.try_position(src)?;
    topo.try_position(dst)?;
    if src == dst {
        return Err(Error::Parameter(format!("source and destination are both {src}")));
    }
    if k == 0 {
        return Err(Error::Parameter("need at least one route".into()));
    }
    let routes = k_shortest(src, dst, world, links, k, true);
    if routes.is_empty() {
        // the location rule can strand a connected pair; flood instead
        return Ok(k_shortest(src, dst, world, links, k, false));
    }
    Ok(routes)
}

fn k_shortest(
    src: NodeId,
    dst: NodeId,
    world: &World,
    links: &LinkSet,
    k: usize,
    prune: bool,
) -> Vec<Route> {
    let topo = &world.topology;
    let target = topo.position(dst);
    let to_dst = |n: NodeId| topo.position(n).distance(target);
    let mut settled = vec![0usize; topo.node_count()];
    let mut routes = Vec::new();
    let mut heap = BinaryHeap::new();
    heap.push(Reverse(Partial(vec![src])));
    while let Some(Reverse(Partial(path))) = heap.pop() {
        let u = path[path.len() - 1];
        if settled[u.index()] == k {
            continue;
        }
        settled[u.index()] += 1;
        if u == dst {
            routes.push(Route { hops: path });
            if routes.len() == k {
                break;
            }
            continue;
        }
        let bound = path
            .len()
            .checked_sub(2)
            .filter(|_| prune)
            .map(|p| to_dst(path[p]));
        for v in links.neighbors(u) {
            if path.contains(&v) || settled[v.index()] == k {
                continue;
            }
            if bound.is_some_and(|b| to_dst(v) >= b) {
                continue;
            }
            let mut next = path.clone();
            next.push(v);
            heap.push(Reverse(Partial(next)));
        }
    }
    routes
}

/// Sequential water-fill of `demand` over `routes` in order; each route takes
/// the smaller of the remaining demand and its bottleneck residual capacity.
pub fn split_flow(demand: f64, routes: &[Route], capacities: &LinkCapacities) -> Result<FlowSplit> {
    if !(demand >= 0.0) {
        return Err(Error::Parameter(format!("demand {demand} is negative")));
    }
    if demand > 0.0 && routes.is_empty() {
        return Err(Error::Unroutable { demand });
    }
    let mut residual = capacities.capacity.clone();
    let mut remaining = demand;
    let mut allocation = Vec::new();
    for route in routes {
        if remaining <= 0.0 {
            break;
        }
        let mut ids = Vec::with_capacity(route.length_hops());
        for (u, v) in route.links() {
            let id = capacities.links.index_of(u, v).ok_or_else(|| {
                Error::Parameter(format!("{u} -> {v} is not a link"))
            })?;
            ids.push(id);
        }
        let room = ids.iter().map(|&k| residual[k]).fold(f64::INFINITY, f64::min);
        let amount = remaining.min(room);
        if amount > 0.0 {
            for &k in &ids {
                residual[k] -= amount;
            }
            remaining -= amount;
            allocation.push((route.clone(), amount));
        }
    }
    Ok(FlowSplit {
        demand,
        allocation,
        shortfall: remaining.max(0.0),
    })
}

/// Breadth-first hop distances from `src`; `None` for unreachable nodes.
pub fn hop_distances(src: NodeId, links: &LinkSet) -> Vec<Option<usize>> {
    let mut dist = vec![None; links.node_count()];
    dist[src.index()] = Some(0);
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        let d = dist[u.index()].unwrap_or(0);
        for v in links.neighbors(u) {
            if dist[v.index()].is_none() {
                dist[v.index()] = Some(d + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Routes, capacities and pair samples of one scheduled network.
///
/// Pairs are drawn from `pair_seed` only, so they do not depend on the load.
pub struct RoutingContext<'w> {
    world: &'w World,
    capacities: LinkCapacities,
    /// Sampled ordered pairs per hop distance (index = h).
    hop_pairs: Vec<Vec<(NodeId, NodeId)>>,
    traffic_pairs: Vec<(NodeId, NodeId, Vec<Route>)>,
    /// Most throughput each hop-pair sample can carry, parallel to `hop_pairs`.
    deliverable: Vec<Vec<f64>>,
}

impl<'w> RoutingContext<'w> {
    pub fn new(world: &'w World, assignment: &ChannelAssignment, pair_seed: u64) -> Result<Self> {
        Self::with_capacities(world, LinkCapacities::new(world, assignment), pair_seed)
    }

    /// Context over an explicit link set, e.g. one not induced by geometry.
    pub fn with_capacities(world: &'w World, capacities: LinkCapacities, pair_seed: u64) -> Result<Self> {
        if capacities.links.node_count() != world.node_count() {
            return Err(Error::Parameter("link set and world disagree on node count".into()));
        }
        let k = world.routing.routes_k;
        let count = world.routing.pair_count;
        let mut by_hops: Vec<Vec<(NodeId, NodeId)>> = Vec::new();
        for s in world.topology.node_ids() {
            for (d, h) in hop_distances(s, &capacities.links).into_iter().enumerate() {
                if let Some(h) = h.filter(|&h| h > 0) {
                    if by_hops.len() <= h {
                        by_hops.resize(h + 1, Vec::new());
                    }
                    by_hops[h].push((s, NodeId::from(d)));
                }
            }
        }

        let connected: Vec<(NodeId, NodeId)> = by_hops.iter().flatten().copied().collect();
        let mut traffic_rng = rng::stream(pair_seed, rng::TRAFFIC_PAIRS);
        let mut traffic = sample(&connected, count, &mut traffic_rng);
        traffic.sort_unstable();
        let mut traffic_pairs = Vec::with_capacity(traffic.len());
        for (s, d) in traffic {
            let routes = discover_routes(s, d, world, &capacities.links, k)?;
            traffic_pairs.push((s, d, routes));
        }

        let mut hop_pairs = Vec::with_capacity(by_hops.len());
        let mut deliverable = Vec::with_capacity(by_hops.len());
        for (h, pairs) in by_hops.iter().enumerate() {
            let mut hop_rng = rng::stream(pair_seed, rng::HOP_PAIRS + h as u64);
            let mut chosen = sample(pairs, count, &mut hop_rng);
            chosen.sort_unstable();
            let mut carry = Vec::with_capacity(chosen.len());
            for &(s, d) in &chosen {
                let routes = discover_routes(s, d, world, &capacities.links, k)?;
                carry.push(max_throughput(&routes, &capacities)?);
            }
            hop_pairs.push(chosen);
            deliverable.push(carry);
        }
        Ok(Self {
            world,
            capacities,
            hop_pairs,
            traffic_pairs,
            deliverable,
        })
    }

    pub fn world(&self) -> &World {
        self.world
    }

    pub fn capacities(&self) -> &LinkCapacities {
        &self.capacities
    }

    /// Largest hop distance realized by any connected pair.
    pub fn diameter(&self) -> usize {
        self.hop_pairs.len().saturating_sub(1)
    }

    pub fn hop_pairs(&self, h: usize) -> &[(NodeId, NodeId)] {
        self.hop_pairs.get(h).map_or(&[], Vec::as_slice)
    }

    /// Most throughput each sampled pair at hop distance `h` can carry.
    pub fn deliverable(&self, h: usize) -> &[f64] {
        self.deliverable.get(h).map_or(&[], Vec::as_slice)
    }

    pub fn traffic_pairs(&self) -> impl Iterator<Item = (NodeId, NodeId, &[Route])> {
        self.traffic_pairs.iter().map(|(s, d, r)| (*s, *d, r.as_slice()))
    }

    /// Whether every sampled pair at hop distance `h` carries `load`.
    pub fn supports(&self, h: usize, load: f64) -> bool {
        let carry = self.deliverable(h);
        !carry.is_empty() && carry.iter().all(|&c| c >= load - THROUGHPUT_SLACK)
    }

    /// Largest `h ≥ 1` whose sampled pairs all carry `load`; 1 when none do or the load is 0.
    pub fn max_permitted_hops(&self, load: f64) -> usize {
        if load <= 0.0 {
            return 1;
        }
        (1..=self.diameter())
            .rev()
            .find(|&h| self.supports(h, load))
            .unwrap_or(1)
    }

    /// Σ allocation × hops over the sampled traffic pairs at `load` each,
    /// with the summed unallocated demand.
    pub fn traffic_requirement(&self, load: f64) -> Result<Requirement> {
        let mut out = Requirement::default();
        for (_, _, routes) in &self.traffic_pairs {
            if routes.is_empty() {
                // connected, but pruned away by the location rule
                out.shortfall += load;
                continue;
            }
            let split = split_flow(load, routes, &self.capacities)?;
            out.proxy += split.hop_weighted();
            out.shortfall += split.shortfall;
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Requirement {
    /// Capacity consumed: Σ allocation × hop count.
    pub proxy: f64,
    pub shortfall: f64,
}

/// Throughput the sequential fill reaches with unbounded demand.
pub fn max_throughput(routes: &[Route], capacities: &LinkCapacities) -> Result<f64> {
    if routes.is_empty() {
        return Ok(0.0);
    }
    Ok(split_flow(f64::INFINITY, routes, capacities)?.allocated())
}

fn sample<T: Copy, R: rand::Rng>(items: &[T], count: usize, rng: &mut R) -> Vec<T> {
    if items.len() <= count {
        return items.to_vec();
    }
    index::sample(rng, items.len(), count)
        .into_iter()
        .map(|k| items[k])
        .collect()
}

/// Maximal permitted hop count of the scheduled network at `load`.
pub fn max_permitted_hops(
    world: &World,
    assignment: &ChannelAssignment,
    load: f64,
    pair_seed: u64,
) -> Result<usize> {
    if load <= 0.0 {
        return Ok(1);
    }
    Ok(RoutingContext::new(world, assignment, pair_seed)?.max_permitted_hops(load))
}
