//! Static +Grid ISL adjacency, time-varying link lengths, the per-route delay
//! model, and instantaneous shortest-route search.
//!
//! Every satellite keeps four permanent links: slot +/- 1 in its own plane and
//! the same slot in both adjacent planes, giving a Manhattan-style grid that
//! wraps in both directions. Ground stations attach to whichever satellites
//! are above their elevation mask at the queried instant.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::constants::SPEED_OF_LIGHT_KM_S;
use crate::orbital::{ground_position_km, visible_from, Constellation, GroundStation, SatelliteId};
use crate::{Error, Result};

/// A routing node: an in-orbit satellite or one of the two route endpoints.
#[derive(Clone, Debug, PartialEq)]
pub enum NodeId {
    Satellite(SatelliteId),
    Ground(GroundStation),
}

impl NodeId {
    pub fn satellite(&self) -> Option<SatelliteId> {
        match self {
            NodeId::Satellite(s) => Some(*s),
            NodeId::Ground(_) => None,
        }
    }
}

/// Inputs of the one-way delay model: transmission delay is
/// `packet_size / data_rate`, and a fixed queueing/processing delay is charged
/// per link on top of the propagation term.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DelayModel {
    pub data_rate_bps: f64,
    pub packet_size_bytes: f64,
    pub queueing_per_hop_s: f64,
}

impl DelayModel {
    pub fn new(data_rate_bps: f64, packet_size_bytes: f64, queueing_per_hop_s: f64) -> Result<Self> {
        if !(data_rate_bps > 0.0 && packet_size_bytes > 0.0 && queueing_per_hop_s > 0.0) {
            return Err(Error::InvalidParameter(
                "delay model fields must all be positive".into(),
            ));
        }
        Ok(Self {
            data_rate_bps,
            packet_size_bytes,
            queueing_per_hop_s,
        })
    }

    /// Transmission delay of one packet on one link [s].
    pub fn transmission_delay_s(&self) -> f64 {
        self.packet_size_bytes * 8.0 / self.data_rate_bps
    }

    /// Fixed per-link cost: transmission plus queueing/processing [s].
    pub(crate) fn per_link_fixed_s(&self) -> f64 {
        self.transmission_delay_s() + self.queueing_per_hop_s
    }
}

impl Default for DelayModel {
    /// 1 Gbit/s links, 1500-byte packets, 1 ms queueing per hop.
    fn default() -> Self {
        Self {
            data_rate_bps: 1e9,
            packet_size_bytes: 1500.0,
            queueing_per_hop_s: 1e-3,
        }
    }
}

/// An end-to-end path at an instant: ground station, one or more satellites,
/// ground station.
#[derive(Clone, Debug)]
pub struct Route {
    pub nodes: Vec<NodeId>,
    pub computed_at: f64,
}

impl Route {
    /// Number of in-orbit hops (satellite-to-satellite links).
    pub fn isl_hop_count(&self) -> usize {
        self.nodes.len().saturating_sub(3)
    }

    /// Total number of links, ground links included.
    pub fn link_count(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }

    /// First and last satellite of the route.
    pub fn access_satellites(&self) -> (SatelliteId, SatelliteId) {
        let first = self.nodes[1].satellite().expect("route interior");
        let last = self.nodes[self.nodes.len() - 2]
            .satellite()
            .expect("route interior");
        (first, last)
    }

    /// Node-sequence equality; `computed_at` is ignored.
    pub fn same_path(&self, other: &Route) -> bool {
        self.nodes == other.nodes
    }
}

/// The static +Grid topology over a built constellation.
pub struct IslGraph {
    constellation: Constellation,
    neighbours: Vec<[u32; 4]>,
}

impl IslGraph {
    pub fn build(params: crate::orbital::WalkerParameters) -> Result<Self> {
        Self::from_constellation(Constellation::build(params)?)
    }

    pub fn from_constellation(constellation: Constellation) -> Result<Self> {
        let p = constellation.params().planes;
        let q = constellation.params().sats_per_plane();
        if p < 3 || q < 3 {
            return Err(Error::InvalidParameter(format!(
                "+Grid needs at least 3 planes and 3 slots per plane, got {p}x{q}"
            )));
        }
        let mut neighbours = Vec::with_capacity(p * q);
        for plane in 0..p {
            for slot in 0..q {
                let mut n = [
                    (plane * q + (slot + 1) % q) as u32,
                    (plane * q + (slot + q - 1) % q) as u32,
                    (((plane + 1) % p) * q + slot) as u32,
                    (((plane + p - 1) % p) * q + slot) as u32,
                ];
                n.sort_unstable();
                neighbours.push(n);
            }
        }
        Ok(Self {
            constellation,
            neighbours,
        })
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn params(&self) -> &crate::orbital::WalkerParameters {
        self.constellation.params()
    }

    pub fn neighbours(&self, sat: SatelliteId) -> [SatelliteId; 4] {
        let q = self.params().sats_per_plane();
        self.neighbours[sat.flat(q)].map(|i| SatelliteId::from_flat(i as usize, q))
    }

    /// Number of undirected ISL edges (`2 * P * Q`).
    pub fn edge_count(&self) -> usize {
        self.neighbours.len() * 2
    }

    pub fn is_isl(&self, a: SatelliteId, b: SatelliteId) -> bool {
        let q = self.params().sats_per_plane();
        self.neighbours[a.flat(q)].contains(&(b.flat(q) as u32))
    }

    /// Minimum number of ISL hops between two satellites: torus Manhattan
    /// distance over planes and slots.
    pub fn grid_hop_distance(&self, a: SatelliteId, b: SatelliteId) -> usize {
        let p = self.params().planes;
        let q = self.params().sats_per_plane();
        let dp = a.plane.abs_diff(b.plane);
        let dq = a.slot.abs_diff(b.slot);
        dp.min(p - dp) + dq.min(q - dq)
    }

    /// Euclidean length of a link at time `t` [km].
    pub fn link_length_km(&self, a: &NodeId, b: &NodeId, t: f64) -> Result<f64> {
        let q = self.params().sats_per_plane();
        let visibility_threshold = self.constellation.visibility_dot_threshold();
        let pos = |n: &NodeId| -> [f64; 3] {
            match n {
                NodeId::Satellite(s) => self.constellation.position_flat_km(s.flat(q), t),
                NodeId::Ground(g) => ground_position_km(g, t),
            }
        };
        match (a, b) {
            (NodeId::Satellite(sa), NodeId::Satellite(sb)) => {
                if !self.is_isl(*sa, *sb) {
                    return Err(Error::Topology(format!(
                        "satellites {sa} and {sb} are not +Grid neighbours"
                    )));
                }
            }
            (NodeId::Ground(g), NodeId::Satellite(s)) | (NodeId::Satellite(s), NodeId::Ground(g)) => {
                let gp = ground_position_km(g, t);
                let sp = self.constellation.position_flat_km(s.flat(q), t);
                if !visible_from(&gp, &sp, visibility_threshold) {
                    return Err(Error::Visibility(format!(
                        "satellite {s} below the elevation mask of {} at t={t}",
                        g.name
                    )));
                }
            }
            (NodeId::Ground(_), NodeId::Ground(_)) => {
                return Err(Error::Topology(
                    "ground stations have no direct link".into(),
                ));
            }
        }
        Ok(euclid(&pos(a), &pos(b)))
    }

    /// One-way delay of a route at time `t`: per link, propagation at the
    /// speed of light plus the model's fixed per-link cost. Fails if a ground
    /// link is below the elevation mask or the route is not a +Grid path.
    pub fn one_way_delay_s(&self, route: &Route, model: &DelayModel, t: f64) -> Result<f64> {
        let mut total = 0.0;
        for pair in route.nodes.windows(2) {
            let length = self.link_length_km(&pair[0], &pair[1], t)?;
            total += length / SPEED_OF_LIGHT_KM_S + model.per_link_fixed_s();
        }
        Ok(total)
    }

    /// Route delay without validity checks; used where the schedule already
    /// guarantees visibility. Tests scale the propagation speed to exercise
    /// delay-model invariances.
    pub(crate) fn route_delay_with_speed(
        &self,
        route: &Route,
        model: &DelayModel,
        t: f64,
        speed_km_s: f64,
    ) -> f64 {
        let q = self.params().sats_per_plane();
        let fixed = model.per_link_fixed_s();
        let mut total = 0.0;
        let mut prev: Option<[f64; 3]> = None;
        for node in &route.nodes {
            let pos = match node {
                NodeId::Satellite(s) => self.constellation.position_flat_km(s.flat(q), t),
                NodeId::Ground(g) => ground_position_km(g, t),
            };
            if let Some(p) = prev {
                total += euclid(&p, &pos) / speed_km_s + fixed;
            }
            prev = Some(pos);
        }
        total
    }

    /// Minimum one-way-delay route between two ground stations at time `t`.
    pub fn shortest_route(
        &self,
        src: &GroundStation,
        dst: &GroundStation,
        model: &DelayModel,
        t: f64,
    ) -> Result<Route> {
        let mut router = Router::new(self);
        router.shortest_route(src, dst, model, t)
    }
}

#[inline]
fn euclid(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

#[derive(Copy, Clone, Debug)]
struct HeapEntry {
    cost: f64,
    node: u32,
}

// Min-heap on (cost, node): BinaryHeap is a max-heap, so the ordering is
// reversed. The node component makes tie-breaking deterministic.
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry {}

const NO_PREV: u32 = u32::MAX;

/// Shortest-route search state, reusable across many time points.
pub(crate) struct Router<'g> {
    graph: &'g IslGraph,
    positions: Vec<[f64; 3]>,
    positions_at: Option<f64>,
    dist: Vec<f64>,
    prev: Vec<u32>,
    settled: Vec<bool>,
    heap: BinaryHeap<HeapEntry>,
    src_visible: Vec<u32>,
    dst_visible: Vec<bool>,
}

impl<'g> Router<'g> {
    pub fn new(graph: &'g IslGraph) -> Self {
        let n = graph.neighbours.len();
        Self {
            graph,
            positions: Vec::with_capacity(n),
            positions_at: None,
            dist: vec![f64::INFINITY; n + 2],
            prev: vec![NO_PREV; n + 2],
            settled: vec![false; n + 2],
            heap: BinaryHeap::new(),
            src_visible: Vec::new(),
            dst_visible: vec![false; n],
        }
    }

    fn prepare_positions(&mut self, t: f64) {
        if self.positions_at != Some(t) {
            self.graph.constellation.positions_at(t, &mut self.positions);
            self.positions_at = Some(t);
        }
    }

    fn reset_search(&mut self) {
        self.dist.fill(f64::INFINITY);
        self.prev.fill(NO_PREV);
        self.settled.fill(false);
        self.heap.clear();
    }

    /// Point query: stops as soon as the destination settles.
    pub fn shortest_route(
        &mut self,
        src: &GroundStation,
        dst: &GroundStation,
        model: &DelayModel,
        t: f64,
    ) -> Result<Route> {
        self.search(src, dst, model, t, true)
    }

    /// Complete per-instant run: Dijkstra's algorithm over the whole graph,
    /// as the baseline selection algorithm executes it every time point.
    pub fn shortest_route_full(
        &mut self,
        src: &GroundStation,
        dst: &GroundStation,
        model: &DelayModel,
        t: f64,
    ) -> Result<Route> {
        self.search(src, dst, model, t, false)
    }

    /// Unconstrained end-to-end search. The graph at `t` consists of all ISLs
    /// plus one link per visible access satellite at each station.
    fn search(
        &mut self,
        src: &GroundStation,
        dst: &GroundStation,
        model: &DelayModel,
        t: f64,
        stop_at_destination: bool,
    ) -> Result<Route> {
        let n = self.graph.neighbours.len();
        let src_node = n as u32;
        let dst_node = n as u32 + 1;
        self.prepare_positions(t);
        let visibility_threshold = self.graph.constellation.visibility_dot_threshold();
        let src_pos = ground_position_km(src, t);
        let dst_pos = ground_position_km(dst, t);

        self.src_visible.clear();
        let mut any_dst = false;
        for i in 0..n {
            if visible_from(&src_pos, &self.positions[i], visibility_threshold) {
                self.src_visible.push(i as u32);
            }
            let dv = visible_from(&dst_pos, &self.positions[i], visibility_threshold);
            self.dst_visible[i] = dv;
            any_dst |= dv;
        }
        if self.src_visible.is_empty() {
            return Err(Error::NoRoute {
                t,
                reason: format!("no satellite visible from {}", src.name),
            });
        }
        if !any_dst {
            return Err(Error::NoRoute {
                t,
                reason: format!("no satellite visible from {}", dst.name),
            });
        }

        let fixed = model.per_link_fixed_s();
        self.reset_search();
        self.dist[src_node as usize] = 0.0;
        self.heap.push(HeapEntry {
            cost: 0.0,
            node: src_node,
        });

        while let Some(HeapEntry { cost, node }) = self.heap.pop() {
            let u = node as usize;
            if self.settled[u] {
                continue;
            }
            self.settled[u] = true;
            if node == dst_node {
                if stop_at_destination {
                    break;
                }
                continue; // no outgoing edges
            }
            if node == src_node {
                for k in 0..self.src_visible.len() {
                    let v = self.src_visible[k];
                    let w = euclid(&src_pos, &self.positions[v as usize]) / SPEED_OF_LIGHT_KM_S
                        + fixed;
                    self.relax(node, v, cost + w);
                }
            } else {
                let pu = self.positions[u];
                for v in self.graph.neighbours[u] {
                    if !self.settled[v as usize] {
                        let w = euclid(&pu, &self.positions[v as usize]) / SPEED_OF_LIGHT_KM_S
                            + fixed;
                        self.relax(node, v, cost + w);
                    }
                }
                if self.dst_visible[u] {
                    let w = euclid(&pu, &dst_pos) / SPEED_OF_LIGHT_KM_S + fixed;
                    self.relax(node, dst_node, cost + w);
                }
            }
        }

        if self.dist[dst_node as usize].is_infinite() {
            return Err(Error::NoRoute {
                t,
                reason: "destination unreachable".into(),
            });
        }
        Ok(self.rebuild_route(src, dst, src_node, dst_node, t))
    }

    #[inline]
    fn relax(&mut self, from: u32, to: u32, cost: f64) {
        if cost < self.dist[to as usize] {
            self.dist[to as usize] = cost;
            self.prev[to as usize] = from;
            self.heap.push(HeapEntry { cost, node: to });
        }
    }

    fn rebuild_route(
        &self,
        src: &GroundStation,
        dst: &GroundStation,
        src_node: u32,
        dst_node: u32,
        t: f64,
    ) -> Route {
        let q = self.graph.params().sats_per_plane();
        let mut rev = Vec::new();
        let mut cur = self.prev[dst_node as usize];
        while cur != src_node {
            rev.push(cur);
            cur = self.prev[cur as usize];
        }
        let mut nodes = Vec::with_capacity(rev.len() + 2);
        nodes.push(NodeId::Ground(src.clone()));
        nodes.extend(
            rev.iter()
                .rev()
                .map(|&i| NodeId::Satellite(SatelliteId::from_flat(i as usize, q))),
        );
        nodes.push(NodeId::Ground(dst.clone()));
        Route {
            nodes,
            computed_at: t,
        }
    }

    /// Shortest route constrained to the given access satellites: the two
    /// ground links are fixed and the in-orbit part is a shortest ISL path.
    /// Returns the route and its one-way delay at `t`.
    pub fn constrained_route(
        &mut self,
        src: &GroundStation,
        src_sat: SatelliteId,
        dst_sat: SatelliteId,
        dst: &GroundStation,
        model: &DelayModel,
        t: f64,
    ) -> (Route, f64) {
        let q = self.graph.params().sats_per_plane();
        self.prepare_positions(t);
        let fixed = model.per_link_fixed_s();
        let src_pos = ground_position_km(src, t);
        let dst_pos = ground_position_km(dst, t);
        let from = src_sat.flat(q);
        let to = dst_sat.flat(q);

        let up = euclid(&src_pos, &self.positions[from]) / SPEED_OF_LIGHT_KM_S + fixed;

        let mut path_rev = Vec::new();
        if from == to {
            path_rev.push(from as u32);
        } else {
            self.reset_search();
            self.dist[from] = 0.0;
            self.heap.push(HeapEntry {
                cost: 0.0,
                node: from as u32,
            });
            while let Some(HeapEntry { cost, node }) = self.heap.pop() {
                let u = node as usize;
                if self.settled[u] {
                    continue;
                }
                self.settled[u] = true;
                if u == to {
                    break;
                }
                let pu = self.positions[u];
                for v in self.graph.neighbours[u] {
                    if !self.settled[v as usize] {
                        let w = euclid(&pu, &self.positions[v as usize]) / SPEED_OF_LIGHT_KM_S
                            + fixed;
                        self.relax(node, v, cost + w);
                    }
                }
            }
            let mut cur = to as u32;
            while cur != from as u32 {
                path_rev.push(cur);
                cur = self.prev[cur as usize];
            }
            path_rev.push(from as u32);
        }

        let down = euclid(&self.positions[to], &dst_pos) / SPEED_OF_LIGHT_KM_S + fixed;
        let orbit_cost = if from == to { 0.0 } else { self.dist[to] };
        let delay = up + orbit_cost + down;

        let mut nodes = Vec::with_capacity(path_rev.len() + 2);
        nodes.push(NodeId::Ground(src.clone()));
        nodes.extend(
            path_rev
                .iter()
                .rev()
                .map(|&i| NodeId::Satellite(SatelliteId::from_flat(i as usize, q))),
        );
        nodes.push(NodeId::Ground(dst.clone()));
        (
            Route {
                nodes,
                computed_at: t,
            },
            delay,
        )
    }
}
