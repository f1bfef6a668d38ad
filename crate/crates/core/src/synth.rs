//! Synthetic road networks, trajectories with gaps, background traces and
//! ground-truth rendezvous labels.
//!
//! Objects come in couples. A positive couple is routed to a common node
//! and both objects dwell there inside their gaps; a negative couple gets
//! gaps that do not overlap in time. Trajectory points are recorded at node
//! arrivals outside the gaps only.
//!
//! Object speeds stay below [`MAX_OBJECT_SPEED`] while background traffic
//! never drops under it, so travel times derived from traces never exceed
//! an object's actual travel time. This keeps staged meets inside every
//! detector's availability intervals.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};
use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gaps::{GapId, PairId, Trajectories, TrajectoryPoint};
use crate::geometry::Point;
use crate::network::{
    load_network, load_traces, write_edges_csv, write_nodes_csv, write_traces_csv, CoordinateMode, HistoricTraces,
    IngestError, NodeId, SpatialNetwork, TraceRecord,
};

/// Upper bound on object speeds, m/s.
pub const MAX_OBJECT_SPEED: f64 = 8.0;
const FREE_FLOW_RANGE: (f64, f64) = (12.0, 20.0);
const CONGESTION_FLOOR: f64 = 0.7;
const UNIFORM_TRAFFIC_SPEED: f64 = 15.0;
const MAX_RETRIES: usize = 200;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid scenario: {0}")]
    Config(String),
    #[error("could not stage a meet for couple {couple} after {MAX_RETRIES} attempts")]
    InfeasibleInjection { couple: usize },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NetworkKind {
    /// 4-connected square grid.
    Grid,
    /// Delaunay triangulation of uniform random points.
    RandomPlanar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrafficMode {
    /// Per-edge free-flow speed scaled by a daily congestion cycle.
    Congested,
    /// One constant speed everywhere; weights never drift.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub network: NetworkKind,
    /// Target node count (grids round to a square).
    pub nodes: usize,
    /// Side length of the square study area, meters.
    pub extent: f64,
    pub objects: usize,
    /// Gap durations, seconds.
    pub emp_range: (f64, f64),
    /// Object travel speeds, m/s. Detection uses the upper bound as MS.
    pub ms_range: (f64, f64),
    /// Fraction of couples staged to meet.
    pub injection_rate: f64,
    /// Time overlap the staged dwell must exceed, seconds.
    pub to: f64,
    /// Slice count used to size the staged dwell.
    pub slices: usize,
    #[serde(with = "crate::float_serde")]
    pub tau: f64,
    /// Length of the simulated period, seconds.
    pub horizon: f64,
    pub start_time: f64,
    /// Background vehicles producing traces.
    pub trace_vehicles: usize,
    pub traffic: TrafficMode,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            network: NetworkKind::Grid,
            nodes: 2500,
            extent: 30_000.0,
            objects: 1000,
            emp_range: (1800.0, 2700.0),
            ms_range: (2.0, 4.0),
            injection_rate: 0.5,
            to: 600.0,
            slices: 16,
            tau: 0.25,
            horizon: 7.0 * 86_400.0,
            start_time: 1_700_000_000.0,
            trace_vehicles: 16,
            traffic: TrafficMode::Congested,
        }
    }
}

impl ScenarioConfig {
    /// Maximum speed detectors should assume for this scenario.
    pub fn detection_ms(&self) -> f64 {
        self.ms_range.1
    }

    /// Dwell of staged meets: long enough to exceed TO and to contain at
    /// least one slice instant.
    pub fn dwell(&self) -> f64 {
        (1.1 * self.to).max(1.1 * self.emp_range.1 / self.slices.max(1) as f64)
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::Config(m.to_string()));
        if self.nodes < 4 {
            return bad("nodes must be at least 4");
        }
        if self.objects < 2 {
            return bad("objects must be at least 2");
        }
        if !(self.extent > 0.0 && self.horizon > 0.0) {
            return bad("extent and horizon must be positive");
        }
        let (e0, e1) = self.emp_range;
        if !(e0 > 0.0 && e0 <= e1) {
            return bad("emp range must satisfy 0 < lo <= hi");
        }
        let (m0, m1) = self.ms_range;
        if !(m0 > 0.0 && m0 <= m1 && m1 <= MAX_OBJECT_SPEED) {
            return Err(SynthError::Config(format!(
                "ms range must satisfy 0 < lo <= hi <= {MAX_OBJECT_SPEED}"
            )));
        }
        if !(0.0..=1.0).contains(&self.injection_rate) {
            return bad("injection rate must lie in [0, 1]");
        }
        if self.slices < 2 {
            return bad("slices must be at least 2");
        }
        if !(self.to > 0.0) {
            return bad("TO must be positive");
        }
        if self.dwell() >= e0 {
            return bad("staged dwell does not fit in the shortest gap; raise the emp range or lower TO");
        }
        if self.horizon < 4.0 * e1 {
            return bad("horizon must be at least four times the longest gap");
        }
        Ok(())
    }
}

/// A visit of a staged route: node and the times the object is there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Visit {
    pub node: NodeId,
    pub arrive: f64,
    pub depart: f64,
}

/// Route of one object inside its gap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StagedRoute {
    pub object_id: String,
    pub speed: f64,
    pub visits: Vec<Visit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StagedMeet {
    pub pair: PairId,
    pub node: NodeId,
    pub routes: [StagedRoute; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TruthLabel {
    pub pair: PairId,
    /// External node id; `None` for negative pairs.
    pub node: Option<i64>,
    pub positive: bool,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub config: ScenarioConfig,
    pub network: SpatialNetwork,
    pub trajectories: Trajectories,
    pub traces: HistoricTraces,
    pub truth: Vec<TruthLabel>,
    pub staged: Vec<StagedMeet>,
}

impl Dataset {
    /// Positive `(pair, node)` labels with network-internal node ids.
    pub fn truth_set(&self) -> BTreeSet<(PairId, NodeId)> {
        truth_set(&self.network, &self.truth)
    }
}

pub fn truth_set(net: &SpatialNetwork, truth: &[TruthLabel]) -> BTreeSet<(PairId, NodeId)> {
    truth
        .iter()
        .filter(|l| l.positive)
        .filter_map(|l| Some((l.pair, net.node_by_external(l.node?)?)))
        .collect()
}

pub fn generate(config: &ScenarioConfig) -> Result<Dataset, SynthError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let network = match config.network {
        NetworkKind::Grid => grid_network(config.nodes, config.extent),
        NetworkKind::RandomPlanar => random_planar_network(config.nodes, config.extent, &mut rng),
    };
    let mut gen = Generator {
        cfg: config,
        net: &network,
        rng,
    };
    let mut points: Vec<(String, TrajectoryPoint)> = Vec::new();
    let mut truth = Vec::new();
    let mut staged = Vec::new();
    let couples = config.objects / 2;
    for c in 0..couples {
        let (a, b) = (2 * c, 2 * c + 1);
        let pair = PairId(GapId(a as u32), GapId(b as u32));
        let positive = gen.rng.gen_bool(config.injection_rate);
        if positive {
            let meet = gen.staged_couple(c, pair)?;
            truth.push(TruthLabel {
                pair,
                node: Some(network.external_id(meet.node)),
                positive: true,
            });
            for (obj, route) in [a, b].into_iter().zip(&meet.routes) {
                gen.emit_object(obj, route, &mut points);
            }
            staged.push(meet);
        } else {
            let routes = gen.disjoint_couple(c);
            truth.push(TruthLabel { pair, node: None, positive: false });
            for (obj, route) in [a, b].into_iter().zip(&routes) {
                gen.emit_object(obj, route, &mut points);
            }
        }
    }
    if config.objects % 2 == 1 {
        let obj = config.objects - 1;
        let route = gen.lone_route(obj);
        gen.emit_object(obj, &route, &mut points);
    }
    let traces = gen.background_traces();
    let trajectories = Trajectories::from_points(points).expect("routes are emitted in time order");
    truth.sort();
    Ok(Dataset {
        config: config.clone(),
        network,
        trajectories,
        traces,
        truth,
        staged,
    })
}

pub fn object_id(index: usize) -> String {
    format!("o{index:05}")
}

struct Generator<'a> {
    cfg: &'a ScenarioConfig,
    net: &'a SpatialNetwork,
    rng: ChaCha8Rng,
}

/// Distances and predecessors of a length-weighted search from `root`,
/// stopping beyond `limit`.
struct LengthTree {
    dist: Vec<f64>,
    pred: Vec<Option<NodeId>>,
}

impl LengthTree {
    fn build(net: &SpatialNetwork, root: NodeId, limit: f64) -> Self {
        let n = net.node_count();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![None; n];
        let mut heap = BinaryHeap::new();
        dist[root.index()] = 0.0;
        heap.push(Reverse((Ordered(0.0), root)));
        while let Some(Reverse((Ordered(d), u))) = heap.pop() {
            if d > dist[u.index()] {
                continue;
            }
            for a in net.out_arcs(u) {
                let nd = d + net.edge(a.edge).length;
                if nd <= limit && nd < dist[a.node.index()] {
                    dist[a.node.index()] = nd;
                    pred[a.node.index()] = Some(u);
                    heap.push(Reverse((Ordered(nd), a.node)));
                }
            }
        }
        Self { dist, pred }
    }

    /// Path from the root to `to`, root first.
    fn path(&self, to: NodeId) -> Vec<NodeId> {
        let mut path = vec![to];
        let mut cur = to;
        while let Some(p) = self.pred[cur.index()] {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// A random node whose distance lies in `[lo, hi]`, else the farthest
    /// node within `hi`.
    fn pick(&self, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> NodeId {
        let inside: Vec<usize> = (0..self.dist.len()).filter(|&i| self.dist[i] >= lo && self.dist[i] <= hi).collect();
        if let Some(&i) = inside.choose(rng) {
            return NodeId(i as u32);
        }
        let best = (0..self.dist.len())
            .filter(|&i| self.dist[i] <= hi)
            .max_by(|&a, &b| self.dist[a].total_cmp(&self.dist[b]).then(b.cmp(&a)))
            .expect("root is always within range");
        NodeId(best as u32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Ordered(f64);

impl Eq for Ordered {}

impl PartialOrd for Ordered {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ordered {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Generator<'_> {
    fn random_node(&mut self) -> NodeId {
        NodeId(self.rng.gen_range(0..self.net.node_count()) as u32)
    }

    fn speed(&mut self) -> f64 {
        let (a, b) = self.cfg.ms_range;
        if a == b {
            a
        } else {
            self.rng.gen_range(a..=b)
        }
    }

    fn duration(&mut self) -> f64 {
        let (a, b) = self.cfg.emp_range;
        if a == b {
            a
        } else {
            self.rng.gen_range(a..=b)
        }
    }

    /// Visits along `path` starting at `start` at `t`, moving at `speed`.
    fn walk(&self, path: &[NodeId], t: f64, speed: f64) -> Vec<Visit> {
        let mut visits = Vec::with_capacity(path.len());
        let mut now = t;
        for (i, &n) in path.iter().enumerate() {
            if i > 0 {
                now += self.edge_len(path[i - 1], n) / speed;
            }
            visits.push(Visit { node: n, arrive: now, depart: now });
        }
        visits
    }

    fn edge_len(&self, a: NodeId, b: NodeId) -> f64 {
        self.net
            .out_arcs(a)
            .iter()
            .filter(|arc| arc.node == b)
            .map(|arc| self.net.edge(arc.edge).length)
            .fold(f64::INFINITY, f64::min)
    }

    fn staged_couple(&mut self, couple: usize, pair: PairId) -> Result<StagedMeet, SynthError> {
        let dwell = self.cfg.dwell();
        let emp_max = self.cfg.emp_range.1;
        for _ in 0..MAX_RETRIES {
            let m = self.random_node();
            let lo = self.cfg.start_time + 2.0 * emp_max;
            let hi = self.cfg.start_time + self.cfg.horizon - 2.0 * emp_max;
            let m0 = self.rng.gen_range(lo..hi);
            let mut routes = Vec::with_capacity(2);
            for obj in [pair.0, pair.1] {
                let speed = self.speed();
                let d = self.duration();
                let budget = speed * (d - dwell) * self.rng.gen_range(0.5..0.95);
                let tree = LengthTree::build(self.net, m, budget);
                let f = self.rng.gen_range(0.3..0.7);
                let s = tree.pick(0.5 * f * budget, f * budget, &mut self.rng);
                let rest = budget - tree.dist[s.index()];
                let e = tree.pick(0.5 * rest, rest, &mut self.rng);
                let to_m: Vec<NodeId> = tree.path(s).into_iter().rev().collect();
                let from_m = tree.path(e);
                let travel = (tree.dist[s.index()] + tree.dist[e.index()]) / speed;
                let leftover = d - dwell - travel;
                if leftover < 0.0 {
                    break;
                }
                let slack1 = leftover * self.rng.gen_range(0.0..1.0);
                let slack2 = leftover - slack1;
                let t_s = m0 - slack1 - tree.dist[s.index()] / speed;
                let mut visits = self.walk(&to_m, t_s, speed);
                let arrive = visits.last().expect("path includes m").arrive;
                let depart = m0 + dwell + slack2;
                visits.last_mut().expect("path includes m").depart = depart;
                let mut tail = self.walk(&from_m, depart, speed);
                tail.remove(0);
                visits.extend(tail);
                debug_assert!(arrive <= m0 + 1e-6);
                routes.push(StagedRoute {
                    object_id: object_id(obj.index()),
                    speed,
                    visits,
                });
            }
            if routes.len() == 2 {
                let b = routes.pop().expect("two routes");
                let a = routes.pop().expect("two routes");
                return Ok(StagedMeet { pair, node: m, routes: [a, b] });
            }
        }
        Err(SynthError::InfeasibleInjection { couple })
    }

    /// Gap route from a random node to a node reachable within the gap.
    fn free_route(&mut self, object: usize, t_s: f64, d: f64) -> StagedRoute {
        let speed = self.speed();
        let s = self.random_node();
        let budget = speed * d * self.rng.gen_range(0.3..0.9);
        let tree = LengthTree::build(self.net, s, budget);
        let e = tree.pick(0.5 * budget, budget, &mut self.rng);
        let path = tree.path(e);
        let mut visits = self.walk(&path, t_s, speed);
        // Wait at the destination until the gap ends.
        let last = visits.last_mut().expect("path includes s");
        last.depart = t_s + d;
        if path.len() == 1 {
            last.arrive = t_s;
        }
        StagedRoute {
            object_id: object_id(object),
            speed,
            visits,
        }
    }

    /// Two routes whose gaps are separated in time.
    fn disjoint_couple(&mut self, couple: usize) -> [StagedRoute; 2] {
        let emp_max = self.cfg.emp_range.1;
        let (da, db) = (self.duration(), self.duration());
        let lo = self.cfg.start_time + emp_max;
        let hi = self.cfg.start_time + self.cfg.horizon - 3.0 * emp_max;
        let ta = self.rng.gen_range(lo..hi);
        let tb = ta + da + self.rng.gen_range(60.0..emp_max);
        let a = self.free_route(2 * couple, ta, da);
        let b = self.free_route(2 * couple + 1, tb, db);
        [a, b]
    }

    fn lone_route(&mut self, object: usize) -> StagedRoute {
        let emp_max = self.cfg.emp_range.1;
        let d = self.duration();
        let t = self.rng.gen_range(self.cfg.start_time + emp_max..self.cfg.start_time + self.cfg.horizon - 2.0 * emp_max);
        self.free_route(object, t, d)
    }

    /// Random walk of up to `steps` edges from `from`, using only edges an
    /// object crosses well within the gap threshold.
    fn lead(&mut self, from: NodeId, steps: usize, speed: f64) -> Vec<NodeId> {
        let max_len = 0.4 * self.cfg.emp_range.0 * speed;
        let mut path = vec![from];
        let mut cur = from;
        for _ in 0..steps {
            let options: Vec<NodeId> = self
                .net
                .out_arcs(cur)
                .iter()
                .filter(|a| self.net.edge(a.edge).length <= max_len)
                .map(|a| a.node)
                .collect();
            let Some(&next) = options.choose(&mut self.rng) else {
                break;
            };
            path.push(next);
            cur = next;
        }
        path
    }

    /// Writes an object's observed points: a lead-in walk ending at the gap
    /// start, then a lead-out walk from the gap end.
    fn emit_object(&mut self, index: usize, route: &StagedRoute, out: &mut Vec<(String, TrajectoryPoint)>) {
        let id = object_id(index);
        let first = route.visits.first().expect("route has visits");
        let last = route.visits.last().expect("route has visits");
        let (t_s, t_e) = (first.arrive, last.depart);
        let n_in = self.rng.gen_range(2..=5);
        let n_out = self.rng.gen_range(2..=5);

        let back = self.lead(first.node, n_in, route.speed);
        let mut lead_in: Vec<(f64, NodeId)> = Vec::with_capacity(back.len());
        let mut t = t_s;
        lead_in.push((t, back[0]));
        for w in back.windows(2) {
            t -= self.edge_len(w[0], w[1]) / route.speed;
            lead_in.push((t, w[1]));
        }
        lead_in.reverse();

        let fwd = self.lead(last.node, n_out, route.speed);
        let mut lead_out: Vec<(f64, NodeId)> = Vec::with_capacity(fwd.len());
        let mut t = t_e;
        lead_out.push((t, fwd[0]));
        for w in fwd.windows(2) {
            t += self.edge_len(w[0], w[1]) / route.speed;
            lead_out.push((t, w[1]));
        }

        for (t, n) in lead_in.into_iter().chain(lead_out) {
            out.push((id.clone(), TrajectoryPoint { t, point: self.net.location(n) }));
        }
    }

    fn congestion(&self, t: f64, phase: f64) -> f64 {
        let x = 2.0 * PI * (t - self.cfg.start_time) / 86_400.0 + phase;
        let mid = 0.5 * (1.0 + CONGESTION_FLOOR);
        mid + (1.0 - mid) * x.cos()
    }

    /// Vehicles wander the network and report their speed at every edge
    /// midpoint.
    fn background_traces(&mut self) -> HistoricTraces {
        let m = self.net.edge_count();
        let free_flow: Vec<f64> = (0..m).map(|_| self.rng.gen_range(FREE_FLOW_RANGE.0..FREE_FLOW_RANGE.1)).collect();
        let end = self.cfg.start_time + self.cfg.horizon;
        let mut records = Vec::new();
        for v in 0..self.cfg.trace_vehicles {
            if m == 0 {
                break;
            }
            let id = format!("v{v:03}");
            let phase = self.rng.gen_range(-0.3..0.3);
            let mut cur = self.random_node();
            let mut prev: Option<NodeId> = None;
            let mut t = self.cfg.start_time + self.rng.gen_range(0.0..600.0);
            while t < end {
                let arcs = self.net.out_arcs(cur);
                if arcs.is_empty() {
                    break;
                }
                let forward: Vec<_> = arcs.iter().filter(|a| Some(a.node) != prev).collect();
                let arc = if forward.is_empty() {
                    arcs[0]
                } else {
                    **forward.choose(&mut self.rng).expect("non-empty")
                };
                let e = self.net.edge(arc.edge);
                let speed = match self.cfg.traffic {
                    TrafficMode::Uniform => UNIFORM_TRAFFIC_SPEED,
                    TrafficMode::Congested => free_flow[arc.edge.index()] * self.congestion(t, phase),
                };
                let half = 0.5 * e.length / speed;
                let mid = self.net.location(cur).midpoint(&self.net.location(arc.node));
                records.push(TraceRecord {
                    object_id: id.clone(),
                    t: t + half,
                    point: mid,
                    speed,
                });
                t += 2.0 * half;
                prev = Some(cur);
                cur = arc.node;
                // Occasional parking.
                if self.rng.gen_bool(0.02) {
                    t += self.rng.gen_range(300.0..3600.0);
                }
            }
        }
        records.sort_by(|a, b| a.object_id.cmp(&b.object_id).then(a.t.total_cmp(&b.t)));
        HistoricTraces::new(records)
    }
}

/// Square grid with about `nodes` nodes spanning `extent` meters.
pub fn grid_network(nodes: usize, extent: f64) -> SpatialNetwork {
    let side = ((nodes as f64).sqrt().round() as usize).max(2);
    let pitch = extent / (side - 1) as f64;
    grid_with_pitch(side, side, pitch)
}

/// `cols x rows` grid; node id `r * cols + c` sits at `(c, r) * pitch`.
pub fn grid_with_pitch(cols: usize, rows: usize, pitch: f64) -> SpatialNetwork {
    let id = |c: usize, r: usize| NodeId((r * cols + c) as u32);
    let nodes = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| ((r * cols + c) as i64, Point::new(c as f64 * pitch, r as f64 * pitch))))
        .collect();
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((id(c, r), id(c + 1, r), pitch, false));
            }
            if r + 1 < rows {
                edges.push((id(c, r), id(c, r + 1), pitch, false));
            }
        }
    }
    SpatialNetwork::new(nodes, edges, None)
}

/// Delaunay triangulation of `nodes` uniform points in the square.
pub fn random_planar_network(nodes: usize, extent: f64, rng: &mut impl Rng) -> SpatialNetwork {
    let pts: Vec<delaunator::Point> = (0..nodes)
        .map(|_| delaunator::Point {
            x: (rng.gen_range(0.0..extent) * 100.0).round() / 100.0,
            y: (rng.gen_range(0.0..extent) * 100.0).round() / 100.0,
        })
        .collect();
    let tri = delaunator::triangulate(&pts);
    let mut pairs = BTreeSet::new();
    for t in tri.triangles.chunks(3) {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            pairs.insert((a.min(b), a.max(b)));
        }
    }
    let locs: Vec<Point> = pts.iter().map(|p| Point::new(p.x, p.y)).collect();
    let edges = pairs
        .into_iter()
        .filter_map(|(a, b)| {
            let len = locs[a].distance(&locs[b]);
            (len > 0.0).then_some((NodeId(a as u32), NodeId(b as u32), len, false))
        })
        .collect();
    SpatialNetwork::new(locs.into_iter().enumerate().map(|(i, p)| (i as i64, p)).collect(), edges, None)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SynthError + '_ {
    move |source| SynthError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn create(path: &Path) -> Result<std::io::BufWriter<fs::File>, SynthError> {
    fs::File::create(path).map(std::io::BufWriter::new).map_err(io_err(path))
}

pub const NODES_FILE: &str = "nodes.csv";
pub const EDGES_FILE: &str = "edges.csv";
pub const TRAJECTORIES_FILE: &str = "trajectories.csv";
pub const TRACES_FILE: &str = "traces.csv";
pub const TRUTH_FILE: &str = "truth.csv";
pub const SCENARIO_FILE: &str = "scenario.json";
pub const STAGED_FILE: &str = "staged.json";

pub fn write_trajectories_csv(t: &Trajectories, out: impl Write) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["object_id", "t_unix_s", "x", "y"])?;
    for o in t.objects() {
        for p in &o.points {
            w.write_record([o.object_id.to_string(), p.t.to_string(), p.point.x.to_string(), p.point.y.to_string()])?;
        }
    }
    w.flush()
}

pub fn write_truth_csv(labels: &[TruthLabel], out: impl Write) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["pair_id", "node_id", "label"])?;
    for l in labels {
        let node = l.node.map_or_else(|| "*".to_string(), |n| n.to_string());
        w.write_record([l.pair.to_string(), node, u8::from(l.positive).to_string()])?;
    }
    w.flush()
}

pub fn read_truth_csv(path: &Path) -> Result<Vec<TruthLabel>, IngestError> {
    use crate::network::io_support::{field, open, Rows};
    let mut out = Vec::new();
    let mut rows = Rows::new(open(path)?, &path.display().to_string());
    let file = rows.file().to_string();
    rows.for_each(|line, rec| {
        let pair_raw: String = field(&file, line, rec, 0, "pair_id")?;
        let pair = pair_raw.parse::<PairId>().map_err(|message| IngestError::Parse {
            file: file.clone(),
            line,
            message,
        })?;
        let node_raw: String = field(&file, line, rec, 1, "node_id")?;
        let node = if node_raw == "*" { None } else { Some(field(&file, line, rec, 1, "node_id")?) };
        let label: u8 = field(&file, line, rec, 2, "label")?;
        out.push(TruthLabel { pair, node, positive: label == 1 });
        Ok(())
    })?;
    Ok(out)
}

/// Writes every dataset file into `dir`, which must not exist yet.
pub fn write_dataset(ds: &Dataset, dir: &Path) -> Result<(), SynthError> {
    if dir.exists() {
        return Err(SynthError::Config(format!("output directory {} already exists", dir.display())));
    }
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let p = dir.join(NODES_FILE);
    write_nodes_csv(&ds.network, create(&p)?).map_err(io_err(&p))?;
    let p = dir.join(EDGES_FILE);
    write_edges_csv(&ds.network, create(&p)?).map_err(io_err(&p))?;
    let p = dir.join(TRAJECTORIES_FILE);
    write_trajectories_csv(&ds.trajectories, create(&p)?).map_err(io_err(&p))?;
    let p = dir.join(TRACES_FILE);
    write_traces_csv(&ds.traces, create(&p)?).map_err(io_err(&p))?;
    let p = dir.join(TRUTH_FILE);
    write_truth_csv(&ds.truth, create(&p)?).map_err(io_err(&p))?;
    let p = dir.join(SCENARIO_FILE);
    let mut f = create(&p)?;
    serde_json::to_writer_pretty(&mut f, &ds.config).map_err(|e| io_err(&p)(e.into()))?;
    f.flush().map_err(io_err(&p))?;
    let p = dir.join(STAGED_FILE);
    let mut f = create(&p)?;
    serde_json::to_writer_pretty(&mut f, &ds.staged).map_err(|e| io_err(&p)(e.into()))?;
    f.flush().map_err(io_err(&p))?;
    Ok(())
}

/// Reads a dataset directory written by [`write_dataset`].
pub fn read_dataset(dir: &Path) -> Result<Dataset, SynthError> {
    use crate::network::io_support::open;
    let read = |name: &str| -> Result<fs::File, SynthError> { Ok(open(&dir.join(name))?) };
    let network = load_network(
        read(NODES_FILE)?,
        &dir.join(NODES_FILE).display().to_string(),
        read(EDGES_FILE)?,
        &dir.join(EDGES_FILE).display().to_string(),
        CoordinateMode::Planar,
    )?;
    let trajectories = crate::gaps::load_trajectories(
        read(TRAJECTORIES_FILE)?,
        &dir.join(TRAJECTORIES_FILE).display().to_string(),
        None,
    )?;
    let traces = load_traces(read(TRACES_FILE)?, &dir.join(TRACES_FILE).display().to_string(), None)?;
    let truth = read_truth_csv(&dir.join(TRUTH_FILE))?;
    let p = dir.join(SCENARIO_FILE);
    let config: ScenarioConfig =
        serde_json::from_reader(read(SCENARIO_FILE)?).map_err(|e| SynthError::Config(format!("{}: {e}", p.display())))?;
    let staged = match fs::File::open(dir.join(STAGED_FILE)) {
        Ok(f) => serde_json::from_reader(f).map_err(|e| SynthError::Config(format!("{STAGED_FILE}: {e}")))?,
        Err(_) => Vec::new(),
    };
    Ok(Dataset {
        config,
        network,
        trajectories,
        traces,
        truth,
        staged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ScenarioConfig {
        ScenarioConfig {
            nodes: 400,
            extent: 10_000.0,
            objects: 20,
            horizon: 86_400.0,
            trace_vehicles: 4,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn same_seed_same_dataset() {
        let a = generate(&small()).unwrap();
        let b = generate(&small()).unwrap();
        assert_eq!(a.trajectories, b.trajectories);
        assert_eq!(a.traces, b.traces);
        assert_eq!(a.truth, b.truth);
        let c = generate(&ScenarioConfig { seed: 8, ..small() }).unwrap();
        assert_ne!(a.trajectories, c.trajectories);
    }

    #[test]
    fn zero_rate_has_no_positive_labels() {
        let ds = generate(&ScenarioConfig { injection_rate: 0.0, ..small() }).unwrap();
        assert!(ds.truth.iter().all(|l| !l.positive));
        assert!(ds.truth_set().is_empty());
        assert_eq!(ds.truth.len(), 10);
    }

    #[test]
    fn full_rate_stages_every_couple() {
        let ds = generate(&ScenarioConfig { injection_rate: 1.0, ..small() }).unwrap();
        assert_eq!(ds.truth_set().len(), 10);
        assert_eq!(ds.staged.len(), 10);
    }

    #[test]
    fn one_gap_per_object() {
        let cfg = small();
        let ds = generate(&cfg).unwrap();
        let g = crate::gaps::extract_gaps(&ds.trajectories, cfg.emp_range.0, crate::gaps::MsPolicy::Global(cfg.detection_ms()));
        assert_eq!(g.gaps.len(), cfg.objects);
        assert_eq!(g.infeasible_dropped, 0);
        for (i, gap) in g.gaps.iter().enumerate() {
            assert_eq!(&*gap.object_id, object_id(i));
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(generate(&ScenarioConfig { ms_range: (2.0, 9.0), ..small() }).is_err());
        assert!(generate(&ScenarioConfig { to: 5000.0, ..small() }).is_err());
        assert!(generate(&ScenarioConfig { objects: 1, ..small() }).is_err());
    }

    #[test]
    fn random_planar_is_connected() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let net = random_planar_network(300, 5000.0, &mut rng);
        let tree = LengthTree::build(&net, NodeId(0), f64::INFINITY);
        assert!(tree.dist.iter().all(|d| d.is_finite()));
    }

    #[test]
    fn dataset_round_trips_through_files() {
        let ds = generate(&small()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds");
        write_dataset(&ds, &path).unwrap();
        let back = read_dataset(&path).unwrap();
        assert_eq!(back.trajectories, ds.trajectories);
        assert_eq!(back.traces, ds.traces);
        assert_eq!(back.truth, ds.truth);
        assert_eq!(back.staged, ds.staged);
        assert!(matches!(write_dataset(&ds, &path), Err(SynthError::Config(_))));
    }
}
