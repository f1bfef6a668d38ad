//! Spatial network model.
//!
//! Node ids from input files are remapped to a dense `0..N` range
//! ([`NodeId`]); the original ids stay available through
//! [`SpatialNetwork::external_id`] and [`SpatialNetwork::node_by_external`].
//! Undirected edges are stored once and expanded into two arcs.

mod io;
mod projection;
mod weights;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::{BBox, Point};

pub use io::{
    load_network, load_network_from_paths, load_traces, load_traces_from_path, write_edges_csv,
    write_nodes_csv, write_traces_csv, CoordinateMode, IngestError,
};
pub use projection::LocalProjection;
pub use weights::{
    edge_weight_at, weight_drift, DriftError, EdgeWeightModel, EdgeWeights, HistoricTraces, TimeWindow,
    TraceRecord, WeightParams, DEFAULT_FREE_FLOW_SPEED, DEFAULT_TRACE_SNAP_RADIUS,
};

pub(crate) mod io_support {
    pub(crate) use super::io::{field, finite, open, Rows};
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeId(pub u32);

impl EdgeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkNode {
    pub id: NodeId,
    pub external_id: i64,
    pub location: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkEdge {
    pub id: EdgeId,
    pub from: NodeId,
    pub to: NodeId,
    /// Static length in meters.
    pub length: f64,
    pub oneway: bool,
}

/// Outgoing (or incoming, in the reverse adjacency) arc.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arc {
    pub node: NodeId,
    pub edge: EdgeId,
}

/// Immutable geo-referenced graph.
#[derive(Debug, Clone)]
pub struct SpatialNetwork {
    nodes: Vec<NetworkNode>,
    edges: Vec<NetworkEdge>,
    out_offsets: Vec<u32>,
    out_arcs: Vec<Arc>,
    in_offsets: Vec<u32>,
    in_arcs: Vec<Arc>,
    external: HashMap<i64, NodeId>,
    projection: Option<LocalProjection>,
    grid: NodeGrid,
}

impl SpatialNetwork {
    /// Builds a network from already-validated parts. Edge endpoints must
    /// refer to existing nodes; self-loops are dropped.
    pub fn new(
        nodes: Vec<(i64, Point)>,
        edges: Vec<(NodeId, NodeId, f64, bool)>,
        projection: Option<LocalProjection>,
    ) -> Self {
        let nodes: Vec<NetworkNode> = nodes
            .into_iter()
            .enumerate()
            .map(|(i, (external_id, location))| NetworkNode {
                id: NodeId(i as u32),
                external_id,
                location,
            })
            .collect();
        let external = nodes.iter().map(|n| (n.external_id, n.id)).collect();
        let edges: Vec<NetworkEdge> = edges
            .into_iter()
            .filter(|(a, b, _, _)| a != b)
            .enumerate()
            .map(|(i, (from, to, length, oneway))| NetworkEdge {
                id: EdgeId(i as u32),
                from,
                to,
                length,
                oneway,
            })
            .collect();

        let n = nodes.len();
        let mut out: Vec<Vec<Arc>> = vec![Vec::new(); n];
        let mut inc: Vec<Vec<Arc>> = vec![Vec::new(); n];
        for e in &edges {
            out[e.from.index()].push(Arc { node: e.to, edge: e.id });
            inc[e.to.index()].push(Arc { node: e.from, edge: e.id });
            if !e.oneway {
                out[e.to.index()].push(Arc { node: e.from, edge: e.id });
                inc[e.from.index()].push(Arc { node: e.to, edge: e.id });
            }
        }
        let (out_offsets, out_arcs) = flatten(out);
        let (in_offsets, in_arcs) = flatten(inc);
        let grid = NodeGrid::build(&nodes);
        Self {
            nodes,
            edges,
            out_offsets,
            out_arcs,
            in_offsets,
            in_arcs,
            external,
            projection,
            grid,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Number of directed arcs after undirected expansion.
    pub fn arc_count(&self) -> usize {
        self.out_arcs.len()
    }

    pub fn nodes(&self) -> &[NetworkNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[NetworkEdge] {
        &self.edges
    }

    pub fn node(&self, id: NodeId) -> &NetworkNode {
        &self.nodes[id.index()]
    }

    pub fn edge(&self, id: EdgeId) -> &NetworkEdge {
        &self.edges[id.index()]
    }

    pub fn location(&self, id: NodeId) -> Point {
        self.nodes[id.index()].location
    }

    pub fn external_id(&self, id: NodeId) -> i64 {
        self.nodes[id.index()].external_id
    }

    pub fn node_by_external(&self, external: i64) -> Option<NodeId> {
        self.external.get(&external).copied()
    }

    pub fn is_directed(&self) -> bool {
        self.edges.iter().any(|e| e.oneway)
    }

    pub fn projection(&self) -> Option<&LocalProjection> {
        self.projection.as_ref()
    }

    pub fn out_arcs(&self, id: NodeId) -> &[Arc] {
        let i = id.index();
        &self.out_arcs[self.out_offsets[i] as usize..self.out_offsets[i + 1] as usize]
    }

    pub fn in_arcs(&self, id: NodeId) -> &[Arc] {
        let i = id.index();
        &self.in_arcs[self.in_offsets[i] as usize..self.in_offsets[i + 1] as usize]
    }

    /// Node ids whose location falls inside `bbox`, ascending.
    pub fn nodes_in_bbox(&self, bbox: &BBox) -> Vec<NodeId> {
        let mut out = self.grid.query(bbox, &self.nodes);
        out.sort_unstable();
        out
    }

    /// Nearest node to `p` within `radius`, ties broken by smaller id.
    pub fn nearest_node(&self, p: &Point, radius: f64) -> Option<NodeId> {
        self.nodes_in_bbox(&BBox::around(*p, radius))
            .into_iter()
            .map(|id| (self.location(id).distance(p), id))
            .filter(|(d, _)| *d <= radius)
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .map(|(_, id)| id)
    }
}

fn flatten(lists: Vec<Vec<Arc>>) -> (Vec<u32>, Vec<Arc>) {
    let mut offsets = Vec::with_capacity(lists.len() + 1);
    let mut arcs = Vec::with_capacity(lists.iter().map(Vec::len).sum());
    offsets.push(0);
    for mut l in lists {
        l.sort_by_key(|a| (a.node, a.edge));
        arcs.extend(l);
        offsets.push(arcs.len() as u32);
    }
    (offsets, arcs)
}

/// Uniform bucket grid over node locations.
#[derive(Debug, Clone, Default)]
struct NodeGrid {
    origin: (f64, f64),
    cell: f64,
    cols: usize,
    rows: usize,
    buckets: Vec<Vec<NodeId>>,
}

impl NodeGrid {
    fn build(nodes: &[NetworkNode]) -> Self {
        if nodes.is_empty() {
            return Self::default();
        }
        let (mut minx, mut miny, mut maxx, mut maxy) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for n in nodes {
            minx = minx.min(n.location.x);
            miny = miny.min(n.location.y);
            maxx = maxx.max(n.location.x);
            maxy = maxy.max(n.location.y);
        }
        let span = (maxx - minx).max(maxy - miny).max(1e-9);
        let per_side = ((nodes.len() as f64).sqrt().ceil() as usize).clamp(1, 1024);
        let cell = span / per_side as f64;
        let cols = ((maxx - minx) / cell) as usize + 1;
        let rows = ((maxy - miny) / cell) as usize + 1;
        let mut buckets = vec![Vec::new(); cols * rows];
        for n in nodes {
            let c = (((n.location.x - minx) / cell) as usize).min(cols - 1);
            let r = (((n.location.y - miny) / cell) as usize).min(rows - 1);
            buckets[r * cols + c].push(n.id);
        }
        Self {
            origin: (minx, miny),
            cell,
            cols,
            rows,
            buckets,
        }
    }

    fn query(&self, bbox: &BBox, nodes: &[NetworkNode]) -> Vec<NodeId> {
        if self.buckets.is_empty() {
            return Vec::new();
        }
        let to_col = |x: f64| ((x - self.origin.0) / self.cell).floor();
        let to_row = |y: f64| ((y - self.origin.1) / self.cell).floor();
        let c0 = to_col(bbox.min.x).max(0.0) as usize;
        let r0 = to_row(bbox.min.y).max(0.0) as usize;
        let c1 = to_col(bbox.max.x);
        let r1 = to_row(bbox.max.y);
        if c1 < 0.0 || r1 < 0.0 {
            return Vec::new();
        }
        let c1 = (c1 as usize).min(self.cols - 1);
        let r1 = (r1 as usize).min(self.rows - 1);
        let mut out = Vec::new();
        for r in r0..=r1 {
            for c in c0..=c1 {
                for &id in &self.buckets[r * self.cols + c] {
                    let p = nodes[id.index()].location;
                    if p.x >= bbox.min.x && p.x <= bbox.max.x && p.y >= bbox.min.y && p.y <= bbox.max.y {
                        out.push(id);
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> SpatialNetwork {
        let nodes = (0..n).map(|i| (i as i64 * 10, Point::new(i as f64, 0.0))).collect();
        let edges = (1..n)
            .map(|i| (NodeId(i as u32 - 1), NodeId(i as u32), 1.0, false))
            .collect();
        SpatialNetwork::new(nodes, edges, None)
    }

    #[test]
    fn undirected_edges_expand_to_two_arcs() {
        let net = line(3);
        assert_eq!(net.node_count(), 3);
        assert_eq!(net.arc_count(), 4);
        assert_eq!(net.out_arcs(NodeId(1)).len(), 2);
        assert_eq!(net.in_arcs(NodeId(0)).len(), 1);
        assert!(!net.is_directed());
    }

    #[test]
    fn self_loops_are_dropped() {
        let nodes = vec![(1, Point::new(0.0, 0.0)), (2, Point::new(1.0, 0.0))];
        let edges = vec![(NodeId(0), NodeId(0), 1.0, false), (NodeId(0), NodeId(1), 1.0, true)];
        let net = SpatialNetwork::new(nodes, edges, None);
        assert_eq!(net.edge_count(), 1);
        assert_eq!(net.arc_count(), 1);
        assert!(net.is_directed());
        assert!(net.out_arcs(NodeId(1)).is_empty());
    }

    #[test]
    fn bbox_and_nearest_queries() {
        let net = line(50);
        let hits = net.nodes_in_bbox(&BBox::around(Point::new(10.0, 0.0), 2.0));
        assert_eq!(hits, (8..=12).map(NodeId).collect::<Vec<_>>());
        assert_eq!(net.nearest_node(&Point::new(10.4, 0.3), 1.0), Some(NodeId(10)));
        // Equidistant: smaller id wins.
        assert_eq!(net.nearest_node(&Point::new(10.5, 0.0), 1.0), Some(NodeId(10)));
        assert_eq!(net.nearest_node(&Point::new(10.5, 5.0), 1.0), None);
        assert_eq!(net.node_by_external(120), Some(NodeId(12)));
    }
}
