//! Per-pair, per-slice sub-networks.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::gaps::{GapId, GapPair, PairId, PairRegion, TrajectoryGap};
use crate::geometry::{BBox, Point};
use crate::network::{EdgeId, EdgeWeightModel, EdgeWeights, NodeId, SpatialNetwork, TimeWindow};

pub const DEFAULT_SLICES: usize = 16;
pub const DEFAULT_ANCHOR_SNAP_RADIUS: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubnetError {
    #[error("slice count must be at least 2, got {0}")]
    TooFewSlices(usize),
}

/// Arc of a [`LocalGraph`]: target local index and edge slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalArc {
    pub node: u32,
    pub slot: u32,
}

/// Subgraph induced by a node subset, with dense local indices.
///
/// Local node order follows [`NodeId`] order; `edges()[slot]` is the
/// network edge behind every arc with that slot.
#[derive(Debug, Clone)]
pub struct LocalGraph {
    nodes: Vec<NodeId>,
    edges: Arc<[EdgeId]>,
    out_offsets: Vec<u32>,
    out: Vec<LocalArc>,
    in_offsets: Vec<u32>,
    inc: Vec<LocalArc>,
}

impl LocalGraph {
    /// Induced subgraph on `nodes` (any order, duplicates ignored).
    pub fn induced(net: &SpatialNetwork, mut nodes: Vec<NodeId>) -> Self {
        nodes.sort_unstable();
        nodes.dedup();
        let local = |id: NodeId| nodes.binary_search(&id).ok();
        let mut edge_ids: Vec<EdgeId> = Vec::new();
        for &u in &nodes {
            for a in net.out_arcs(u) {
                if local(a.node).is_some() {
                    edge_ids.push(a.edge);
                }
            }
        }
        edge_ids.sort_unstable();
        edge_ids.dedup();
        let slot = |e: EdgeId| edge_ids.binary_search(&e).expect("edge collected above") as u32;

        let mut out_offsets = Vec::with_capacity(nodes.len() + 1);
        let mut in_offsets = Vec::with_capacity(nodes.len() + 1);
        let mut out = Vec::new();
        let mut inc = Vec::new();
        out_offsets.push(0);
        in_offsets.push(0);
        for &u in &nodes {
            for a in net.out_arcs(u) {
                if let Some(v) = local(a.node) {
                    out.push(LocalArc { node: v as u32, slot: slot(a.edge) });
                }
            }
            out_offsets.push(out.len() as u32);
            for a in net.in_arcs(u) {
                if let Some(v) = local(a.node) {
                    inc.push(LocalArc { node: v as u32, slot: slot(a.edge) });
                }
            }
            in_offsets.push(inc.len() as u32);
        }
        Self {
            nodes,
            edges: edge_ids.into(),
            out_offsets,
            out,
            in_offsets,
            inc,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn edges(&self) -> &Arc<[EdgeId]> {
        &self.edges
    }

    pub fn node(&self, local: usize) -> NodeId {
        self.nodes[local]
    }

    pub fn local_index(&self, id: NodeId) -> Option<usize> {
        self.nodes.binary_search(&id).ok()
    }

    pub fn out_arcs(&self, local: usize) -> &[LocalArc] {
        &self.out[self.out_offsets[local] as usize..self.out_offsets[local + 1] as usize]
    }

    pub fn in_arcs(&self, local: usize) -> &[LocalArc] {
        &self.inc[self.in_offsets[local] as usize..self.in_offsets[local + 1] as usize]
    }

    /// Edge weights for this graph's edge set over `window`.
    pub fn weights(&self, model: &EdgeWeightModel, window: TimeWindow) -> EdgeWeights {
        model.weights(self.edges.clone(), window)
    }
}

/// Sub-network a single gap's object can use: every node inside the gap's
/// geo-ellipse, with the anchors snapped onto it.
#[derive(Debug, Clone)]
pub struct GapNet {
    pub gap: GapId,
    pub graph: LocalGraph,
    /// Local index of the snapped start anchor.
    pub source: Option<usize>,
    /// Local index of the snapped end anchor.
    pub sink: Option<usize>,
}

impl GapNet {
    pub fn build(net: &SpatialNetwork, gap: &TrajectoryGap, snap_radius: f64) -> Self {
        let ellipse = gap.ellipse();
        let nodes: Vec<NodeId> = net
            .nodes_in_bbox(&ellipse.bbox())
            .into_iter()
            .filter(|&n| ellipse.contains(&net.location(n)))
            .collect();
        let graph = LocalGraph::induced(net, nodes);
        let source = snap(net, &graph, &gap.start_anchor, snap_radius);
        let sink = snap(net, &graph, &gap.end_anchor, snap_radius);
        Self {
            gap: gap.id,
            graph,
            source,
            sink,
        }
    }

    pub fn is_snapped(&self) -> bool {
        self.source.is_some() && self.sink.is_some()
    }
}

/// Nearest graph node to `p` within `radius`; ties go to the smaller id.
fn snap(net: &SpatialNetwork, graph: &LocalGraph, p: &Point, radius: f64) -> Option<usize> {
    net.nodes_in_bbox(&BBox::around(*p, radius))
        .into_iter()
        .filter_map(|id| graph.local_index(id).map(|l| (net.location(id).distance(p), id, l)))
        .filter(|(d, _, _)| *d <= radius)
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(_, _, l)| l)
}

/// Builds the gap sub-network of every gap referenced by `pairs`.
pub fn build_gap_nets(
    net: &SpatialNetwork,
    pairs: &[GapPair],
    snap_radius: f64,
) -> HashMap<GapId, Arc<GapNet>> {
    let mut gaps: Vec<&TrajectoryGap> = pairs.iter().flat_map(|p| p.gaps()).collect();
    gaps.sort_by_key(|g| g.id);
    gaps.dedup_by_key(|g| g.id);
    gaps.par_iter()
        .map(|g| (g.id, Arc::new(GapNet::build(net, g, snap_radius))))
        .collect()
}

/// Uniform slice instants `t_k = t_s + k (t_e - t_s) / K`, `k = 0..=K`.
pub fn slice_times(range: TimeWindow, k: usize) -> Vec<f64> {
    let step = (range.end - range.start) / k as f64;
    let mut times: Vec<f64> = (0..=k).map(|i| range.start + i as f64 * step).collect();
    times[k] = range.end;
    times
}

/// Forward-looking weight windows `[t_k, t_{k+1}]`; the last slice reuses
/// the final window.
pub fn slice_windows(times: &[f64]) -> Vec<TimeWindow> {
    let n = times.len();
    (0..n)
        .map(|k| {
            let (a, b) = if k + 1 < n { (times[k], times[k + 1]) } else { (times[n - 2], times[n - 1]) };
            TimeWindow::new(a, b).expect("slice times are non-decreasing")
        })
        .collect()
}

/// Nodes inside the pair region, ascending.
pub fn region_nodes(net: &SpatialNetwork, region: &PairRegion) -> Vec<NodeId> {
    match region.bbox() {
        Some(bbox) => net
            .nodes_in_bbox(&bbox)
            .into_iter()
            .filter(|&n| region.contains(&net.location(n)))
            .collect(),
        None => Vec::new(),
    }
}

/// Network nodes and edge weights active at one slice of a pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SubNetworkSample {
    pub pair: PairId,
    pub slice: usize,
    pub t: f64,
    pub node_ids: Arc<[NodeId]>,
    pub edge_weights: EdgeWeights,
}

/// `K + 1` samples of the pair region over the overlap range. An empty
/// region yields no samples.
pub fn build_samples(
    net: &SpatialNetwork,
    model: &EdgeWeightModel,
    pair: &GapPair,
    k: usize,
) -> Result<Vec<SubNetworkSample>, SubnetError> {
    if k < 2 {
        return Err(SubnetError::TooFewSlices(k));
    }
    let nodes = region_nodes(net, &pair.region);
    if nodes.is_empty() {
        return Ok(Vec::new());
    }
    let graph = LocalGraph::induced(net, nodes);
    let node_ids: Arc<[NodeId]> = graph.nodes().into();
    let times = slice_times(pair.overlap, k);
    let windows = slice_windows(&times);
    Ok(times
        .iter()
        .zip(&windows)
        .enumerate()
        .map(|(i, (&t, &w))| SubNetworkSample {
            pair: pair.id(),
            slice: i,
            t,
            node_ids: node_ids.clone(),
            edge_weights: graph.weights(model, w),
        })
        .collect())
}

/// Everything a detector needs for one pair: the region nodes, the slice
/// schedule and both gap sub-networks.
#[derive(Debug, Clone)]
pub struct PairSamples {
    pub pair: GapPair,
    pub region: Vec<(NodeId, Point)>,
    pub times: Vec<f64>,
    pub windows: Vec<TimeWindow>,
    pub nets: [Arc<GapNet>; 2],
}

impl PairSamples {
    pub fn prepare(
        net: &SpatialNetwork,
        pair: &GapPair,
        k: usize,
        nets: &HashMap<GapId, Arc<GapNet>>,
    ) -> Result<Self, SubnetError> {
        if k < 2 {
            return Err(SubnetError::TooFewSlices(k));
        }
        let region = region_nodes(net, &pair.region)
            .into_iter()
            .map(|n| (n, net.location(n)))
            .collect();
        let times = slice_times(pair.overlap, k);
        let windows = slice_windows(&times);
        Ok(Self {
            pair: pair.clone(),
            region,
            times,
            windows,
            nets: [nets[&pair.first.id].clone(), nets[&pair.second.id].clone()],
        })
    }

    pub fn slices(&self) -> usize {
        self.times.len() - 1
    }

    pub fn id(&self) -> PairId {
        self.pair.id()
    }
}
