//! Earliest arrival, latest departure and availability intervals.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gaps::{GapId, TrajectoryGap};
use crate::network::{weight_drift, EdgeWeights, NodeId, TimeWindow};
use crate::subnet::{GapNet, LocalGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReachError {
    #[error("gap {0}: anchors could not be snapped onto the network")]
    SnapFailed(GapId),
    #[error("profile of gap {expected} cannot be refreshed with data for gap {got}")]
    PairMismatch { expected: GapId, got: GapId },
    #[error("edge weights do not match the profile's edge set")]
    EdgeSetMismatch,
}

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, u32);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on distance, then on local index.
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest travel times over the graph (or its reverse).
/// Unreachable nodes get `f64::INFINITY`.
pub fn shortest_times(graph: &LocalGraph, weights: &[f64], source: usize, reverse: bool) -> Vec<f64> {
    let n = graph.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Entry(0.0, source as u32));
    while let Some(Entry(d, u)) = heap.pop() {
        let u = u as usize;
        if d > dist[u] {
            continue;
        }
        let arcs = if reverse { graph.in_arcs(u) } else { graph.out_arcs(u) };
        for a in arcs {
            let nd = d + weights[a.slot as usize];
            let v = a.node as usize;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Entry(nd, a.node));
            }
        }
    }
    dist
}

fn check_weights(graph: &LocalGraph, weights: &EdgeWeights) -> Result<(), ReachError> {
    if Arc::ptr_eq(graph.edges(), &weights.edges) || graph.edges()[..] == weights.edges[..] {
        Ok(())
    } else {
        Err(ReachError::EdgeSetMismatch)
    }
}

fn to_map(graph: &LocalGraph, dist: &[f64], f: impl Fn(f64) -> f64) -> BTreeMap<NodeId, f64> {
    dist.iter()
        .enumerate()
        .filter(|(_, d)| d.is_finite())
        .map(|(i, &d)| (graph.node(i), f(d)))
        .collect()
}

/// `ea(u) = t_s + shortest travel time from source to u`; unreachable
/// nodes are absent.
pub fn earliest_arrival(
    graph: &LocalGraph,
    weights: &EdgeWeights,
    source: NodeId,
    t_s: f64,
) -> Result<BTreeMap<NodeId, f64>, ReachError> {
    check_weights(graph, weights)?;
    let Some(s) = graph.local_index(source) else {
        return Ok(BTreeMap::new());
    };
    Ok(to_map(graph, &shortest_times(graph, &weights.values, s, false), |d| t_s + d))
}

/// `ld(u) = t_e - shortest travel time from u to sink`; nodes that cannot
/// reach the sink are absent.
pub fn latest_departure(
    graph: &LocalGraph,
    weights: &EdgeWeights,
    sink: NodeId,
    t_e: f64,
) -> Result<BTreeMap<NodeId, f64>, ReachError> {
    check_weights(graph, weights)?;
    let Some(s) = graph.local_index(sink) else {
        return Ok(BTreeMap::new());
    };
    Ok(to_map(graph, &shortest_times(graph, &weights.values, s, true), |d| t_e - d))
}

/// Time window `[ea, ld]` during which an object may be at `node`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AvailabilityInterval {
    pub node: NodeId,
    pub ea: f64,
    pub ld: f64,
}

impl AvailabilityInterval {
    pub fn is_empty(&self) -> bool {
        !(self.ea <= self.ld)
    }

    /// Closed intersection of two intervals, if any.
    pub fn overlap(&self, other: &AvailabilityInterval) -> Option<TimeWindow> {
        TimeWindow::new(self.ea.max(other.ea), self.ld.min(other.ld))
    }
}

/// Availability of every gap sub-network node at one slice.
#[derive(Debug, Clone)]
pub struct ReachProfile {
    pub gap: GapId,
    /// Slice this profile is labelled for.
    pub slice: usize,
    /// Slice whose weights produced the arrival and departure times.
    pub basis: usize,
    net: Arc<GapNet>,
    weights: EdgeWeights,
    ea: Arc<[f64]>,
    ld: Arc<[f64]>,
}

impl ReachProfile {
    pub fn net(&self) -> &Arc<GapNet> {
        &self.net
    }

    /// Weights the profile was computed with.
    pub fn weights(&self) -> &EdgeWeights {
        &self.weights
    }

    /// Non-empty availability of `node`, or `None` when unreachable.
    pub fn interval(&self, node: NodeId) -> Option<AvailabilityInterval> {
        let i = self.net.graph.local_index(node)?;
        let (ea, ld) = (self.ea[i], self.ld[i]);
        (ea.is_finite() && ld.is_finite() && ea <= ld).then_some(AvailabilityInterval { node, ea, ld })
    }

    pub fn intervals(&self) -> impl Iterator<Item = AvailabilityInterval> + '_ {
        self.net.graph.nodes().iter().filter_map(|&n| self.interval(n))
    }

    /// Same times, labelled for another slice.
    pub fn relabel(&self, slice: usize) -> Self {
        Self { slice, ..self.clone() }
    }
}

/// Availability intervals of `gap` over its sub-network with `weights`.
pub fn availability(
    net: &Arc<GapNet>,
    gap: &TrajectoryGap,
    weights: EdgeWeights,
    slice: usize,
) -> Result<ReachProfile, ReachError> {
    if net.gap != gap.id {
        return Err(ReachError::PairMismatch { expected: net.gap, got: gap.id });
    }
    check_weights(&net.graph, &weights)?;
    let (Some(source), Some(sink)) = (net.source, net.sink) else {
        return Err(ReachError::SnapFailed(gap.id));
    };
    let fwd = shortest_times(&net.graph, &weights.values, source, false);
    let bwd = shortest_times(&net.graph, &weights.values, sink, true);
    let ea: Arc<[f64]> = fwd.iter().map(|d| gap.t_s + d).collect();
    let ld: Arc<[f64]> = bwd.iter().map(|d| gap.t_e - d).collect();
    Ok(ReachProfile {
        gap: gap.id,
        slice,
        basis: slice,
        net: net.clone(),
        weights,
        ea,
        ld,
    })
}

/// Outcome of [`refresh_profile`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Refresh {
    Reused,
    Recomputed,
}

/// Profile for `slice`: `prev` relabelled when the drift from the weights
/// `prev` was computed with stays below `tau`, otherwise a full recompute.
pub fn refresh_profile(
    prev: &ReachProfile,
    gap: &TrajectoryGap,
    next_weights: EdgeWeights,
    slice: usize,
    tau: f64,
) -> Result<(ReachProfile, Refresh), ReachError> {
    if prev.gap != gap.id {
        return Err(ReachError::PairMismatch { expected: prev.gap, got: gap.id });
    }
    let drift = weight_drift(&prev.weights, &next_weights).map_err(|_| ReachError::EdgeSetMismatch)?;
    if drift < tau {
        Ok((prev.relabel(slice), Refresh::Reused))
    } else {
        Ok((availability(&prev.net, gap, next_weights, slice)?, Refresh::Recomputed))
    }
}

/// Basis slice of every slice under the reuse rule: slice 0 is computed,
/// and slice `k` reuses the current basis while the drift between the
/// basis weights and slice `k`'s weights stays below `tau`.
///
/// `weights(k)` is only called when the drift actually has to be measured.
pub fn reuse_schedule(slices: usize, tau: f64, weights: impl FnMut(usize) -> EdgeWeights) -> Vec<usize> {
    let mut chain = ReuseChain::new(slices, tau, weights);
    (0..slices).map(|k| chain.basis(k)).collect()
}

/// The reuse rule evaluated lazily: the drift chain is only extended as
/// far as the largest slice asked about, and only the weights of basis
/// slices are kept.
pub struct ReuseChain<F> {
    slices: usize,
    tau: f64,
    weights: F,
    basis: Vec<usize>,
    current: Option<(usize, EdgeWeights)>,
    kept: BTreeMap<usize, EdgeWeights>,
}

impl<F: FnMut(usize) -> EdgeWeights> ReuseChain<F> {
    pub fn new(slices: usize, tau: f64, weights: F) -> Self {
        Self {
            slices,
            tau,
            weights,
            basis: Vec::with_capacity(slices),
            current: None,
            kept: BTreeMap::new(),
        }
    }

    /// Basis slice of slice `k`.
    pub fn basis(&mut self, k: usize) -> usize {
        assert!(k < self.slices, "slice {k} out of range");
        if self.tau == f64::INFINITY {
            return 0;
        }
        if !(self.tau > 0.0) {
            return k;
        }
        while self.basis.len() <= k {
            let i = self.basis.len();
            let w = (self.weights)(i);
            let recompute = match &self.current {
                None => true,
                Some((_, cw)) => weight_drift(cw, &w).expect("slices share one edge set") >= self.tau,
            };
            if recompute {
                if let Some((b, cw)) = self.current.take() {
                    self.kept.insert(b, cw);
                }
                self.current = Some((i, w));
            }
            self.basis.push(self.current.as_ref().map_or(0, |c| c.0));
        }
        self.basis[k]
    }

    /// Weights of basis slice `b`, if the chain measured them. Each basis is
    /// handed out once.
    pub fn take_weights(&mut self, b: usize) -> Option<EdgeWeights> {
        if let Some(w) = self.kept.remove(&b) {
            return Some(w);
        }
        match &self.current {
            Some((c, w)) if *c == b => Some(w.clone()),
            _ => None,
        }
    }

    /// Basis of slice `k` if known without measuring any more weights.
    pub fn known(&self, k: usize) -> Option<usize> {
        if self.tau == f64::INFINITY {
            Some(0)
        } else if !(self.tau > 0.0) {
            Some(k)
        } else {
            self.basis.get(k).copied()
        }
    }
}
