//! Time-dependent edge weights derived from historic traces.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{EdgeId, SpatialNetwork};
use crate::geometry::{point_segment_distance, Point};

pub const DEFAULT_FREE_FLOW_SPEED: f64 = 15.0;
pub const DEFAULT_TRACE_SNAP_RADIUS: f64 = 25.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub object_id: String,
    pub t: f64,
    pub point: Point,
    pub speed: f64,
}

/// Historic location traces used only for speed estimation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HistoricTraces {
    records: Vec<TraceRecord>,
}

impl HistoricTraces {
    pub fn new(records: Vec<TraceRecord>) -> Self {
        Self { records }
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Closed time window `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start: f64,
    pub end: f64,
}

impl TimeWindow {
    /// Returns `None` unless both ends are finite and `start <= end`.
    pub fn new(start: f64, end: f64) -> Option<Self> {
        (start.is_finite() && end.is_finite() && start <= end).then_some(Self { start, end })
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t <= self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightParams {
    /// Max distance from a trace point to an edge segment.
    pub snap_radius: f64,
    /// Fallback speed when no trace qualifies.
    pub default_speed: f64,
}

impl Default for WeightParams {
    fn default() -> Self {
        Self {
            snap_radius: DEFAULT_TRACE_SNAP_RADIUS,
            default_speed: DEFAULT_FREE_FLOW_SPEED,
        }
    }
}

fn near_edge(net: &SpatialNetwork, edge: EdgeId, p: &Point, radius: f64) -> bool {
    let e = net.edge(edge);
    point_segment_distance(p, &net.location(e.from), &net.location(e.to)) <= radius
}

fn travel_time(length: f64, speed_sum: f64, count: usize, params: &WeightParams) -> f64 {
    if count == 0 {
        length / params.default_speed
    } else {
        length / (speed_sum / count as f64)
    }
}

/// Travel time over `edge` during `window` by a full scan of `traces`.
///
/// Records with non-positive speed carry no travel information and are
/// skipped.
pub fn edge_weight_at(
    net: &SpatialNetwork,
    traces: &HistoricTraces,
    edge: EdgeId,
    window: TimeWindow,
    params: &WeightParams,
) -> f64 {
    let (mut sum, mut count) = (0.0, 0usize);
    for r in traces.records() {
        if r.speed > 0.0 && window.contains(r.t) && near_edge(net, edge, &r.point, params.snap_radius) {
            sum += r.speed;
            count += 1;
        }
    }
    travel_time(net.edge(edge).length, sum, count, params)
}

/// Per-edge, time-sorted trace speeds with prefix sums, answering
/// `edge_weight_at` queries in logarithmic time. Samples of all edges share
/// one array; edge `e` owns `offsets[e]..offsets[e + 1]`.
#[derive(Debug, Clone)]
pub struct EdgeWeightModel {
    lengths: Vec<f64>,
    offsets: Vec<usize>,
    times: Vec<f64>,
    /// Running speed sum, restarting at zero for every edge; entry `i`
    /// covers samples of the edge strictly before `i`.
    prefix: Vec<f64>,
    params: WeightParams,
}

impl EdgeWeightModel {
    pub fn new(net: &SpatialNetwork, traces: &HistoricTraces, params: WeightParams) -> Self {
        let m = net.edge_count();
        let mut samples: Vec<Vec<(f64, f64)>> = vec![Vec::new(); m];
        if m > 0 && !traces.is_empty() {
            let grid = EdgeGrid::build(net, params.snap_radius);
            for r in traces.records() {
                if !(r.speed > 0.0) {
                    continue;
                }
                for &e in grid.candidates(&r.point) {
                    if near_edge(net, e, &r.point, params.snap_radius) {
                        samples[e.index()].push((r.t, r.speed));
                    }
                }
            }
        }
        let total: usize = samples.iter().map(Vec::len).sum();
        let mut offsets = Vec::with_capacity(m + 1);
        let mut times = Vec::with_capacity(total);
        let mut prefix = Vec::with_capacity(total + m);
        offsets.push(0);
        for mut s in samples {
            s.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut acc = 0.0;
            for &(t, v) in &s {
                times.push(t);
                prefix.push(acc);
                acc += v;
            }
            offsets.push(times.len());
            // Sum over all samples of this edge, read through `end`.
            prefix.push(acc);
        }
        Self {
            lengths: net.edges().iter().map(|e| e.length).collect(),
            offsets,
            times,
            prefix,
            params,
        }
    }

    pub fn params(&self) -> &WeightParams {
        &self.params
    }

    pub fn weight(&self, edge: EdgeId, window: TimeWindow) -> f64 {
        let i = edge.index();
        let (a, b) = (self.offsets[i], self.offsets[i + 1]);
        let ts = &self.times[a..b];
        let lo = ts.partition_point(|&t| t < window.start);
        let hi = lo + ts[lo..].partition_point(|&t| t <= window.end);
        if hi == lo {
            return travel_time(self.lengths[i], 0.0, 0, &self.params);
        }
        // Edge `i` has `i` trailing totals before its block in `prefix`.
        let base = a + i;
        let sum = self.prefix[base + hi] - self.prefix[base + lo];
        travel_time(self.lengths[i], sum, hi - lo, &self.params)
    }

    pub fn weights(&self, edges: Arc<[EdgeId]>, window: TimeWindow) -> EdgeWeights {
        let values = edges.iter().map(|&e| self.weight(e, window)).collect();
        EdgeWeights { edges, values }
    }
}

/// Uniform grid of edges, each registered in every cell its
/// radius-expanded bounding box touches.
struct EdgeGrid {
    origin: Point,
    cell: f64,
    cols: usize,
    rows: usize,
    buckets: Vec<Vec<EdgeId>>,
}

impl EdgeGrid {
    fn build(net: &SpatialNetwork, radius: f64) -> Self {
        let (mut minx, mut miny, mut maxx, mut maxy) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        let mut total_len = 0.0;
        for n in net.nodes() {
            minx = minx.min(n.location.x);
            miny = miny.min(n.location.y);
            maxx = maxx.max(n.location.x);
            maxy = maxy.max(n.location.y);
        }
        for e in net.edges() {
            total_len += net.location(e.from).distance(&net.location(e.to));
        }
        minx -= radius;
        miny -= radius;
        maxx += radius;
        maxy += radius;
        let mean_len = total_len / net.edge_count().max(1) as f64;
        let span = (maxx - minx).max(maxy - miny).max(1e-9);
        let cell = mean_len.max(2.0 * radius).max(span / 2048.0).max(1e-9);
        let cols = ((maxx - minx) / cell) as usize + 1;
        let rows = ((maxy - miny) / cell) as usize + 1;
        let mut buckets = vec![Vec::new(); cols * rows];
        for e in net.edges() {
            let (a, b) = (net.location(e.from), net.location(e.to));
            let c0 = (((a.x.min(b.x) - radius - minx) / cell).max(0.0) as usize).min(cols - 1);
            let c1 = (((a.x.max(b.x) + radius - minx) / cell).max(0.0) as usize).min(cols - 1);
            let r0 = (((a.y.min(b.y) - radius - miny) / cell).max(0.0) as usize).min(rows - 1);
            let r1 = (((a.y.max(b.y) + radius - miny) / cell).max(0.0) as usize).min(rows - 1);
            for r in r0..=r1 {
                for c in c0..=c1 {
                    buckets[r * cols + c].push(e.id);
                }
            }
        }
        Self {
            origin: Point::new(minx, miny),
            cell,
            cols,
            rows,
            buckets,
        }
    }

    fn candidates(&self, p: &Point) -> &[EdgeId] {
        let c = ((p.x - self.origin.x) / self.cell).floor();
        let r = ((p.y - self.origin.y) / self.cell).floor();
        if c < 0.0 || r < 0.0 || c as usize >= self.cols || r as usize >= self.rows {
            return &[];
        }
        &self.buckets[r as usize * self.cols + c as usize]
    }
}

/// Weights for a fixed, ordered edge set.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeWeights {
    pub edges: Arc<[EdgeId]>,
    pub values: Vec<f64>,
}

impl EdgeWeights {
    pub fn new(edges: Arc<[EdgeId]>, values: Vec<f64>) -> Self {
        assert_eq!(edges.len(), values.len(), "one weight per edge");
        Self { edges, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (EdgeId, f64)> + '_ {
        self.edges.iter().copied().zip(self.values.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DriftError {
    #[error("weight maps cover different edge sets")]
    EdgeSetMismatch,
}

/// Largest relative per-edge change `|next - prev| / prev`.
pub fn weight_drift(prev: &EdgeWeights, next: &EdgeWeights) -> Result<f64, DriftError> {
    if !Arc::ptr_eq(&prev.edges, &next.edges) && prev.edges != next.edges {
        return Err(DriftError::EdgeSetMismatch);
    }
    Ok(prev
        .values
        .iter()
        .zip(&next.values)
        .map(|(&p, &n)| (n - p).abs() / p)
        .fold(0.0, f64::max))
}
