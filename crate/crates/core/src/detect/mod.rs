//! Rendezvous detectors and quality metrics.

mod dc;
mod output;
mod prism;
mod tgard;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::gaps::PairId;
use crate::geometry::DEFAULT_POLYGON_RESOLUTION;
use crate::network::{EdgeWeightModel, NodeId, SpatialNetwork, TimeWindow};
use crate::reach::AvailabilityInterval;
use crate::subnet::{PairSamples, DEFAULT_SLICES};

pub use dc::dc_tgard;
pub use output::{metrics_json, rendezvous_geojson};
pub use prism::prism;
pub use tgard::tgard;

pub const DEFAULT_TAU: f64 = 0.25;
pub const DEFAULT_TIME_OVERLAP: f64 = 1800.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DetectorKind {
    #[serde(rename = "prism")]
    Prism,
    #[serde(rename = "tgard")]
    Tgard,
    #[serde(rename = "dc-tgard")]
    DcTgard,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 3] = [DetectorKind::Prism, DetectorKind::Tgard, DetectorKind::DcTgard];

    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::Prism => "prism",
            DetectorKind::Tgard => "tgard",
            DetectorKind::DcTgard => "dc-tgard",
        }
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DetectorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "prism" => Ok(DetectorKind::Prism),
            "tgard" => Ok(DetectorKind::Tgard),
            "dc-tgard" | "dc" => Ok(DetectorKind::DcTgard),
            _ => Err(format!("unknown detector {s:?} (expected prism, tgard or dc-tgard)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectParams {
    /// Slice count K; slices run `0..=K`.
    pub slices: usize,
    /// Drift threshold for reusing shortest-path results.
    #[serde(with = "crate::float_serde")]
    pub tau: f64,
    /// Minimum overlap of the two availability intervals, seconds.
    pub time_overlap: f64,
    pub resolution: usize,
}

impl Default for DetectParams {
    fn default() -> Self {
        Self {
            slices: DEFAULT_SLICES,
            tau: DEFAULT_TAU,
            time_overlap: DEFAULT_TIME_OVERLAP,
            resolution: DEFAULT_POLYGON_RESOLUTION,
        }
    }
}

/// A node where both objects could have been present long enough.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RendezvousNode {
    pub node: NodeId,
    pub pair: PairId,
    pub alpha_i: AvailabilityInterval,
    pub alpha_j: AvailabilityInterval,
    pub overlap: TimeWindow,
    pub qualifying_slices: BTreeSet<usize>,
}

impl RendezvousNode {
    pub fn overlap_s(&self) -> f64 {
        self.overlap.end - self.overlap.start
    }
}

/// Admits `node` when both intervals exist and overlap by at least `to`.
pub(crate) fn qualify(
    pair: PairId,
    node: NodeId,
    a: Option<AvailabilityInterval>,
    b: Option<AvailabilityInterval>,
    to: f64,
) -> Option<RendezvousNode> {
    let (a, b) = (a?, b?);
    let overlap = a.overlap(&b)?;
    (overlap.end - overlap.start >= to).then(|| RendezvousNode {
        node,
        pair,
        alpha_i: a,
        alpha_j: b,
        overlap,
        qualifying_slices: BTreeSet::new(),
    })
}

/// Operation counters of a detector run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub pairs: u64,
    pub slices_processed: u64,
    pub lens_tests: u64,
    /// Availability computations (each one forward and one reverse search).
    pub shortest_path_runs: u64,
    pub reuse_hits: u64,
    /// Per-node membership checks against a slice's lenses.
    pub node_checks: u64,
    /// Pairs skipped because a gap anchor could not be snapped.
    pub snap_failures: u64,
}

impl Counters {
    pub fn add(&mut self, o: &Counters) {
        self.pairs += o.pairs;
        self.slices_processed += o.slices_processed;
        self.lens_tests += o.lens_tests;
        self.shortest_path_runs += o.shortest_path_runs;
        self.reuse_hits += o.reuse_hits;
        self.node_checks += o.node_checks;
        self.snap_failures += o.snap_failures;
    }
}

/// Result of one detector on one pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairDetection {
    pub pair: PairId,
    /// Admitted nodes, ascending by node id.
    pub nodes: Vec<RendezvousNode>,
    /// Nodes the detector bounds the rendezvous to: the whole pair region
    /// for the prism, the admitted nodes for the slicing detectors.
    pub bounded: usize,
    pub counters: Counters,
    /// Largest lens-intersection area seen, when tracked.
    pub peak_overlap_area: Option<f64>,
}

impl PairDetection {
    pub(crate) fn empty(pair: PairId) -> Self {
        Self {
            pair,
            nodes: Vec::new(),
            bounded: 0,
            counters: Counters { pairs: 1, ..Counters::default() },
            peak_overlap_area: None,
        }
    }

    pub fn node_set(&self) -> BTreeSet<NodeId> {
        self.nodes.iter().map(|n| n.node).collect()
    }
}

pub fn detect_pair(
    kind: DetectorKind,
    ctx: &PairSamples,
    model: &EdgeWeightModel,
    params: &DetectParams,
) -> PairDetection {
    match kind {
        DetectorKind::Prism => prism(ctx, model, params),
        DetectorKind::Tgard => tgard(ctx, model, params),
        DetectorKind::DcTgard => dc_tgard(ctx, model, params),
    }
}

/// Results of one detector over many pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorReport {
    pub detector: DetectorKind,
    pub pairs: BTreeMap<PairId, PairDetection>,
    pub counters: Counters,
    /// Summed per-pair detection time, seconds.
    pub wall_time_s: f64,
}

impl DetectorReport {
    pub fn from_pairs(detector: DetectorKind, results: Vec<(PairDetection, f64)>) -> Self {
        let mut counters = Counters::default();
        let mut wall = 0.0;
        let mut pairs = BTreeMap::new();
        for (r, t) in results {
            counters.add(&r.counters);
            wall += t;
            pairs.insert(r.pair, r);
        }
        Self {
            detector,
            pairs,
            counters,
            wall_time_s: wall,
        }
    }

    pub fn rendezvous(&self) -> impl Iterator<Item = &RendezvousNode> {
        self.pairs.values().flat_map(|p| p.nodes.iter())
    }

    pub fn rendezvous_count(&self) -> usize {
        self.pairs.values().map(|p| p.nodes.len()).sum()
    }

    pub fn bounded_total(&self) -> usize {
        self.pairs.values().map(|p| p.bounded).sum()
    }

    /// `(pair, node)` decisions made by this detector.
    pub fn predicted(&self) -> BTreeSet<(PairId, NodeId)> {
        self.rendezvous().map(|n| (n.pair, n.node)).collect()
    }
}

/// Runs `kind` on every pair, timing each pair's detection. `jobs > 1`
/// spreads pairs over a thread pool; results are merged by pair id.
pub fn run_detector(
    kind: DetectorKind,
    contexts: &[PairSamples],
    model: &EdgeWeightModel,
    params: &DetectParams,
    jobs: usize,
) -> DetectorReport {
    let one = |ctx: &PairSamples| {
        let start = Instant::now();
        let r = detect_pair(kind, ctx, model, params);
        (r, start.elapsed().as_secs_f64())
    };
    let results: Vec<(PairDetection, f64)> = if jobs > 1 {
        match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            Ok(pool) => pool.install(|| contexts.par_iter().map(one).collect()),
            Err(_) => contexts.iter().map(one).collect(),
        }
    } else {
        contexts.iter().map(one).collect()
    };
    DetectorReport::from_pairs(kind, results)
}

/// Node pruning efficiency `total / bounded`; infinite when nothing is
/// bounded.
pub fn npe(total_study_nodes: usize, bounded_nodes: usize) -> f64 {
    if bounded_nodes == 0 {
        f64::INFINITY
    } else {
        total_study_nodes as f64 / bounded_nodes as f64
    }
}

/// NPE over many pairs: study nodes divided by the mean bounded count per
/// pair.
pub fn report_npe(net: &SpatialNetwork, report: &DetectorReport) -> f64 {
    let pairs = report.pairs.len();
    if pairs == 0 {
        return f64::INFINITY;
    }
    let bounded = report.bounded_total();
    if bounded == 0 {
        return f64::INFINITY;
    }
    net.node_count() as f64 * pairs as f64 / bounded as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub true_negatives: usize,
}

/// Confusion-matrix ratios over `(pair, node)` decisions. `universe` holds
/// every decision considered; it is widened to include both sets.
pub fn score<T: Ord + Clone>(predicted: &BTreeSet<T>, truth: &BTreeSet<T>, universe: &BTreeSet<T>) -> Score {
    let tp = predicted.intersection(truth).count();
    let fp = predicted.len() - tp;
    let fn_ = truth.len() - tp;
    let all: BTreeSet<&T> = universe.iter().chain(predicted).chain(truth).collect();
    let tn = all.len() - tp - fp - fn_;
    let ratio = |num: usize, den: usize| if den == 0 { 1.0 } else { num as f64 / den as f64 };
    Score {
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fn_),
        accuracy: ratio(tp + tn, all.len()),
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
        true_negatives: tn,
    }
}
