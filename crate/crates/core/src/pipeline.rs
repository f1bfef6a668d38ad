//! End-to-end preparation: gaps, pairs and per-pair slice contexts.

use serde::{Deserialize, Serialize};

use crate::detect::DetectParams;
use crate::gaps::{extract_gaps, pair_gaps, GapExtraction, GapPair, MsPolicy, Trajectories};
use crate::network::{EdgeWeightModel, HistoricTraces, SpatialNetwork, WeightParams};
use crate::subnet::{build_gap_nets, PairSamples, SubnetError, DEFAULT_ANCHOR_SNAP_RADIUS};

pub const DEFAULT_THETA: f64 = 1800.0;
pub const DEFAULT_MS: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Minimum gap duration, seconds.
    pub theta: f64,
    pub ms_policy: MsPolicy,
    pub detect: DetectParams,
    pub anchor_snap_radius: f64,
    pub weights: WeightParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            theta: DEFAULT_THETA,
            ms_policy: MsPolicy::Global(DEFAULT_MS),
            detect: DetectParams::default(),
            anchor_snap_radius: DEFAULT_ANCHOR_SNAP_RADIUS,
            weights: WeightParams::default(),
        }
    }
}

/// Per-pair slice contexts for `pairs`.
pub fn prepare_pairs(
    net: &SpatialNetwork,
    pairs: &[GapPair],
    slices: usize,
    anchor_snap_radius: f64,
) -> Result<Vec<PairSamples>, SubnetError> {
    if slices < 2 {
        return Err(SubnetError::TooFewSlices(slices));
    }
    let nets = build_gap_nets(net, pairs, anchor_snap_radius);
    pairs.iter().map(|p| PairSamples::prepare(net, p, slices, &nets)).collect()
}

/// Output of the preparation phase.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub extraction: GapExtraction,
    pub pairs: Vec<GapPair>,
    pub contexts: Vec<PairSamples>,
    pub model: EdgeWeightModel,
}

pub fn prepare(
    net: &SpatialNetwork,
    traces: &HistoricTraces,
    trajectories: &Trajectories,
    cfg: &PipelineConfig,
) -> Result<Prepared, SubnetError> {
    let extraction = extract_gaps(trajectories, cfg.theta, cfg.ms_policy);
    let pairs = pair_gaps(&extraction.gaps, cfg.detect.resolution);
    let contexts = prepare_pairs(net, &pairs, cfg.detect.slices, cfg.anchor_snap_radius)?;
    let model = EdgeWeightModel::new(net, traces, cfg.weights);
    Ok(Prepared {
        extraction,
        pairs,
        contexts,
        model,
    })
}
