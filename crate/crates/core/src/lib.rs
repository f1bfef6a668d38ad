//! Detection of possible rendezvous locations of moving objects during
//! trajectory gaps on a spatial network.
//!
//! The pipeline: load a [`network::SpatialNetwork`] and trajectories,
//! extract gaps ([`gaps::extract_gaps`]), pair them ([`gaps::pair_gaps`]),
//! prepare per-pair slices ([`subnet::PairSamples`]) and run one of the
//! detectors in [`detect`].

// Negated comparisons are used on purpose so NaN falls into the reject branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod detect;
mod float_serde;
pub mod gaps;
pub mod geometry;
pub mod network;
pub mod pipeline;
pub mod reach;
pub mod subnet;
pub mod matrix;
pub mod synth;

pub use detect::{
    dc_tgard, npe, prism, score, tgard, DetectParams, DetectorKind, DetectorReport, PairDetection, RendezvousNode,
};
pub use gaps::{extract_gaps, pair_gaps, GapId, GapPair, MsPolicy, PairId, TrajectoryGap};
pub use geometry::{GeoEllipse, Lens, Point};
pub use network::{EdgeWeightModel, HistoricTraces, NodeId, SpatialNetwork, WeightParams};
pub use reach::{AvailabilityInterval, ReachProfile};
pub use subnet::{PairSamples, SubNetworkSample};
pub use synth::{generate, Dataset, ScenarioConfig};
