//! Detector evaluation on synthetic datasets and parameter sweeps.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::detect::{run_detector, score, DetectParams, DetectorKind, DetectorReport, Score};
use crate::gaps::{GapExtraction, GapId, MsPolicy, PairId};
use crate::network::NodeId;
use crate::pipeline::{prepare, PipelineConfig};
use crate::subnet::SubnetError;
use crate::synth::{generate, object_id, Dataset, ScenarioConfig, SynthError, TruthLabel};

/// Minimum gap duration used when detecting on a scenario: half the
/// shortest staged gap, well above every observed inter-point interval.
pub fn scenario_theta(cfg: &ScenarioConfig) -> f64 {
    0.5 * cfg.emp_range.0
}

/// Pipeline settings matching a scenario.
pub fn scenario_pipeline(cfg: &ScenarioConfig) -> PipelineConfig {
    PipelineConfig {
        theta: scenario_theta(cfg),
        ms_policy: MsPolicy::Global(cfg.detection_ms()),
        detect: DetectParams {
            slices: cfg.slices,
            tau: cfg.tau,
            time_overlap: cfg.to,
            ..DetectParams::default()
        },
        ..PipelineConfig::default()
    }
}

/// Maps truth labels, keyed by object indices, onto the gap ids of an
/// extraction. Objects without exactly one gap are skipped.
pub fn resolve_truth(
    ds_truth: &[TruthLabel],
    extraction: &GapExtraction,
    node_of: impl Fn(i64) -> Option<NodeId>,
) -> BTreeSet<(PairId, NodeId)> {
    let mut by_object: HashMap<&str, Vec<GapId>> = HashMap::new();
    for g in &extraction.gaps {
        by_object.entry(&g.object_id).or_default().push(g.id);
    }
    let single = |index: GapId| -> Option<GapId> {
        match by_object.get(object_id(index.0 as usize).as_str()).map(Vec::as_slice) {
            Some([g]) => Some(*g),
            _ => None,
        }
    };
    ds_truth
        .iter()
        .filter(|l| l.positive)
        .filter_map(|l| {
            let (a, b) = (single(l.pair.0)?, single(l.pair.1)?);
            let pair = PairId(a.min(b), a.max(b));
            Some((pair, node_of(l.node?)?))
        })
        .collect()
}

/// All detectors run on one dataset.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub pairs: usize,
    pub study_nodes: usize,
    pub truth: BTreeSet<(PairId, NodeId)>,
    /// Every `(pair, node)` the loosest detector bounds.
    pub universe: BTreeSet<(PairId, NodeId)>,
    pub reports: Vec<DetectorReport>,
}

impl Evaluation {
    pub fn report(&self, kind: DetectorKind) -> Option<&DetectorReport> {
        self.reports.iter().find(|r| r.detector == kind)
    }

    pub fn score(&self, kind: DetectorKind) -> Option<Score> {
        Some(score(&self.report(kind)?.predicted(), &self.truth, &self.universe))
    }

    pub fn npe(&self, kind: DetectorKind) -> Option<f64> {
        let r = self.report(kind)?;
        let pairs = r.pairs.len();
        let bounded = r.bounded_total();
        Some(if pairs == 0 || bounded == 0 {
            f64::INFINITY
        } else {
            self.study_nodes as f64 * pairs as f64 / bounded as f64
        })
    }
}

pub fn evaluate(
    ds: &Dataset,
    cfg: &PipelineConfig,
    detectors: &[DetectorKind],
    jobs: usize,
) -> Result<Evaluation, SubnetError> {
    let prepared = prepare(&ds.network, &ds.traces, &ds.trajectories, cfg)?;
    let truth = resolve_truth(&ds.truth, &prepared.extraction, |n| ds.network.node_by_external(n));
    let universe = prepared
        .contexts
        .iter()
        .flat_map(|c| c.region.iter().map(move |&(n, _)| (c.id(), n)))
        .collect();
    let reports = detectors
        .iter()
        .map(|&k| run_detector(k, &prepared.contexts, &prepared.model, &cfg.detect, jobs))
        .collect();
    Ok(Evaluation {
        pairs: prepared.pairs.len(),
        study_nodes: ds.network.node_count(),
        truth,
        universe,
        reports,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    /// Object count; regenerates data.
    Objects,
    /// Network node count at fixed extent; regenerates data.
    Nodes,
    /// Shortest gap duration `v`, range `[v, 1.5 v]`; regenerates data.
    Emp,
    /// Maximum speed assumed by detection; reuses data.
    Speed,
    /// Time overlap threshold; reuses data.
    To,
}

impl Axis {
    pub const ALL: [Axis; 5] = [Axis::Objects, Axis::Nodes, Axis::Emp, Axis::Speed, Axis::To];

    pub fn name(self) -> &'static str {
        match self {
            Axis::Objects => "objects",
            Axis::Nodes => "nodes",
            Axis::Emp => "emp",
            Axis::Speed => "speed",
            Axis::To => "to",
        }
    }

    /// Sweep values used by the default matrix.
    pub fn default_values(self) -> &'static [f64] {
        match self {
            Axis::Objects => &[1000.0, 2000.0, 4000.0],
            Axis::Nodes => &[1000.0, 2500.0, 5000.0],
            Axis::Emp => &[1800.0, 2700.0, 3600.0],
            Axis::Speed => &[4.0, 5.0, 6.0, 8.0],
            Axis::To => &[300.0, 600.0, 1200.0, 2400.0],
        }
    }

    fn regenerates(self) -> bool {
        matches!(self, Axis::Objects | Axis::Nodes | Axis::Emp)
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Axis::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown axis {s:?}; expected one of objects, nodes, emp, speed, to"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRow {
    pub axis: Axis,
    pub value: f64,
    pub objects: usize,
    pub nodes: usize,
    pub pairs: usize,
    pub truth: usize,
    pub prism_bounded: usize,
    pub prism_npe: f64,
    pub dc_npe: f64,
    pub prism_rendezvous: usize,
    pub tgard_rendezvous: usize,
    pub dc_rendezvous: usize,
    pub prism_precision: f64,
    pub prism_recall: f64,
    pub dc_precision: f64,
    pub dc_recall: f64,
    pub prism_wall_s: f64,
    pub tgard_wall_s: f64,
    pub dc_wall_s: f64,
    pub tgard_slices: u64,
    pub dc_slices: u64,
    pub tgard_sp_runs: u64,
    pub dc_sp_runs: u64,
    pub dc_equals_tgard: bool,
}

fn row(axis: Axis, value: f64, ds: &Dataset, ev: &Evaluation) -> MatrixRow {
    let get = |k| ev.report(k).expect("all detectors run");
    let (p, t, d) = (get(DetectorKind::Prism), get(DetectorKind::Tgard), get(DetectorKind::DcTgard));
    let sp = ev.score(DetectorKind::Prism).expect("prism ran");
    let sd = ev.score(DetectorKind::DcTgard).expect("dc ran");
    MatrixRow {
        axis,
        value,
        objects: ds.config.objects,
        nodes: ds.network.node_count(),
        pairs: ev.pairs,
        truth: ev.truth.len(),
        prism_bounded: p.bounded_total(),
        prism_npe: ev.npe(DetectorKind::Prism).expect("prism ran"),
        dc_npe: ev.npe(DetectorKind::DcTgard).expect("dc ran"),
        prism_rendezvous: p.rendezvous_count(),
        tgard_rendezvous: t.rendezvous_count(),
        dc_rendezvous: d.rendezvous_count(),
        prism_precision: sp.precision,
        prism_recall: sp.recall,
        dc_precision: sd.precision,
        dc_recall: sd.recall,
        prism_wall_s: p.wall_time_s,
        tgard_wall_s: t.wall_time_s,
        dc_wall_s: d.wall_time_s,
        tgard_slices: t.counters.slices_processed,
        dc_slices: d.counters.slices_processed,
        tgard_sp_runs: t.counters.shortest_path_runs,
        dc_sp_runs: d.counters.shortest_path_runs,
        dc_equals_tgard: t.predicted() == d.predicted(),
    }
}

#[derive(Debug, thiserror::Error)]
pub enum MatrixError {
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Subnet(#[from] SubnetError),
}

/// Scenario for one value along `axis`.
pub fn cell_config(base: &ScenarioConfig, axis: Axis, value: f64) -> ScenarioConfig {
    let mut cfg = base.clone();
    match axis {
        Axis::Objects => cfg.objects = value as usize,
        Axis::Nodes => cfg.nodes = value as usize,
        Axis::Emp => cfg.emp_range = (value, 1.5 * value),
        Axis::Speed | Axis::To => {}
    }
    cfg
}

/// Runs all three detectors for each value of `axis`. Axes that vary the
/// data regenerate a scenario per value; the others reuse the base
/// scenario and vary detection only.
pub fn run_matrix(base: &ScenarioConfig, axis: Axis, values: &[f64], jobs: usize) -> Result<Vec<MatrixRow>, MatrixError> {
    let shared = if axis.regenerates() { None } else { Some(generate(base)?) };
    let mut rows = Vec::with_capacity(values.len());
    for &v in values {
        let owned;
        let ds = match &shared {
            Some(ds) => ds,
            None => {
                owned = generate(&cell_config(base, axis, v))?;
                &owned
            }
        };
        let mut pipe = scenario_pipeline(&ds.config);
        match axis {
            Axis::Speed => pipe.ms_policy = MsPolicy::Global(v),
            Axis::To => pipe.detect.time_overlap = v,
            _ => {}
        }
        let ev = evaluate(ds, &pipe, &DetectorKind::ALL, jobs)?;
        log::info!("{axis}={v}: {} pairs", ev.pairs);
        rows.push(row(axis, v, ds, &ev));
    }
    Ok(rows)
}

pub fn write_matrix_csv(rows: &[MatrixRow], out: impl Write) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
