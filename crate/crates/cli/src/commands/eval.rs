use std::fmt;
use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{Context, Result};
use clap::Args;
use gapmeet_core::gaps::load_trajectories;
use gapmeet_core::matrix::{evaluate, scenario_pipeline, Evaluation};
use gapmeet_core::network::{load_network, load_traces, CoordinateMode};
use gapmeet_core::pipeline::PipelineConfig;
use gapmeet_core::synth::{
    read_truth_csv, Dataset, ScenarioConfig, EDGES_FILE, NODES_FILE, SCENARIO_FILE, TRACES_FILE, TRAJECTORIES_FILE,
    TRUTH_FILE,
};
use gapmeet_core::{DetectorKind, MsPolicy};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{invalid, OrInvalid};
use crate::params::{absolute, jobs, validate, DetectionArgs};
use crate::run::{self, input, output_dir, write_json};

pub const RESULTS_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.json";

/// Detection parameter varied over one dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalAxis {
    To,
    Speed,
    Slices,
    Tau,
    Theta,
}

impl EvalAxis {
    fn name(self) -> &'static str {
        match self {
            EvalAxis::To => "to",
            EvalAxis::Speed => "speed",
            EvalAxis::Slices => "slices",
            EvalAxis::Tau => "tau",
            EvalAxis::Theta => "theta",
        }
    }

    fn apply(self, mut p: PipelineConfig, v: f64) -> PipelineConfig {
        match self {
            EvalAxis::To => p.detect.time_overlap = v,
            EvalAxis::Speed => p.ms_policy = MsPolicy::Global(v),
            EvalAxis::Slices => p.detect.slices = v as usize,
            EvalAxis::Tau => p.detect.tau = v,
            EvalAxis::Theta => p.theta = v,
        }
        p
    }
}

impl fmt::Display for EvalAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EvalAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [EvalAxis::To, EvalAxis::Speed, EvalAxis::Slices, EvalAxis::Tau, EvalAxis::Theta]
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown axis {s:?}; expected to, speed, slices, tau or theta"))
    }
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Dataset directory as written by `synth`
    #[arg(long, required_unless_present = "from_run")]
    pub dataset: Option<PathBuf>,
    /// Detectors to run, comma separated [default: all three]
    #[arg(long, value_delimiter = ',')]
    pub detector: Vec<DetectorKind>,
    /// Detection thresholds; defaults come from the dataset's scenario.json
    #[command(flatten)]
    pub detection: DetectionArgs,
    /// Parameter to vary: to, speed, slices, tau or theta
    #[arg(long, requires = "values")]
    pub axis: Option<EvalAxis>,
    /// Comma-separated values for --axis
    #[arg(long, value_delimiter = ',', requires = "axis")]
    pub values: Vec<f64>,
    /// Output directory
    #[arg(long, required_unless_present = "from_run")]
    pub out: Option<PathBuf>,
    /// Worker threads; results do not depend on it
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Repeat the run recorded in this run.json (--out and --jobs may override)
    #[arg(long)]
    pub from_run: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalRun {
    pub dataset: PathBuf,
    pub detectors: Vec<DetectorKind>,
    pub pipeline: PipelineConfig,
    pub axis: Option<EvalAxis>,
    pub values: Vec<f64>,
    pub jobs: usize,
    pub out: PathBuf,
}

fn scenario_of(dir: &Path) -> Result<Option<ScenarioConfig>> {
    let path = dir.join(SCENARIO_FILE);
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let cfg = serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    Ok(Some(cfg))
}

fn resolve(a: EvalArgs) -> Result<EvalRun> {
    if let Some(path) = &a.from_run {
        if a.dataset.is_some() || !a.detector.is_empty() || a.axis.is_some() || !a.detection.is_empty() {
            return Err(invalid("--from-run only combines with --out and --jobs"));
        }
        let mut cfg: EvalRun = run::load(path, "eval")?;
        if let Some(out) = &a.out {
            cfg.out = absolute(out)?;
        }
        if a.jobs.is_some() {
            cfg.jobs = jobs(a.jobs)?;
        }
        return Ok(cfg);
    }
    let dataset = input(a.dataset.as_deref().expect("required by clap"))?;
    let base = match scenario_of(&dataset)? {
        Some(s) => scenario_pipeline(&s),
        None => PipelineConfig::default(),
    };
    let mut detectors = if a.detector.is_empty() { DetectorKind::ALL.to_vec() } else { a.detector };
    detectors.sort();
    detectors.dedup();
    Ok(EvalRun {
        dataset,
        detectors,
        pipeline: a.detection.apply(base)?,
        axis: a.axis,
        values: a.values,
        jobs: jobs(a.jobs)?,
        out: absolute(a.out.as_deref().expect("required by clap"))?,
    })
}

fn load_dataset(dir: &Path) -> Result<Dataset> {
    let truth_path = dir.join(TRUTH_FILE);
    if !truth_path.exists() {
        return Err(invalid(format!("{}: truth labels not found", truth_path.display())));
    }
    let open = |name: &str| -> Result<(File, String)> {
        let p = input(&dir.join(name))?;
        let f = File::open(&p).map_err(|e| invalid(format!("{}: {e}", p.display())))?;
        Ok((f, p.display().to_string()))
    };
    let (nodes, nodes_name) = open(NODES_FILE)?;
    let (edges, edges_name) = open(EDGES_FILE)?;
    let network = load_network(nodes, &nodes_name, edges, &edges_name, CoordinateMode::Planar).or_invalid()?;
    let (f, name) = open(TRAJECTORIES_FILE)?;
    let trajectories = load_trajectories(f, &name, None).or_invalid()?;
    let (f, name) = open(TRACES_FILE)?;
    let traces = load_traces(f, &name, None).or_invalid()?;
    let truth = read_truth_csv(&truth_path).or_invalid()?;
    Ok(Dataset {
        config: scenario_of(dir)?.unwrap_or_default(),
        network,
        trajectories,
        traces,
        truth,
        staged: Vec::new(),
    })
}

#[derive(Debug, Serialize)]
struct ResultRow {
    axis: &'static str,
    value: Option<f64>,
    detector: DetectorKind,
    pairs: usize,
    truth: usize,
    rendezvous: usize,
    bounded: usize,
    npe: f64,
    precision: f64,
    recall: f64,
    accuracy: f64,
    slices_processed: u64,
    shortest_path_runs: u64,
    reuse_hits: u64,
    wall_time_s: f64,
}

const RESULT_HEADER: [&str; 15] = [
    "axis",
    "value",
    "detector",
    "pairs",
    "truth",
    "rendezvous",
    "bounded",
    "npe",
    "precision",
    "recall",
    "accuracy",
    "slices_processed",
    "shortest_path_runs",
    "reuse_hits",
    "wall_time_s",
];

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

/// Result rows and the summary entry for one evaluated cell.
fn cell(axis: Option<EvalAxis>, value: Option<f64>, ev: &Evaluation) -> (Vec<ResultRow>, Value) {
    let mut rows = Vec::new();
    let mut per_detector = Map::new();
    for r in &ev.reports {
        let k = r.detector;
        let s = ev.score(k).expect("detector ran");
        let npe = ev.npe(k).expect("detector ran");
        let row = ResultRow {
            axis: axis.map_or("base", EvalAxis::name),
            value,
            detector: k,
            pairs: ev.pairs,
            truth: ev.truth.len(),
            rendezvous: r.rendezvous_count(),
            bounded: r.bounded_total(),
            npe,
            precision: s.precision,
            recall: s.recall,
            accuracy: s.accuracy,
            slices_processed: r.counters.slices_processed,
            shortest_path_runs: r.counters.shortest_path_runs,
            reuse_hits: r.counters.reuse_hits,
            wall_time_s: r.wall_time_s,
        };
        per_detector.insert(
            k.name().to_string(),
            json!({
                "rendezvous": row.rendezvous,
                "bounded": row.bounded,
                "npe": finite_or_null(npe),
                "precision": s.precision,
                "recall": s.recall,
                "accuracy": s.accuracy,
                "slices_processed": row.slices_processed,
                "shortest_path_runs": row.shortest_path_runs,
                "wall_time_s": row.wall_time_s,
            }),
        );
        rows.push(row);
    }
    let t = ev.report(DetectorKind::Tgard);
    let d = ev.report(DetectorKind::DcTgard);
    let (same, fewer) = match (t, d) {
        (Some(t), Some(d)) => (
            json!(t.predicted() == d.predicted()),
            json!(d.counters.slices_processed <= t.counters.slices_processed),
        ),
        _ => (Value::Null, Value::Null),
    };
    let summary = json!({
        "axis": axis.map(EvalAxis::name),
        "value": value,
        "pairs": ev.pairs,
        "truth": ev.truth.len(),
        "detectors": per_detector,
        "dc_equals_tgard": same,
        "dc_slices_le_tgard": fewer,
    });
    if ev.pairs == 0 {
        rows.clear();
    }
    (rows, summary)
}

pub fn run(args: EvalArgs) -> Result<()> {
    let cfg = resolve(args)?;
    validate(&cfg.pipeline)?;
    let ds = load_dataset(&cfg.dataset)?;
    let cells: Vec<(Option<f64>, PipelineConfig)> = match cfg.axis {
        Some(axis) => cfg.values.iter().map(|&v| (Some(v), axis.apply(cfg.pipeline, v))).collect(),
        None => vec![(None, cfg.pipeline)],
    };
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for (value, pipe) in &cells {
        validate(pipe)?;
        let ev = evaluate(&ds, pipe, &cfg.detectors, cfg.jobs).or_invalid()?;
        log::info!("{:?}={:?}: {} pairs", cfg.axis, value, ev.pairs);
        let (r, s) = cell(cfg.axis, *value, &ev);
        rows.extend(r);
        summaries.push(s);
    }

    let out = output_dir(&cfg.out)?;
    let path = out.join(RESULTS_FILE);
    let file = File::create(&path).with_context(|| format!("writing {}", path.display()))?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    w.write_record(RESULT_HEADER)?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    write_json(&out.join(SUMMARY_FILE), &json!({ "dataset": cfg.dataset, "cells": summaries }))?;
    run::save(&out, "eval", &cfg)?;
    println!("{} result rows over {} cells -> {}", rows.len(), cells.len(), out.display());
    Ok(())
}
