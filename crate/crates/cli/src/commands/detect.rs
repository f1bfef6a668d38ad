use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use gapmeet_core::detect::{metrics_json, rendezvous_geojson, run_detector};
use gapmeet_core::gaps::load_trajectories_from_path;
use gapmeet_core::network::{load_network_from_paths, load_traces_from_path, CoordinateMode};
use gapmeet_core::pipeline::{prepare, PipelineConfig};
use gapmeet_core::DetectorKind;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{invalid, OrInvalid};
use crate::params::{absolute, jobs, DetectionArgs};
use crate::run::{self, input, output_dir, write_json};

pub const GEOJSON_FILE: &str = "rendezvous.geojson";
pub const METRICS_FILE: &str = "metrics.json";

#[derive(Args, Debug)]
pub struct DetectArgs {
    /// Nodes CSV: node_id,x,y (or node_id,lon,lat with --geodetic)
    #[arg(long, required_unless_present = "from_run")]
    pub network_nodes: Option<PathBuf>,
    /// Edges CSV: from_id,to_id,length_m[,oneway]
    #[arg(long, required_unless_present = "from_run")]
    pub network_edges: Option<PathBuf>,
    /// Trajectories CSV: object_id,t_unix_s,x,y
    #[arg(long, required_unless_present = "from_run")]
    pub trajectories: Option<PathBuf>,
    /// Historic traces CSV: object_id,t_unix_s,x,y,speed_mps
    #[arg(long, required_unless_present = "from_run")]
    pub traces: Option<PathBuf>,
    /// Coordinates are longitude/latitude degrees
    #[arg(long)]
    pub geodetic: bool,
    /// prism, tgard or dc-tgard [default: dc-tgard]
    #[arg(long)]
    pub detector: Option<DetectorKind>,
    #[command(flatten)]
    pub detection: DetectionArgs,
    /// Recorded in run.json; detection itself is deterministic
    #[arg(long)]
    pub seed: Option<u64>,
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
pub struct DetectRun {
    pub network_nodes: PathBuf,
    pub network_edges: PathBuf,
    pub trajectories: PathBuf,
    pub traces: PathBuf,
    pub geodetic: bool,
    pub detector: DetectorKind,
    pub pipeline: PipelineConfig,
    pub seed: u64,
    pub jobs: usize,
    pub out: PathBuf,
}

fn resolve(a: DetectArgs) -> Result<DetectRun> {
    if let Some(path) = &a.from_run {
        let overridden = a.network_nodes.is_some()
            || a.network_edges.is_some()
            || a.trajectories.is_some()
            || a.traces.is_some()
            || a.geodetic
            || a.detector.is_some()
            || a.seed.is_some()
            || !a.detection.is_empty();
        if overridden {
            return Err(invalid("--from-run only combines with --out and --jobs"));
        }
        let mut cfg: DetectRun = run::load(path, "detect")?;
        if let Some(out) = &a.out {
            cfg.out = absolute(out)?;
        }
        if a.jobs.is_some() {
            cfg.jobs = jobs(a.jobs)?;
        }
        return Ok(cfg);
    }
    let need = |p: &Option<PathBuf>| input(p.as_deref().expect("required by clap"));
    Ok(DetectRun {
        network_nodes: need(&a.network_nodes)?,
        network_edges: need(&a.network_edges)?,
        trajectories: need(&a.trajectories)?,
        traces: need(&a.traces)?,
        geodetic: a.geodetic,
        detector: a.detector.unwrap_or(DetectorKind::DcTgard),
        pipeline: a.detection.apply(PipelineConfig::default())?,
        seed: a.seed.unwrap_or(0),
        jobs: jobs(a.jobs)?,
        out: absolute(a.out.as_deref().expect("required by clap"))?,
    })
}

pub fn run(args: DetectArgs) -> Result<()> {
    let cfg = resolve(args)?;
    crate::params::validate(&cfg.pipeline)?;
    let mode = if cfg.geodetic { CoordinateMode::Geodetic } else { CoordinateMode::Planar };
    let net = load_network_from_paths(&cfg.network_nodes, &cfg.network_edges, mode).or_invalid()?;
    let projection = net.projection();
    let trajectories = load_trajectories_from_path(&cfg.trajectories, projection).or_invalid()?;
    let traces = load_traces_from_path(&cfg.traces, projection).or_invalid()?;
    log::info!(
        "{} nodes, {} objects, {} trace records",
        net.node_count(),
        trajectories.len(),
        traces.len()
    );
    let prepared = prepare(&net, &traces, &trajectories, &cfg.pipeline).or_invalid()?;
    let report = run_detector(cfg.detector, &prepared.contexts, &prepared.model, &cfg.pipeline.detect, cfg.jobs);

    let out = output_dir(&cfg.out)?;
    write_json(&out.join(GEOJSON_FILE), &rendezvous_geojson(&net, &report))?;
    let mut metrics = metrics_json(&net, &report);
    metrics["gaps"] = json!(prepared.extraction.gaps.len());
    metrics["infeasible_gaps_dropped"] = json!(prepared.extraction.infeasible_dropped);
    write_json(&out.join(METRICS_FILE), &metrics)?;
    run::save(&out, "detect", &cfg)?;
    println!(
        "{}: {} gaps, {} pairs, {} rendezvous nodes -> {}",
        cfg.detector,
        prepared.extraction.gaps.len(),
        report.pairs.len(),
        report.rendezvous_count(),
        out.display()
    );
    Ok(())
}
