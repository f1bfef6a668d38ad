use std::fs::File;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use gapmeet_core::gaps::load_trajectories_from_path;
use gapmeet_core::network::{load_network_from_paths, CoordinateMode};
use gapmeet_core::pipeline::PipelineConfig;
use gapmeet_core::{extract_gaps, pair_gaps, GapPair, TrajectoryGap};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, OrInvalid};
use crate::params::{absolute, DetectionArgs};
use crate::run::{self, input, output_dir};

pub const GAPS_FILE: &str = "gaps.csv";
pub const PAIRS_FILE: &str = "pairs.csv";

#[derive(Args, Debug)]
pub struct PairArgs {
    /// Trajectories CSV: object_id,t_unix_s,x,y
    #[arg(long, required_unless_present = "from_run")]
    pub trajectories: Option<PathBuf>,
    /// Coordinates are longitude/latitude; the network supplies the projection
    #[arg(long, requires_all = ["network_nodes", "network_edges"])]
    pub geodetic: bool,
    /// Nodes CSV used to project --geodetic coordinates
    #[arg(long, requires = "geodetic")]
    pub network_nodes: Option<PathBuf>,
    /// Edges CSV used to project --geodetic coordinates
    #[arg(long, requires = "geodetic")]
    pub network_edges: Option<PathBuf>,
    #[command(flatten)]
    pub detection: DetectionArgs,
    /// Output directory
    #[arg(long, required_unless_present = "from_run")]
    pub out: Option<PathBuf>,
    /// Repeat the run recorded in this run.json (--out may override)
    #[arg(long)]
    pub from_run: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairRun {
    pub trajectories: PathBuf,
    /// Nodes and edges files, used only for the geodetic projection.
    pub network: Option<(PathBuf, PathBuf)>,
    pub pipeline: PipelineConfig,
    pub out: PathBuf,
}

fn resolve(a: PairArgs) -> Result<PairRun> {
    if let Some(path) = &a.from_run {
        if a.trajectories.is_some() || a.geodetic || a.network_nodes.is_some() || a.network_edges.is_some() || !a.detection.is_empty() {
            return Err(invalid("--from-run only combines with --out"));
        }
        let mut cfg: PairRun = run::load(path, "pair")?;
        if let Some(out) = &a.out {
            cfg.out = absolute(out)?;
        }
        return Ok(cfg);
    }
    let network = match (a.geodetic, &a.network_nodes, &a.network_edges) {
        (true, Some(n), Some(e)) => Some((input(n)?, input(e)?)),
        _ => None,
    };
    Ok(PairRun {
        trajectories: input(a.trajectories.as_deref().expect("required by clap"))?,
        network,
        pipeline: a.detection.apply(PipelineConfig::default())?,
        out: absolute(a.out.as_deref().expect("required by clap"))?,
    })
}

#[derive(Serialize)]
struct GapRow<'a> {
    gap_id: u32,
    object_id: &'a str,
    t_s: f64,
    t_e: f64,
    start_x: f64,
    start_y: f64,
    end_x: f64,
    end_y: f64,
    ms: f64,
}

#[derive(Serialize)]
struct PairRow<'a> {
    pair_id: String,
    first_gap: u32,
    second_gap: u32,
    first_object: &'a str,
    second_object: &'a str,
    overlap_start: f64,
    overlap_end: f64,
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>, header: &[&str]) -> Result<()> {
    let file = File::create(path).with_context(|| format!("writing {}", path.display()))?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn gap_row(g: &TrajectoryGap) -> GapRow<'_> {
    GapRow {
        gap_id: g.id.0,
        object_id: &g.object_id,
        t_s: g.t_s,
        t_e: g.t_e,
        start_x: g.start_anchor.x,
        start_y: g.start_anchor.y,
        end_x: g.end_anchor.x,
        end_y: g.end_anchor.y,
        ms: g.ms,
    }
}

fn pair_row(p: &GapPair) -> PairRow<'_> {
    PairRow {
        pair_id: p.id().to_string(),
        first_gap: p.first.id.0,
        second_gap: p.second.id.0,
        first_object: &p.first.object_id,
        second_object: &p.second.object_id,
        overlap_start: p.overlap.start,
        overlap_end: p.overlap.end,
    }
}

pub fn run(args: PairArgs) -> Result<()> {
    let cfg = resolve(args)?;
    crate::params::validate(&cfg.pipeline)?;
    let net = match &cfg.network {
        Some((n, e)) => Some(load_network_from_paths(n, e, CoordinateMode::Geodetic).or_invalid()?),
        None => None,
    };
    let projection = net.as_ref().and_then(|n| n.projection());
    let trajectories = load_trajectories_from_path(&cfg.trajectories, projection).or_invalid()?;
    let extraction = extract_gaps(&trajectories, cfg.pipeline.theta, cfg.pipeline.ms_policy);
    let pairs = pair_gaps(&extraction.gaps, cfg.pipeline.detect.resolution);

    let out = output_dir(&cfg.out)?;
    write_rows(
        &out.join(GAPS_FILE),
        extraction.gaps.iter().map(gap_row),
        &["gap_id", "object_id", "t_s", "t_e", "start_x", "start_y", "end_x", "end_y", "ms"],
    )?;
    write_rows(
        &out.join(PAIRS_FILE),
        pairs.iter().map(pair_row),
        &["pair_id", "first_gap", "second_gap", "first_object", "second_object", "overlap_start", "overlap_end"],
    )?;
    run::save(&out, "pair", &cfg)?;
    println!(
        "{} gaps ({} infeasible dropped), {} pairs -> {}",
        extraction.gaps.len(),
        extraction.infeasible_dropped,
        pairs.len(),
        out.display()
    );
    Ok(())
}
