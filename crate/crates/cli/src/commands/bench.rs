use std::fs::File;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::Args;
use gapmeet_core::matrix::{run_matrix, write_matrix_csv, Axis, MatrixError, MatrixRow};
use gapmeet_core::synth::ScenarioConfig;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::commands::synth::classify;
use crate::error::invalid;
use crate::params::{absolute, jobs, ScenarioArgs};
use crate::run::{self, output_dir, write_json};

pub const MATRIX_FILE: &str = "matrix.csv";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Base scenario; every cell varies one axis from it
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Axes to sweep: objects, nodes, emp, speed, to [default: all]
    #[arg(long, value_delimiter = ',')]
    pub axis: Vec<Axis>,
    /// Comma-separated values; needs exactly one --axis
    #[arg(long, value_delimiter = ',')]
    pub values: Vec<f64>,
    /// Output directory
    #[arg(long, required_unless_present = "from_run")]
    pub out: Option<PathBuf>,
    /// Worker threads. Wall times are only comparable with 1 [default: 1]
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Repeat the run recorded in this run.json (--out and --jobs may override)
    #[arg(long)]
    pub from_run: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchRun {
    pub base: ScenarioConfig,
    pub sweeps: Vec<(Axis, Vec<f64>)>,
    pub jobs: usize,
    pub out: PathBuf,
}

fn resolve(a: BenchArgs) -> Result<BenchRun> {
    if let Some(path) = &a.from_run {
        if !a.scenario.is_empty() || !a.axis.is_empty() || !a.values.is_empty() {
            return Err(invalid("--from-run only combines with --out and --jobs"));
        }
        let mut cfg: BenchRun = run::load(path, "bench")?;
        if let Some(out) = &a.out {
            cfg.out = absolute(out)?;
        }
        if a.jobs.is_some() {
            cfg.jobs = jobs(a.jobs)?;
        }
        return Ok(cfg);
    }
    let axes = if a.axis.is_empty() { Axis::ALL.to_vec() } else { a.axis };
    let sweeps = if a.values.is_empty() {
        axes.into_iter().map(|x| (x, x.default_values().to_vec())).collect()
    } else if axes.len() == 1 {
        vec![(axes[0], a.values)]
    } else {
        return Err(invalid("--values needs exactly one --axis"));
    };
    Ok(BenchRun {
        base: a.scenario.resolve()?,
        sweeps,
        jobs: jobs(Some(a.jobs.unwrap_or(1)))?,
        out: absolute(a.out.as_deref().expect("required by clap"))?,
    })
}

/// Direction checks over the matrix.
fn trends(rows: &[MatrixRow]) -> serde_json::Value {
    let npe_ok = rows.iter().filter(|r| r.dc_npe >= r.prism_npe).count();
    let large: Vec<_> = rows.iter().filter(|r| r.objects >= 1000).collect();
    let faster = large.iter().filter(|r| r.dc_wall_s <= r.tgard_wall_s).count();
    let mut to_rows: Vec<_> = rows.iter().filter(|r| r.axis == Axis::To).collect();
    to_rows.sort_by(|a, b| a.value.total_cmp(&b.value));
    let non_increasing = |f: fn(&MatrixRow) -> usize| to_rows.windows(2).all(|w| f(w[1]) <= f(w[0]));
    json!({
        "cells": rows.len(),
        "dc_npe_ge_prism_npe": { "holds": npe_ok, "of": rows.len() },
        "dc_wall_le_tgard_wall": { "holds": faster, "of": large.len() },
        "rendezvous_non_increasing_in_to": {
            "prism": non_increasing(|r| r.prism_rendezvous),
            "tgard": non_increasing(|r| r.tgard_rendezvous),
            "dc-tgard": non_increasing(|r| r.dc_rendezvous),
        },
        "dc_equals_tgard": rows.iter().all(|r| r.dc_equals_tgard),
    })
}

pub fn run(args: BenchArgs) -> Result<()> {
    let cfg = resolve(args)?;
    let started = Instant::now();
    let mut rows = Vec::new();
    for (axis, values) in &cfg.sweeps {
        let values: Vec<f64> = values.clone();
        for &v in &values {
            let cell = gapmeet_core::matrix::cell_config(&cfg.base, *axis, v);
            cell.validate().map_err(|e| invalid(format!("{axis}={v}: {e}")))?;
        }
        log::info!("sweeping {axis} over {values:?}");
        let swept = run_matrix(&cfg.base, *axis, &values, cfg.jobs).map_err(|e| match e {
            MatrixError::Synth(e) => classify(e),
            MatrixError::Subnet(e) => invalid(e.to_string()),
        })?;
        rows.extend(swept);
    }
    let elapsed = started.elapsed().as_secs_f64();

    let out = output_dir(&cfg.out)?;
    let path = out.join(MATRIX_FILE);
    let file = File::create(&path).with_context(|| format!("writing {}", path.display()))?;
    write_matrix_csv(&rows, file)?;
    let mut summary = trends(&rows);
    summary["total_wall_s"] = json!(elapsed);
    write_json(&out.join(SUMMARY_FILE), &summary)?;
    run::save(&out, "bench", &cfg)?;
    println!("{} cells in {elapsed:.1} s -> {}", rows.len(), out.display());
    Ok(())
}
