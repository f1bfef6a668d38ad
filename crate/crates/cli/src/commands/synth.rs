use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use gapmeet_core::synth::{generate, write_dataset, ScenarioConfig, SynthError};
use serde::{Deserialize, Serialize};

use crate::error::invalid;
use crate::params::{absolute, ScenarioArgs};
use crate::run;

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Dataset directory; must not exist
    #[arg(long, required_unless_present = "from_run")]
    pub out: Option<PathBuf>,
    /// Repeat the run recorded in this run.json (--out may override)
    #[arg(long)]
    pub from_run: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthRun {
    pub scenario: ScenarioConfig,
    pub out: PathBuf,
}

/// Synth errors caused by the configuration or the target directory.
pub fn classify(e: SynthError) -> anyhow::Error {
    match e {
        SynthError::Io { .. } => e.into(),
        other => invalid(other.to_string()),
    }
}

pub fn run(a: SynthArgs) -> Result<()> {
    let cfg = match &a.from_run {
        Some(path) => {
            if !a.scenario.is_empty() {
                return Err(invalid("--from-run only combines with --out"));
            }
            let mut cfg: SynthRun = run::load(path, "synth")?;
            if let Some(out) = &a.out {
                cfg.out = absolute(out)?;
            }
            cfg
        }
        None => SynthRun {
            scenario: a.scenario.resolve()?,
            out: absolute(a.out.as_deref().expect("required by clap"))?,
        },
    };
    if cfg.out.exists() {
        return Err(invalid(format!("output directory {} already exists", cfg.out.display())));
    }
    let ds = generate(&cfg.scenario).map_err(classify)?;
    write_dataset(&ds, &cfg.out).map_err(classify)?;
    run::save(&cfg.out, "synth", &cfg)?;
    println!(
        "{} nodes, {} objects, {} staged meets -> {}",
        ds.network.node_count(),
        ds.trajectories.len(),
        ds.staged.len(),
        cfg.out.display()
    );
    Ok(())
}
