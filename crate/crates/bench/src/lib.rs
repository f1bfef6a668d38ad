//! Fixtures shared by the benchmarks.

use gapmeet_core::matrix::scenario_pipeline;
use gapmeet_core::pipeline::{prepare, PipelineConfig, Prepared};
use gapmeet_core::synth::{generate, Dataset, ScenarioConfig};
use gapmeet_core::{Point, TrajectoryGap};

/// A scenario small enough to prepare in well under a second.
pub fn small_scenario(objects: usize) -> ScenarioConfig {
    ScenarioConfig {
        nodes: 900,
        extent: 12_000.0,
        objects,
        horizon: 86_400.0,
        trace_vehicles: 6,
        ..ScenarioConfig::default()
    }
}

pub fn prepared(cfg: &ScenarioConfig) -> (Dataset, PipelineConfig, Prepared) {
    let ds = generate(cfg).expect("benchmark scenario generates");
    let pipe = scenario_pipeline(cfg);
    let p = prepare(&ds.network, &ds.traces, &ds.trajectories, &pipe).expect("benchmark scenario prepares");
    (ds, pipe, p)
}

/// Gap whose anchors are `reach` of the travel budget apart.
pub fn gap(reach: f64) -> TrajectoryGap {
    let (ms, duration) = (5.0, 1800.0);
    TrajectoryGap::for_test(Point::new(0.0, 0.0), Point::new(ms * duration * reach, 0.0), 0.0, duration, ms)
}
