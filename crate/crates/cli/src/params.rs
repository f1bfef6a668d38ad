//! Flags shared between subcommands.

use std::path::{Path, PathBuf};

use anyhow::Result;
use clap::Args;
use gapmeet_core::pipeline::PipelineConfig;
use gapmeet_core::synth::{NetworkKind, ScenarioConfig, TrafficMode};
use gapmeet_core::MsPolicy;

use crate::error::invalid;

/// Detection thresholds. Unset flags keep the base configuration.
#[derive(Args, Debug, Clone, Default)]
pub struct DetectionArgs {
    /// Minimum gap duration, seconds [default: 1800]
    #[arg(long = "theta-s")]
    pub theta_s: Option<f64>,
    /// Slice count K [default: 16]
    #[arg(long)]
    pub slices: Option<usize>,
    /// Drift threshold for reusing shortest paths; `inf` always reuses [default: 0.25]
    #[arg(long)]
    pub tau: Option<f64>,
    /// Minimum time overlap at a node, seconds [default: 1800]
    #[arg(long = "to-s")]
    pub to_s: Option<f64>,
    /// Maximum speed, m/s [default: 30]
    #[arg(long)]
    pub ms: Option<f64>,
    /// Use this percentile of each object's observed speeds as its MS,
    /// with --ms as the fallback
    #[arg(long)]
    pub ms_percentile: Option<f64>,
    /// Max distance from a trace record to an edge, meters [default: 25]
    #[arg(long)]
    pub snap_radius: Option<f64>,
    /// Max distance from a gap anchor to its network node, meters [default: 50]
    #[arg(long)]
    pub anchor_snap_radius: Option<f64>,
    /// Speed assumed on edges without traces, m/s [default: 15]
    #[arg(long)]
    pub default_speed: Option<f64>,
    /// Polygon vertices used for ellipse tests [default: 128]
    #[arg(long)]
    pub resolution: Option<usize>,
}

impl DetectionArgs {
    pub fn is_empty(&self) -> bool {
        let d = self;
        d.theta_s.is_none()
            && d.slices.is_none()
            && d.tau.is_none()
            && d.to_s.is_none()
            && d.ms.is_none()
            && d.ms_percentile.is_none()
            && d.snap_radius.is_none()
            && d.anchor_snap_radius.is_none()
            && d.default_speed.is_none()
            && d.resolution.is_none()
    }

    pub fn apply(&self, mut p: PipelineConfig) -> Result<PipelineConfig> {
        if let Some(v) = self.theta_s {
            p.theta = v;
        }
        if let Some(v) = self.slices {
            p.detect.slices = v;
        }
        if let Some(v) = self.tau {
            p.detect.tau = v;
        }
        if let Some(v) = self.to_s {
            p.detect.time_overlap = v;
        }
        if let Some(v) = self.resolution {
            p.detect.resolution = v;
        }
        if let Some(v) = self.snap_radius {
            p.weights.snap_radius = v;
        }
        if let Some(v) = self.default_speed {
            p.weights.default_speed = v;
        }
        if let Some(v) = self.anchor_snap_radius {
            p.anchor_snap_radius = v;
        }
        let base_ms = match p.ms_policy {
            MsPolicy::Global(v) => v,
            MsPolicy::PerObjectPercentile { fallback, .. } => fallback,
        };
        let ms = self.ms.unwrap_or(base_ms);
        p.ms_policy = match (self.ms_percentile, p.ms_policy) {
            (Some(percentile), _) => MsPolicy::PerObjectPercentile { percentile, fallback: ms },
            (None, MsPolicy::PerObjectPercentile { percentile, .. }) if self.ms.is_none() => {
                MsPolicy::PerObjectPercentile { percentile, fallback: ms }
            }
            _ => MsPolicy::Global(ms),
        };
        validate(&p)?;
        Ok(p)
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be a positive number, got {v}")))
    }
}

pub fn validate(p: &PipelineConfig) -> Result<()> {
    positive("--theta-s", p.theta)?;
    match p.ms_policy {
        MsPolicy::Global(v) => positive("--ms", v)?,
        MsPolicy::PerObjectPercentile { percentile, fallback } => {
            positive("--ms", fallback)?;
            if !(percentile > 0.0 && percentile <= 100.0) {
                return Err(invalid(format!("--ms-percentile must lie in (0, 100], got {percentile}")));
            }
        }
    }
    if p.detect.slices < 2 {
        return Err(invalid(format!("--slices must be at least 2, got {}", p.detect.slices)));
    }
    if p.detect.tau.is_nan() || p.detect.tau < 0.0 {
        return Err(invalid(format!("--tau must be non-negative, got {}", p.detect.tau)));
    }
    if !(p.detect.time_overlap >= 0.0 && p.detect.time_overlap.is_finite()) {
        return Err(invalid(format!("--to-s must be non-negative, got {}", p.detect.time_overlap)));
    }
    if p.detect.resolution < 8 {
        return Err(invalid(format!("--resolution must be at least 8, got {}", p.detect.resolution)));
    }
    positive("--snap-radius", p.weights.snap_radius)?;
    positive("--anchor-snap-radius", p.anchor_snap_radius)?;
    positive("--default-speed", p.weights.default_speed)?;
    Ok(())
}

pub fn jobs(requested: Option<usize>) -> Result<usize> {
    match requested {
        Some(0) => Err(invalid("--jobs must be at least 1")),
        Some(n) => Ok(n),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Absolute form of a path that may not exist yet.
pub fn absolute(path: &Path) -> Result<PathBuf> {
    Ok(if path.is_absolute() {
        path.to_path_buf()
    } else {
        std::env::current_dir()?.join(path)
    })
}

/// Synthetic scenario settings. Unset flags keep the defaults.
#[derive(Args, Debug, Clone, Default)]
pub struct ScenarioArgs {
    /// Random seed [default: 7]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Network shape: grid or random-planar [default: grid]
    #[arg(long, value_parser = parse_network)]
    pub network: Option<NetworkKind>,
    /// Network node count [default: 2500]
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Side of the square study area, meters [default: 30000]
    #[arg(long)]
    pub extent: Option<f64>,
    /// Number of objects [default: 1000]
    #[arg(long)]
    pub objects: Option<usize>,
    /// Shortest gap duration, seconds [default: 1800]
    #[arg(long)]
    pub emp_min: Option<f64>,
    /// Longest gap duration, seconds [default: 2700, or 1.5 x --emp-min]
    #[arg(long)]
    pub emp_max: Option<f64>,
    /// Slowest object speed, m/s [default: 2]
    #[arg(long)]
    pub speed_min: Option<f64>,
    /// Fastest object speed, m/s [default: 4]
    #[arg(long)]
    pub speed_max: Option<f64>,
    /// Fraction of couples staged to meet [default: 0.5]
    #[arg(long)]
    pub injection_rate: Option<f64>,
    /// Time overlap the staged meets must exceed, seconds [default: 600]
    #[arg(long = "to-s")]
    pub to_s: Option<f64>,
    /// Slice count K [default: 16]
    #[arg(long)]
    pub slices: Option<usize>,
    /// Drift threshold for reusing shortest paths [default: 0.25]
    #[arg(long)]
    pub tau: Option<f64>,
    /// Simulated period, seconds [default: 604800]
    #[arg(long)]
    pub horizon_s: Option<f64>,
    /// Background vehicles producing traces [default: 16]
    #[arg(long)]
    pub trace_vehicles: Option<usize>,
    /// congested or uniform [default: congested]
    #[arg(long, value_parser = parse_traffic)]
    pub traffic: Option<TrafficMode>,
}

fn parse_network(s: &str) -> Result<NetworkKind, String> {
    match s {
        "grid" => Ok(NetworkKind::Grid),
        "random-planar" => Ok(NetworkKind::RandomPlanar),
        _ => Err(format!("unknown network {s:?} (expected grid or random-planar)")),
    }
}

fn parse_traffic(s: &str) -> Result<TrafficMode, String> {
    match s {
        "congested" => Ok(TrafficMode::Congested),
        "uniform" => Ok(TrafficMode::Uniform),
        _ => Err(format!("unknown traffic mode {s:?} (expected congested or uniform)")),
    }
}

impl ScenarioArgs {
    pub fn is_empty(&self) -> bool {
        let s = self;
        s.seed.is_none()
            && s.network.is_none()
            && s.nodes.is_none()
            && s.extent.is_none()
            && s.objects.is_none()
            && s.emp_min.is_none()
            && s.emp_max.is_none()
            && s.speed_min.is_none()
            && s.speed_max.is_none()
            && s.injection_rate.is_none()
            && s.to_s.is_none()
            && s.slices.is_none()
            && s.tau.is_none()
            && s.horizon_s.is_none()
            && s.trace_vehicles.is_none()
            && s.traffic.is_none()
    }

    pub fn resolve(&self) -> Result<ScenarioConfig> {
        let mut c = ScenarioConfig::default();
        macro_rules! set {
            ($($field:ident => $target:expr),* $(,)?) => {
                $(if let Some(v) = self.$field { $target = v; })*
            };
        }
        set! {
            seed => c.seed,
            network => c.network,
            nodes => c.nodes,
            extent => c.extent,
            objects => c.objects,
            emp_min => c.emp_range.0,
            emp_max => c.emp_range.1,
            speed_min => c.ms_range.0,
            speed_max => c.ms_range.1,
            injection_rate => c.injection_rate,
            to_s => c.to,
            slices => c.slices,
            tau => c.tau,
            horizon_s => c.horizon,
            trace_vehicles => c.trace_vehicles,
            traffic => c.traffic,
        }
        if self.emp_min.is_some() && self.emp_max.is_none() {
            c.emp_range.1 = 1.5 * c.emp_range.0;
        }
        c.validate().map_err(|e| invalid(e.to_string()))?;
        Ok(c)
    }
}
