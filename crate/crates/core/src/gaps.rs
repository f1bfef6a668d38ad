//! Trajectory ingestion, gap extraction and candidate gap pairing.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::geometry::{regions_intersect, BBox, GeoEllipse, Point, Region, EPS_GEO};
use crate::network::{IngestError, LocalProjection, TimeWindow};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub point: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub object_id: Arc<str>,
    pub points: Vec<TrajectoryPoint>,
}

/// Trajectories keyed and ordered by object id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectories {
    objects: Vec<Trajectory>,
}

impl Trajectories {
    /// Groups points by object. Points of each object must already be in
    /// time order.
    pub fn from_points(
        points: impl IntoIterator<Item = (String, TrajectoryPoint)>,
    ) -> Result<Self, (String, f64)> {
        let mut map: BTreeMap<String, Vec<TrajectoryPoint>> = BTreeMap::new();
        for (id, p) in points {
            let list = map.entry(id.clone()).or_default();
            if let Some(last) = list.last() {
                if p.t < last.t {
                    return Err((id, p.t));
                }
            }
            list.push(p);
        }
        Ok(Self {
            objects: map
                .into_iter()
                .map(|(id, points)| Trajectory {
                    object_id: id.into(),
                    points,
                })
                .collect(),
        })
    }

    pub fn objects(&self) -> &[Trajectory] {
        &self.objects
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn point_count(&self) -> usize {
        self.objects.iter().map(|o| o.points.len()).sum()
    }
}

/// Parses `object_id,t_unix_s,x,y`; coordinates go through `projection`
/// when given.
pub fn load_trajectories(
    reader: impl Read,
    name: &str,
    projection: Option<&LocalProjection>,
) -> Result<Trajectories, IngestError> {
    use crate::network::io_support::{field, finite, Rows};

    let mut points = Vec::new();
    let mut last: BTreeMap<String, f64> = BTreeMap::new();
    let mut rows = Rows::new(reader, name);
    let file = rows.file().to_string();
    rows.for_each(|line, rec| {
        let object_id: String = field(&file, line, rec, 0, "object_id")?;
        let t = finite(&file, line, field(&file, line, rec, 1, "t_unix_s")?, "t_unix_s")?;
        let x = finite(&file, line, field(&file, line, rec, 2, "x")?, "x")?;
        let y = finite(&file, line, field(&file, line, rec, 3, "y")?, "y")?;
        if let Some(prev) = last.insert(object_id.clone(), t) {
            if t < prev {
                return Err(IngestError::Unsorted {
                    file: file.clone(),
                    line,
                    object: object_id,
                });
            }
        }
        let point = match projection {
            Some(p) => p.project(x, y),
            None => Point::new(x, y),
        };
        points.push((object_id, TrajectoryPoint { t, point }));
        Ok(())
    })?;
    Ok(Trajectories::from_points(points).expect("order checked while parsing"))
}

pub fn load_trajectories_from_path(
    path: &Path,
    projection: Option<&LocalProjection>,
) -> Result<Trajectories, IngestError> {
    let f = crate::network::io_support::open(path)?;
    load_trajectories(f, &path.display().to_string(), projection)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GapId(pub u32);

impl GapId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for GapId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A missing-signal interval of one object.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryGap {
    pub id: GapId,
    pub object_id: Arc<str>,
    pub start_anchor: Point,
    pub end_anchor: Point,
    pub t_s: f64,
    pub t_e: f64,
    /// Maximum speed in m/s.
    pub ms: f64,
}

impl TrajectoryGap {
    pub fn duration(&self) -> f64 {
        self.t_e - self.t_s
    }

    pub fn budget(&self) -> f64 {
        self.duration() * self.ms
    }

    pub fn ellipse(&self) -> GeoEllipse {
        GeoEllipse::new(self.start_anchor, self.end_anchor, self.budget())
            .expect("gap feasibility is checked at construction")
    }

    pub fn time_range(&self) -> TimeWindow {
        TimeWindow::new(self.t_s, self.t_e).expect("gap has t_s < t_e")
    }

    /// Whether the anchors can be joined within the travel budget.
    pub fn is_feasible(&self) -> bool {
        self.budget() + EPS_GEO >= self.start_anchor.distance(&self.end_anchor)
    }

    /// Same gap with a different maximum speed.
    pub fn with_ms(&self, ms: f64) -> Self {
        Self { ms, ..self.clone() }
    }

    #[doc(hidden)]
    pub fn for_test(start: Point, end: Point, t_s: f64, t_e: f64, ms: f64) -> Self {
        Self {
            id: GapId(0),
            object_id: "test".into(),
            start_anchor: start,
            end_anchor: end,
            t_s,
            t_e,
            ms,
        }
    }
}

/// How a gap's maximum speed is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MsPolicy {
    /// One speed for every object.
    Global(f64),
    /// Nearest-rank percentile of the object's observed speeds between
    /// consecutive non-gap points, falling back to `fallback` when the
    /// object has none.
    PerObjectPercentile { percentile: f64, fallback: f64 },
}

impl Default for MsPolicy {
    fn default() -> Self {
        MsPolicy::Global(30.0)
    }
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let rank = ((q / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

fn object_ms(traj: &Trajectory, theta: f64, policy: MsPolicy) -> f64 {
    match policy {
        MsPolicy::Global(ms) => ms,
        MsPolicy::PerObjectPercentile { percentile: q, fallback } => {
            let mut speeds: Vec<f64> = traj
                .points
                .windows(2)
                .filter_map(|w| {
                    let dt = w[1].t - w[0].t;
                    (dt > 0.0 && dt < theta).then(|| w[0].point.distance(&w[1].point) / dt)
                })
                .collect();
            if speeds.is_empty() {
                return fallback;
            }
            speeds.sort_by(f64::total_cmp);
            let ms = percentile(&speeds, q);
            if ms > 0.0 {
                ms
            } else {
                fallback
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GapExtraction {
    pub gaps: Vec<TrajectoryGap>,
    /// Gaps whose anchors are farther apart than the travel budget allows.
    pub infeasible_dropped: usize,
}

/// One gap per consecutive point pair with `Δt ≥ theta`. Gap ids follow
/// object order, then time.
pub fn extract_gaps(trajectories: &Trajectories, theta: f64, policy: MsPolicy) -> GapExtraction {
    let mut out = GapExtraction::default();
    for traj in trajectories.objects() {
        let ms = object_ms(traj, theta, policy);
        for w in traj.points.windows(2) {
            let dt = w[1].t - w[0].t;
            if !(dt >= theta && dt > 0.0) {
                continue;
            }
            let gap = TrajectoryGap {
                id: GapId(out.gaps.len() as u32),
                object_id: traj.object_id.clone(),
                start_anchor: w[0].point,
                end_anchor: w[1].point,
                t_s: w[0].t,
                t_e: w[1].t,
                ms,
            };
            if gap.is_feasible() {
                out.gaps.push(gap);
            } else {
                out.infeasible_dropped += 1;
            }
        }
    }
    if out.infeasible_dropped > 0 {
        log::warn!("dropped {} infeasible gaps", out.infeasible_dropped);
    }
    out
}

/// Identifier of a gap pair, displayed as `first-second`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PairId(pub GapId, pub GapId);

impl fmt::Display for PairId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

impl std::str::FromStr for PairId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s.split_once('-').ok_or_else(|| format!("invalid pair id {s:?}"))?;
        let parse = |v: &str| v.parse::<u32>().map(GapId).map_err(|_| format!("invalid pair id {s:?}"));
        Ok(PairId(parse(a)?, parse(b)?))
    }
}

/// Intersection of the two gaps' geo-ellipses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairRegion {
    pub first: GeoEllipse,
    pub second: GeoEllipse,
}

impl PairRegion {
    pub fn contains(&self, p: &Point) -> bool {
        self.first.contains(p) && self.second.contains(p)
    }

    pub fn bbox(&self) -> Option<BBox> {
        self.first.bbox().intersection(&self.second.bbox())
    }
}

/// Two gaps of different objects that overlap in time and space.
#[derive(Debug, Clone, PartialEq)]
pub struct GapPair {
    pub first: TrajectoryGap,
    pub second: TrajectoryGap,
    pub overlap: TimeWindow,
    pub region: PairRegion,
}

impl GapPair {
    /// Pairs two gaps (ordered by id) if they qualify.
    pub fn try_new(a: &TrajectoryGap, b: &TrajectoryGap, resolution: usize) -> Option<Self> {
        if a.object_id == b.object_id || a.id == b.id {
            return None;
        }
        let overlap = TimeWindow::new(a.t_s.max(b.t_s), a.t_e.min(b.t_e))?;
        let (ea, eb) = (a.ellipse(), b.ellipse());
        if !regions_intersect(&Region::Ellipse(ea), &Region::Ellipse(eb), resolution) {
            return None;
        }
        let (first, second) = if a.id < b.id { (a, b) } else { (b, a) };
        Some(Self {
            first: first.clone(),
            second: second.clone(),
            overlap,
            region: PairRegion {
                first: first.ellipse(),
                second: second.ellipse(),
            },
        })
    }

    pub fn id(&self) -> PairId {
        PairId(self.first.id, self.second.id)
    }

    pub fn gaps(&self) -> [&TrajectoryGap; 2] {
        [&self.first, &self.second]
    }
}

/// Plane sweep over gap start times. Emits pairs of different objects whose
/// closed time ranges overlap and whose ellipses intersect, ordered by
/// `(first id, second id)`.
pub fn pair_gaps(gaps: &[TrajectoryGap], resolution: usize) -> Vec<GapPair> {
    let mut order: Vec<usize> = (0..gaps.len()).collect();
    order.sort_by(|&a, &b| gaps[a].t_s.total_cmp(&gaps[b].t_s).then(gaps[a].id.cmp(&gaps[b].id)));
    let mut active: Vec<usize> = Vec::new();
    let mut out = Vec::new();
    for &i in &order {
        let g = &gaps[i];
        active.retain(|&j| gaps[j].t_e >= g.t_s);
        for &j in &active {
            if let Some(p) = GapPair::try_new(&gaps[j], g, resolution) {
                out.push(p);
            }
        }
        active.push(i);
    }
    out.sort_by_key(GapPair::id);
    out
}
