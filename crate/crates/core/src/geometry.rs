//! Planar geometry for space-time prisms and their time slices.
//!
//! Everything here works in projected meters. A gap's prism projects to a
//! [`GeoEllipse`] whose foci are the gap anchors; slicing the prism at an
//! instant `t` gives the intersection of two disks (a [`Lens`]): the disk
//! reachable from the start anchor by `t`, and the disk from which the end
//! anchor is still reachable.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gaps::TrajectoryGap;

/// Membership tolerance in meters.
pub const EPS_GEO: f64 = 1e-6;
/// Relative tolerance for area comparisons.
pub const EPS_AREA: f64 = 1e-6;
/// Default number of boundary vertices used when polygonizing a region.
pub const DEFAULT_POLYGON_RESOLUTION: usize = 128;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("slice time {t} outside gap range [{start}, {end}]")]
    SliceOutOfRange { t: f64, start: f64, end: f64 },
    #[error("ellipse budget {budget} is shorter than the focal distance {focal}")]
    InfeasibleEllipse { budget: f64, focal: f64 },
    #[error("radius must be a finite non-negative number, got {0}")]
    InvalidRadius(f64),
    #[error("non-finite coordinate")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn midpoint(&self, other: &Point) -> Point {
        Point::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }

    fn sub(&self, other: &Point) -> (f64, f64) {
        (self.x - other.x, self.y - other.y)
    }
}

/// Distance from `p` to the closed segment `[a, b]`.
pub fn point_segment_distance(p: &Point, a: &Point, b: &Point) -> f64 {
    let (dx, dy) = b.sub(a);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.distance(a);
    }
    let (px, py) = p.sub(a);
    let s = ((px * dx + py * dy) / len2).clamp(0.0, 1.0);
    Point::new(a.x + s * dx, a.y + s * dy).distance(p)
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub min: Point,
    pub max: Point,
}

impl BBox {
    pub fn around(center: Point, radius: f64) -> Self {
        Self {
            min: Point::new(center.x - radius, center.y - radius),
            max: Point::new(center.x + radius, center.y + radius),
        }
    }

    pub fn intersects(&self, other: &BBox) -> bool {
        self.min.x <= other.max.x
            && other.min.x <= self.max.x
            && self.min.y <= other.max.y
            && other.min.y <= self.max.y
    }

    pub fn intersection(&self, other: &BBox) -> Option<BBox> {
        if !self.intersects(other) {
            return None;
        }
        Some(BBox {
            min: Point::new(self.min.x.max(other.min.x), self.min.y.max(other.min.y)),
            max: Point::new(self.max.x.min(other.max.x), self.max.y.min(other.max.y)),
        })
    }
}

/// Projection of a space-time prism: every point whose summed distance to
/// the two foci fits in the travel budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoEllipse {
    pub focus_start: Point,
    pub focus_end: Point,
    /// Maximum travel distance in meters, `(t_e - t_s) * ms`.
    pub budget: f64,
}

impl GeoEllipse {
    pub fn new(focus_start: Point, focus_end: Point, budget: f64) -> Result<Self, GeometryError> {
        if !focus_start.is_finite() || !focus_end.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        let focal = focus_start.distance(&focus_end);
        if !(budget >= 0.0) || budget + EPS_GEO < focal {
            return Err(GeometryError::InfeasibleEllipse { budget, focal });
        }
        Ok(Self {
            focus_start,
            focus_end,
            budget: budget.max(focal),
        })
    }

    pub fn contains(&self, p: &Point) -> bool {
        ellipse_contains(self, p)
    }

    pub fn center(&self) -> Point {
        self.focus_start.midpoint(&self.focus_end)
    }

    pub fn semi_major(&self) -> f64 {
        0.5 * self.budget
    }

    pub fn semi_minor(&self) -> f64 {
        let a = self.semi_major();
        let c = 0.5 * self.focus_start.distance(&self.focus_end);
        (a * a - c * c).max(0.0).sqrt()
    }

    pub fn bbox(&self) -> BBox {
        BBox::around(self.center(), self.semi_major() + EPS_GEO)
    }

    /// Inscribed polygon with `resolution` vertices on the true boundary.
    pub fn polygon(&self, resolution: usize) -> Vec<Point> {
        let a = self.semi_major();
        let b = self.semi_minor();
        let c = self.center();
        if a <= 0.0 {
            return vec![c];
        }
        let (dx, dy) = self.focus_end.sub(&self.focus_start);
        let theta = dy.atan2(dx);
        let (s, co) = theta.sin_cos();
        let n = resolution.max(3);
        (0..n)
            .map(|i| {
                let phi = 2.0 * PI * i as f64 / n as f64;
                let (u, v) = (a * phi.cos(), b * phi.sin());
                Point::new(c.x + u * co - v * s, c.y + u * s + v * co)
            })
            .collect()
    }
}

/// `dist(p, start) + dist(p, end) <= budget`, within [`EPS_GEO`].
pub fn ellipse_contains(e: &GeoEllipse, p: &Point) -> bool {
    p.distance(&e.focus_start) + p.distance(&e.focus_end) <= e.budget + EPS_GEO
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
}

impl Circle {
    pub fn new(center: Point, radius: f64) -> Result<Self, GeometryError> {
        if !center.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(GeometryError::InvalidRadius(radius));
        }
        Ok(Self { center, radius })
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.center.distance(p) <= self.radius + EPS_GEO
    }

    fn point_at(&self, angle: f64) -> Point {
        Point::new(
            self.center.x + self.radius * angle.cos(),
            self.center.y + self.radius * angle.sin(),
        )
    }

    /// Boundary intersection points with `other`, tangency reported once.
    fn boundary_intersections(&self, other: &Circle) -> Vec<Point> {
        let d = self.center.distance(&other.center);
        let (r1, r2) = (self.radius, other.radius);
        if d > r1 + r2 + EPS_GEO || d + EPS_GEO < (r1 - r2).abs() || d < EPS_GEO * 1e-3 {
            return Vec::new();
        }
        let a = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
        let h = (r1 * r1 - a * a).max(0.0).sqrt();
        let (ux, uy) = ((other.center.x - self.center.x) / d, (other.center.y - self.center.y) / d);
        let base = Point::new(self.center.x + a * ux, self.center.y + a * uy);
        if h <= EPS_GEO * 1e-3 {
            return vec![base];
        }
        vec![
            Point::new(base.x - h * uy, base.y + h * ux),
            Point::new(base.x + h * uy, base.y - h * ux),
        ]
    }
}

/// The instantaneous reachable region of one gap: `c1` grows from the start
/// anchor, `c2` shrinks towards the end anchor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lens {
    pub c1: Circle,
    pub c2: Circle,
    /// Slice instant in seconds.
    pub t: f64,
}

impl Lens {
    /// `None` when the two disks do not meet.
    pub fn new(c1: Circle, c2: Circle, t: f64) -> Option<Self> {
        let d = c1.center.distance(&c2.center);
        if c1.radius + c2.radius + EPS_GEO < d {
            None
        } else {
            Some(Self { c1, c2, t })
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.c1.contains(p) && self.c2.contains(p)
    }

    pub fn area(&self) -> f64 {
        lens_area(self)
    }

    pub fn disks(&self) -> [Circle; 2] {
        [self.c1, self.c2]
    }

    pub fn bbox(&self) -> BBox {
        let a = BBox::around(self.c1.center, self.c1.radius + EPS_GEO);
        let b = BBox::around(self.c2.center, self.c2.radius + EPS_GEO);
        a.intersection(&b).unwrap_or(BBox {
            min: self.c1.center.midpoint(&self.c2.center),
            max: self.c1.center.midpoint(&self.c2.center),
        })
    }

    /// A point that lies in the lens.
    pub fn interior_point(&self) -> Point {
        let (small, large) = if self.c1.radius <= self.c2.radius {
            (self.c1, self.c2)
        } else {
            (self.c2, self.c1)
        };
        if large.contains(&small.center) {
            return small.center;
        }
        // Midpoint of the overlap along the center line.
        let d = small.center.distance(&large.center);
        let near = d - large.radius;
        let s = (0.5 * (near + small.radius)).clamp(0.0, small.radius);
        let t = if d > 0.0 { s / d } else { 0.0 };
        Point::new(
            small.center.x + t * (large.center.x - small.center.x),
            small.center.y + t * (large.center.y - small.center.y),
        )
    }

    /// Inscribed polygon, vertices on the true lens boundary.
    pub fn polygon(&self, resolution: usize) -> Vec<Point> {
        let n = resolution.max(4);
        let (c1, c2) = (self.c1, self.c2);
        if c1.radius <= EPS_GEO || c2.radius <= EPS_GEO {
            return vec![self.interior_point()];
        }
        let d = c1.center.distance(&c2.center);
        if d + c1.radius <= c2.radius + EPS_GEO {
            return circle_polygon(&c1, n);
        }
        if d + c2.radius <= c1.radius + EPS_GEO {
            return circle_polygon(&c2, n);
        }
        let pts = c1.boundary_intersections(&c2);
        if pts.len() < 2 {
            return vec![self.interior_point()];
        }
        let per_arc = n / 2;
        let mut out = Vec::with_capacity(2 * per_arc);
        for (circle, other) in [(c1, c2), (c2, c1)] {
            let a0 = angle_of(&circle, &pts[0]);
            let a1 = angle_of(&circle, &pts[1]);
            // Pick the arc whose midpoint lies inside the other disk.
            let (mut start, mut sweep) = (a0, ccw_sweep(a0, a1));
            if !other.contains(&circle.point_at(start + 0.5 * sweep)) {
                start = a1;
                sweep = ccw_sweep(a1, a0);
            }
            for i in 0..per_arc {
                out.push(circle.point_at(start + sweep * i as f64 / (per_arc - 1).max(1) as f64));
            }
        }
        out
    }
}

fn circle_polygon(c: &Circle, n: usize) -> Vec<Point> {
    (0..n).map(|i| c.point_at(2.0 * PI * i as f64 / n as f64)).collect()
}

fn angle_of(c: &Circle, p: &Point) -> f64 {
    (p.y - c.center.y).atan2(p.x - c.center.x)
}

fn ccw_sweep(from: f64, to: f64) -> f64 {
    let mut s = to - from;
    while s < 0.0 {
        s += 2.0 * PI;
    }
    while s >= 2.0 * PI {
        s -= 2.0 * PI;
    }
    s
}

/// The two slice disks of a gap at instant `t`.
pub fn slice_circles(
    gap_anchor_start: Point,
    gap_anchor_end: Point,
    t_s: f64,
    t_e: f64,
    ms: f64,
    t: f64,
) -> Result<(Circle, Circle), GeometryError> {
    if !(t >= t_s && t <= t_e) {
        return Err(GeometryError::SliceOutOfRange { t, start: t_s, end: t_e });
    }
    let c1 = Circle::new(gap_anchor_start, ((t - t_s) * ms).max(0.0))?;
    let c2 = Circle::new(gap_anchor_end, ((t_e - t) * ms).max(0.0))?;
    Ok((c1, c2))
}

/// Slice of `gap` at `t`; `Ok(None)` when the disks are disjoint, which only
/// happens for infeasible gaps.
pub fn lens_at(gap: &TrajectoryGap, t: f64) -> Result<Option<Lens>, GeometryError> {
    let (c1, c2) = slice_circles(gap.start_anchor, gap.end_anchor, gap.t_s, gap.t_e, gap.ms, t)?;
    Ok(Lens::new(c1, c2, t))
}

/// Closed-form area of the intersection of the lens's two disks.
pub fn lens_area(l: &Lens) -> f64 {
    two_disk_overlap(&l.c1, &l.c2)
}

fn two_disk_overlap(a: &Circle, b: &Circle) -> f64 {
    let d = a.center.distance(&b.center);
    let (r1, r2) = (a.radius, b.radius);
    if d >= r1 + r2 {
        return 0.0;
    }
    if d <= (r1 - r2).abs() {
        let r = r1.min(r2);
        return PI * r * r;
    }
    let alpha = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).clamp(-1.0, 1.0).acos();
    let beta = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).clamp(-1.0, 1.0).acos();
    let k = ((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2)).max(0.0);
    (r1 * r1 * alpha + r2 * r2 * beta - 0.5 * k.sqrt()).max(0.0)
}

/// Whether a family of closed disks has a common point.
///
/// If the intersection is non-empty its leftmost point is either the
/// leftmost point of one disk or a boundary crossing of two disks, so those
/// candidates decide the question.
pub fn disks_intersect(disks: &[Circle]) -> bool {
    disk_common_point(disks).is_some()
}

/// A witness point shared by every disk, if one exists.
pub fn disk_common_point(disks: &[Circle]) -> Option<Point> {
    if disks.is_empty() {
        return None;
    }
    let inside_all = |p: &Point| disks.iter().all(|d| d.contains(p));
    for d in disks {
        let leftmost = Point::new(d.center.x - d.radius, d.center.y);
        if inside_all(&leftmost) {
            return Some(leftmost);
        }
    }
    for (i, a) in disks.iter().enumerate() {
        for b in &disks[i + 1..] {
            for p in a.boundary_intersections(b) {
                if inside_all(&p) {
                    return Some(p);
                }
            }
        }
    }
    None
}

/// Exact area of the intersection of a family of disks.
///
/// The boundary of the intersection is a sequence of circular arcs; the area
/// is the sum of their line integrals `(x dy - y dx) / 2`.
pub fn disk_intersection_area(disks: &[Circle]) -> f64 {
    let mut unique: Vec<Circle> = Vec::with_capacity(disks.len());
    for d in disks {
        if d.radius <= EPS_GEO {
            return 0.0;
        }
        let dup = unique.iter().any(|u| {
            u.center.distance(&d.center) <= EPS_GEO * 1e-3 && (u.radius - d.radius).abs() <= EPS_GEO * 1e-3
        });
        if !dup {
            unique.push(*d);
        }
    }
    match unique.len() {
        0 => return 0.0,
        1 => return PI * unique[0].radius * unique[0].radius,
        2 => return two_disk_overlap(&unique[0], &unique[1]),
        _ => {}
    }
    if !disks_intersect(&unique) {
        return 0.0;
    }
    let strictly_inside_others = |idx: usize, p: &Point| {
        unique
            .iter()
            .enumerate()
            .all(|(j, d)| j == idx || d.center.distance(p) <= d.radius + 1e-12 * d.radius.max(1.0))
    };
    let mut twice_area = 0.0;
    for (i, c) in unique.iter().enumerate() {
        let mut angles: Vec<f64> = Vec::new();
        for (j, other) in unique.iter().enumerate() {
            if i == j {
                continue;
            }
            for p in c.boundary_intersections(other) {
                angles.push(angle_of(c, &p));
            }
        }
        if angles.is_empty() {
            if strictly_inside_others(i, &c.point_at(0.0)) {
                twice_area += arc_integral(c, 0.0, 2.0 * PI);
            }
            continue;
        }
        angles.sort_by(f64::total_cmp);
        for k in 0..angles.len() {
            let start = angles[k];
            let end = if k + 1 < angles.len() { angles[k + 1] } else { angles[0] + 2.0 * PI };
            if end - start <= 1e-15 {
                continue;
            }
            let mid = c.point_at(0.5 * (start + end));
            if strictly_inside_others(i, &mid) {
                twice_area += arc_integral(c, start, end);
            }
        }
    }
    (0.5 * twice_area).max(0.0)
}

fn arc_integral(c: &Circle, start: f64, end: f64) -> f64 {
    let r = c.radius;
    r * c.center.x * (end.sin() - start.sin()) - r * c.center.y * (end.cos() - start.cos())
        + r * r * (end - start)
}

/// Exact non-emptiness of `a ∩ b` for two lenses.
pub fn lenses_intersect(a: &Lens, b: &Lens) -> bool {
    disks_intersect(&[a.c1, a.c2, b.c1, b.c2])
}

/// Exact area of `a ∩ b` for two lenses.
pub fn lens_intersection_area(a: &Lens, b: &Lens) -> f64 {
    disk_intersection_area(&[a.c1, a.c2, b.c1, b.c2])
}

/// A region used for pair filtering and slice filtering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Region {
    Ellipse(GeoEllipse),
    Lens(Lens),
}

impl Region {
    pub fn contains(&self, p: &Point) -> bool {
        match self {
            Region::Ellipse(e) => e.contains(p),
            Region::Lens(l) => l.contains(p),
        }
    }

    pub fn bbox(&self) -> BBox {
        match self {
            Region::Ellipse(e) => e.bbox(),
            Region::Lens(l) => l.bbox(),
        }
    }

    pub fn interior_point(&self) -> Point {
        match self {
            Region::Ellipse(e) => e.center(),
            Region::Lens(l) => l.interior_point(),
        }
    }

    pub fn polygon(&self, resolution: usize) -> Vec<Point> {
        match self {
            Region::Ellipse(e) => e.polygon(resolution),
            Region::Lens(l) => l.polygon(resolution),
        }
    }

    /// Points known to lie in the region besides the polygon vertices.
    fn anchors(&self) -> Vec<Point> {
        match self {
            Region::Ellipse(e) => vec![e.center(), e.focus_start, e.focus_end],
            Region::Lens(l) => vec![l.interior_point()],
        }
    }
}

impl From<GeoEllipse> for Region {
    fn from(e: GeoEllipse) -> Self {
        Region::Ellipse(e)
    }
}

impl From<Lens> for Region {
    fn from(l: Lens) -> Self {
        Region::Lens(l)
    }
}

/// Whether two regions share a point.
///
/// Lens pairs are decided exactly. Other combinations polygonize both
/// boundaries at `resolution` vertices and test vertex containment against
/// the exact regions plus edge crossings.
pub fn regions_intersect(a: &Region, b: &Region, resolution: usize) -> bool {
    if let (Region::Lens(la), Region::Lens(lb)) = (a, b) {
        return lenses_intersect(la, lb);
    }
    if !a.bbox().intersects(&b.bbox()) {
        return false;
    }
    if let (Region::Ellipse(ea), Region::Ellipse(eb)) = (a, b) {
        if ea.center().distance(&eb.center()) > ea.semi_major() + eb.semi_major() + EPS_GEO {
            return false;
        }
    }
    if a.anchors().iter().any(|p| b.contains(p)) || b.anchors().iter().any(|p| a.contains(p)) {
        return true;
    }
    let pa = a.polygon(resolution);
    let pb = b.polygon(resolution);
    if pa.iter().any(|p| b.contains(p)) || pb.iter().any(|p| a.contains(p)) {
        return true;
    }
    polygons_cross(&pa, &pb)
}

/// Membership in `a ∩ b`.
pub fn point_in_region_intersection(p: &Point, a: &Region, b: &Region) -> bool {
    a.contains(p) && b.contains(p)
}

fn polygons_cross(a: &[Point], b: &[Point]) -> bool {
    if a.len() < 2 || b.len() < 2 {
        return false;
    }
    for i in 0..a.len() {
        let (p1, p2) = (a[i], a[(i + 1) % a.len()]);
        for j in 0..b.len() {
            let (q1, q2) = (b[j], b[(j + 1) % b.len()]);
            if segments_intersect(&p1, &p2, &q1, &q2) {
                return true;
            }
        }
    }
    false
}

fn orient(a: &Point, b: &Point, c: &Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn segments_intersect(p1: &Point, p2: &Point, q1: &Point, q2: &Point) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |a: &Point, b: &Point, c: &Point, o: f64| {
        o == 0.0 && c.x >= a.x.min(b.x) && c.x <= a.x.max(b.x) && c.y >= a.y.min(b.y) && c.y <= a.y.max(b.y)
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

/// Shoelace area of a simple polygon.
pub fn polygon_area(poly: &[Point]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        s += a.x * b.y - b.x * a.y;
    }
    0.5 * s.abs()
}
