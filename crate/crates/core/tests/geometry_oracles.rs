use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gapmeet_core::geometry::{lens_at, lens_intersection_area, Circle, Lens, EPS_GEO};
use gapmeet_core::{Point, TrajectoryGap};

fn random_gap(rng: &mut ChaCha8Rng) -> TrajectoryGap {
    let start = Point::new(rng.gen_range(-500.0..500.0), rng.gen_range(-500.0..500.0));
    let ms = rng.gen_range(1.0..30.0);
    let duration = rng.gen_range(60.0..3600.0);
    // Anchors no farther apart than the budget allows.
    let reach = ms * duration * rng.gen_range(0.0..0.99);
    let angle = rng.gen_range(0.0..std::f64::consts::TAU);
    let end = Point::new(start.x + reach * angle.cos(), start.y + reach * angle.sin());
    let t_s = rng.gen_range(0.0..1e5);
    TrajectoryGap::for_test(start, end, t_s, t_s + duration, ms)
}

fn in_disks(p: &Point, disks: &[Circle]) -> bool {
    disks.iter().all(|c| (p.x - c.center.x).powi(2) + (p.y - c.center.y).powi(2) <= c.radius * c.radius)
}

/// Rectangle with origin `o`, unit axis `u` and extents `[lo, hi]` along
/// `u` and `[-half, half]` across it.
#[derive(Clone, Copy)]
struct SampleBox {
    o: Point,
    u: (f64, f64),
    lo: f64,
    hi: f64,
    half: f64,
}

impl SampleBox {
    fn area(&self) -> f64 {
        (self.hi - self.lo).max(0.0) * 2.0 * self.half.max(0.0)
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Point {
        let (s, v) = (rng.gen_range(self.lo..self.hi), rng.gen_range(-self.half..self.half));
        let (ux, uy) = self.u;
        Point::new(self.o.x + s * ux - v * uy, self.o.y + s * uy + v * ux)
    }

    /// Bounding box of a lens in a frame aligned with its centre line, so
    /// thin lenses still fill most of the box.
    fn lens(c1: Circle, c2: Circle) -> Self {
        let (r1, r2) = (c1.radius, c2.radius);
        let d = c1.center.distance(&c2.center);
        let u = if d > 0.0 { ((c2.center.x - c1.center.x) / d, (c2.center.y - c1.center.y) / d) } else { (1.0, 0.0) };
        let half = if d * d + r1 * r1 <= r2 * r2 {
            r1
        } else if d * d + r2 * r2 <= r1 * r1 {
            r2
        } else {
            let a = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
            (r1 * r1 - a * a).max(0.0).sqrt()
        };
        SampleBox { o: c1.center, u, lo: (-r1).max(d - r2), hi: r1.min(d + r2), half }
    }

    /// Axis-aligned box shared by every disk.
    fn common(disks: &[Circle]) -> Self {
        let (mut x0, mut y0, mut x1, mut y1) = (f64::MIN, f64::MIN, f64::MAX, f64::MAX);
        for c in disks {
            x0 = x0.max(c.center.x - c.radius);
            y0 = y0.max(c.center.y - c.radius);
            x1 = x1.min(c.center.x + c.radius);
            y1 = y1.min(c.center.y + c.radius);
        }
        let cy = 0.5 * (y0 + y1);
        SampleBox { o: Point::new(0.0, cy), u: (1.0, 0.0), lo: x0, hi: x1, half: 0.5 * (y1 - y0) }
    }
}

/// Area of the intersection of `disks` by uniform sampling in the smallest
/// of `boxes`, each of which must contain the intersection. A pilot run
/// sizes the sample so about 2e5 samples hit, between 1e6 and 5e7.
fn monte_carlo(boxes: &[SampleBox], disks: &[Circle], rng: &mut ChaCha8Rng) -> f64 {
    let b = *boxes.iter().min_by(|a, b| a.area().total_cmp(&b.area())).unwrap();
    if b.area() <= 0.0 {
        return 0.0;
    }
    let hits_in = |n: usize, rng: &mut ChaCha8Rng| (0..n).filter(|_| in_disks(&b.sample(rng), disks)).count();
    let pilot = hits_in(100_000, rng).max(1) as f64 / 100_000.0;
    let n = ((2e5 / pilot) as usize).clamp(1_000_000, 50_000_000);
    hits_in(n, rng) as f64 / n as f64 * b.area()
}

#[test]
fn lens_area_matches_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 50 {
        let gap = random_gap(&mut rng);
        let t = rng.gen_range(gap.t_s..gap.t_e);
        let Some(lens) = lens_at(&gap, t).unwrap() else { continue };
        let exact = lens.area();
        if exact < 1e-6 {
            continue;
        }
        let [c1, c2] = lens.disks();
        let estimate = monte_carlo(&[SampleBox::lens(c1, c2)], &lens.disks(), &mut rng);
        let rel = (estimate - exact).abs() / exact;
        assert!(rel < 0.01, "lens {lens:?}: exact {exact}, sampled {estimate}");
        checked += 1;
    }
}

#[test]
fn lens_pair_area_matches_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut checked = 0;
    while checked < 20 {
        let a = random_gap(&mut rng);
        let mut b = random_gap(&mut rng);
        // Pull the second gap near the first so the lenses overlap often.
        let shift = Point::new(a.start_anchor.x - b.start_anchor.x, a.start_anchor.y - b.start_anchor.y);
        let jitter = a.ms * (a.t_e - a.t_s) * 0.3;
        let (jx, jy) = (rng.gen_range(-jitter..=jitter), rng.gen_range(-jitter..=jitter));
        b.start_anchor = Point::new(b.start_anchor.x + shift.x + jx, b.start_anchor.y + shift.y + jy);
        b.end_anchor = Point::new(b.end_anchor.x + shift.x + jx, b.end_anchor.y + shift.y + jy);
        let duration = b.t_e - b.t_s;
        b.t_s = a.t_s;
        b.t_e = a.t_s + duration;
        let t = rng.gen_range(a.t_s..a.t_e.min(b.t_e));
        let (Some(la), Some(lb)) = (lens_at(&a, t).unwrap(), lens_at(&b, t).unwrap()) else { continue };
        let exact = lens_intersection_area(&la, &lb);
        if exact < 1e-3 * la.area().min(lb.area()) {
            continue;
        }
        let disks: Vec<Circle> = la.disks().into_iter().chain(lb.disks()).collect();
        let ([a1, a2], [b1, b2]) = (la.disks(), lb.disks());
        let boxes = [SampleBox::lens(a1, a2), SampleBox::lens(b1, b2), SampleBox::common(&disks)];
        let estimate = monte_carlo(&boxes, &disks, &mut rng);
        let rel = (estimate - exact).abs() / exact;
        assert!(rel < 0.02, "exact {exact}, sampled {estimate}");
        checked += 1;
    }
}

/// A point on the lens boundary: on one circle and inside the other.
fn boundary_point(lens: &Lens, rng: &mut ChaCha8Rng) -> Option<Point> {
    let [c1, c2] = lens.disks();
    for _ in 0..64 {
        let (on, other) = if rng.gen_bool(0.5) { (c1, c2) } else { (c2, c1) };
        let a = rng.gen_range(0.0..std::f64::consts::TAU);
        let p = Point::new(on.center.x + on.radius * a.cos(), on.center.y + on.radius * a.sin());
        if other.center.distance(&p) <= other.radius {
            return Some(p);
        }
    }
    None
}

#[test]
fn lens_boundary_stays_inside_ellipse() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut checked = 0;
    while checked < 10_000 {
        let gap = random_gap(&mut rng);
        let t = rng.gen_range(gap.t_s..=gap.t_e);
        let Some(lens) = lens_at(&gap, t).unwrap() else { continue };
        let Some(p) = boundary_point(&lens, &mut rng) else { continue };
        let e = gap.ellipse();
        let sum = p.distance(&gap.start_anchor) + p.distance(&gap.end_anchor);
        assert!(sum <= gap.budget() + EPS_GEO, "{p:?} outside ellipse by {}", sum - gap.budget());
        assert!(e.contains(&p));
        checked += 1;
    }
}

fn gap_strategy() -> impl Strategy<Value = TrajectoryGap> {
    (-1e3..1e3f64, -1e3..1e3f64, 0.0..0.99f64, 0.0..6.3f64, 1.0..20.0f64, 10.0..2000.0f64).prop_map(
        |(x, y, frac, angle, ms, duration)| {
            let reach = ms * duration * frac;
            let start = Point::new(x, y);
            let end = Point::new(x + reach * angle.cos(), y + reach * angle.sin());
            TrajectoryGap::for_test(start, end, 0.0, duration, ms)
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn lens_points_lie_in_the_ellipse(gap in gap_strategy(), f in 0.0..=1.0f64, u in 0.0..1.0f64, v in 0.0..1.0f64) {
        let t = (gap.t_s + f * (gap.t_e - gap.t_s)).min(gap.t_e);
        let lens = lens_at(&gap, t).unwrap().expect("feasible gap always has a lens");
        let b = lens.bbox();
        let p = Point::new(b.min.x + u * (b.max.x - b.min.x), b.min.y + v * (b.max.y - b.min.y));
        if lens.contains(&p) {
            prop_assert!(gap.ellipse().contains(&p));
        }
    }

    #[test]
    fn lens_area_rises_then_falls(gap in gap_strategy()) {
        let areas: Vec<f64> = (0..=40)
            .map(|i| (gap.t_s + (gap.t_e - gap.t_s) * i as f64 / 40.0).min(gap.t_e))
            .map(|t| lens_at(&gap, t).unwrap().map_or(0.0, |l| l.area()))
            .collect();
        let tol = 1e-9 * areas.iter().cloned().fold(1.0, f64::max);
        let peak = areas.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        for w in areas[..=peak].windows(2) {
            prop_assert!(w[1] >= w[0] - tol);
        }
        for w in areas[peak..].windows(2) {
            prop_assert!(w[1] <= w[0] + tol);
        }
    }

    #[test]
    fn lens_area_ignores_disk_order_and_translation(gap in gap_strategy(), f in 0.0..=1.0f64, dx in -1e4..1e4f64, dy in -1e4..1e4f64) {
        let t = (gap.t_s + f * (gap.t_e - gap.t_s)).min(gap.t_e);
        let lens = lens_at(&gap, t).unwrap().unwrap();
        let [c1, c2] = lens.disks();
        let swapped = Lens::new(c2, c1, t).unwrap();
        let shift = |c: Circle| Circle::new(Point::new(c.center.x + dx, c.center.y + dy), c.radius).unwrap();
        let moved = Lens::new(shift(c1), shift(c2), t).unwrap();
        let a = lens.area();
        let tol = 1e-6 * a.max(1.0);
        prop_assert!((swapped.area() - a).abs() <= tol);
        prop_assert!((moved.area() - a).abs() <= tol);
    }

    #[test]
    fn lens_pair_area_is_symmetric(a in gap_strategy(), b in gap_strategy(), f in 0.0..=1.0f64) {
        let t = f * a.t_e.min(b.t_e);
        let la = lens_at(&a, t).unwrap().unwrap();
        let lb = lens_at(&b, t).unwrap().unwrap();
        let (ab, ba) = (lens_intersection_area(&la, &lb), lens_intersection_area(&lb, &la));
        prop_assert!((ab - ba).abs() <= 1e-6 * ab.max(1.0));
        prop_assert!(ab <= la.area().min(lb.area()) * (1.0 + 1e-6) + 1e-6);
    }
}
