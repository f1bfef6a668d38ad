use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gapmeet_core::geometry::{regions_intersect, Region, DEFAULT_POLYGON_RESOLUTION};
use gapmeet_core::{pair_gaps, GapId, PairId, Point, TrajectoryGap};

fn random_gaps(n: usize, rng: &mut ChaCha8Rng) -> Vec<TrajectoryGap> {
    (0..n)
        .map(|i| {
            let start = Point::new(rng.gen_range(0.0..5000.0), rng.gen_range(0.0..5000.0));
            let ms = rng.gen_range(1.0..5.0);
            // Coarse times so touching and shared endpoints occur.
            let duration = (rng.gen_range(100.0..600.0f64) / 50.0).round() * 50.0;
            let reach = ms * duration * rng.gen_range(0.0..0.95);
            let a = rng.gen_range(0.0..std::f64::consts::TAU);
            let end = Point::new(start.x + reach * a.cos(), start.y + reach * a.sin());
            let t_s = (rng.gen_range(0.0..3000.0) / 50.0f64).round() * 50.0;
            let mut g = TrajectoryGap::for_test(start, end, t_s, t_s + duration, ms);
            g.id = GapId(i as u32);
            g.object_id = format!("o{}", rng.gen_range(0..n / 3 + 1)).into();
            g
        })
        .collect()
}

fn brute_force(gaps: &[TrajectoryGap]) -> Vec<PairId> {
    let mut out = Vec::new();
    for (i, a) in gaps.iter().enumerate() {
        for b in &gaps[i + 1..] {
            let same_object = a.object_id == b.object_id;
            let overlap = a.t_s.max(b.t_s) <= a.t_e.min(b.t_e);
            if same_object || !overlap {
                continue;
            }
            let meet = regions_intersect(
                &Region::Ellipse(a.ellipse()),
                &Region::Ellipse(b.ellipse()),
                DEFAULT_POLYGON_RESOLUTION,
            );
            if meet {
                out.push(PairId(a.id.min(b.id), a.id.max(b.id)));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn sweep_matches_all_pairs_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for round in 0..40 {
        let n = rng.gen_range(2..=200);
        let gaps = random_gaps(n, &mut rng);
        let got: Vec<PairId> = pair_gaps(&gaps, DEFAULT_POLYGON_RESOLUTION).iter().map(|p| p.id()).collect();
        assert_eq!(got, brute_force(&gaps), "round {round}");
    }
}

#[test]
fn sampled_common_points_imply_intersection() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..300 {
        let g = random_gaps(2, &mut rng);
        let (ea, eb) = (g[0].ellipse(), g[1].ellipse());
        let predicted = regions_intersect(&Region::Ellipse(ea), &Region::Ellipse(eb), DEFAULT_POLYGON_RESOLUTION);
        let b = ea.bbox();
        let found = (0..20_000).any(|_| {
            let p = Point::new(rng.gen_range(b.min.x..=b.max.x), rng.gen_range(b.min.y..=b.max.y));
            ea.contains(&p) && eb.contains(&p)
        });
        if found {
            assert!(predicted);
        }
    }
}

#[test]
fn pairs_are_sorted_and_cross_object() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let gaps = random_gaps(150, &mut rng);
    let pairs = pair_gaps(&gaps, DEFAULT_POLYGON_RESOLUTION);
    for w in pairs.windows(2) {
        assert!(w[0].id() < w[1].id());
    }
    for p in &pairs {
        assert_ne!(p.first.object_id, p.second.object_id);
        assert!(p.first.id < p.second.id);
        assert!(p.overlap.start <= p.overlap.end);
    }
}
