//! The 7x4 unit grid with two gaps crossing the middle rows.

use std::collections::BTreeSet;
use std::time::Instant;

use gapmeet_core::detect::{dc_tgard, npe, prism, tgard, DetectParams};
use gapmeet_core::gaps::{GapId, GapPair, TrajectoryGap};
use gapmeet_core::network::{EdgeWeightModel, HistoricTraces, NodeId, SpatialNetwork, WeightParams};
use gapmeet_core::pipeline::prepare_pairs;
use gapmeet_core::Point;

const COLS: usize = 7;
const ROWS: usize = 4;

fn grid() -> SpatialNetwork {
    let id = |c: usize, r: usize| NodeId((r * COLS + c) as u32);
    let nodes = (0..ROWS)
        .flat_map(|r| (0..COLS).map(move |c| ((r * COLS + c) as i64, Point::new(c as f64, r as f64))))
        .collect();
    let mut edges = Vec::new();
    for r in 0..ROWS {
        for c in 0..COLS {
            if c + 1 < COLS {
                edges.push((id(c, r), id(c + 1, r), 1.0, false));
            }
            if r + 1 < ROWS {
                edges.push((id(c, r), id(c, r + 1), 1.0, false));
            }
        }
    }
    SpatialNetwork::new(nodes, edges, None)
}

fn gap(id: u32, obj: &str, from: (f64, f64), to: (f64, f64)) -> TrajectoryGap {
    TrajectoryGap {
        id: GapId(id),
        object_id: obj.into(),
        start_anchor: Point::new(from.0, from.1),
        end_anchor: Point::new(to.0, to.1),
        t_s: 2.0,
        t_e: 6.0,
        ms: 1.0,
    }
}

fn ids(v: &[u32]) -> BTreeSet<NodeId> {
    v.iter().map(|&i| NodeId(i)).collect()
}

#[test]
fn slicing_keeps_two_of_six_candidates() {
    let start = Instant::now();
    let net = grid();
    let model = EdgeWeightModel::new(
        &net,
        &HistoricTraces::default(),
        WeightParams { snap_radius: 0.25, default_speed: 1.0 },
    );
    let a = gap(0, "a", (4.0, 0.0), (4.0, 1.0));
    let b = gap(1, "b", (4.0, 3.0), (4.0, 2.0));
    let pair = GapPair::try_new(&a, &b, 128).unwrap();
    let ctx = prepare_pairs(&net, &[pair], 4, 0.5).unwrap().remove(0);
    let params = DetectParams { slices: 4, time_overlap: 0.5, ..DetectParams::default() };

    let region: BTreeSet<NodeId> = ctx.region.iter().map(|r| r.0).collect();
    assert_eq!(region, ids(&[10, 11, 12, 17, 18, 19]));
    let base = prism(&ctx, &model, &params);
    assert_eq!(base.bounded, 6);

    let t = tgard(&ctx, &model, &params);
    let d = dc_tgard(&ctx, &model, &params);
    assert_eq!(t.node_set(), ids(&[11, 18]));
    assert_eq!(d.node_set(), t.node_set());
    assert_eq!(t.counters.slices_processed, 5);
    assert!(d.counters.slices_processed <= 3);

    let n = net.node_count();
    assert_eq!(npe(n, t.bounded) / npe(n, base.bounded), 3.0);
    assert!(start.elapsed().as_secs_f64() < 1.0);
}
