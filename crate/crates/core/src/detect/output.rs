use serde_json::{json, Value};

use super::{report_npe, DetectorReport};
use crate::network::SpatialNetwork;

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

/// GeoJSON FeatureCollection with one Point per rendezvous node, ordered by
/// pair then node. Coordinates are longitude/latitude for geodetic
/// networks and planar meters otherwise.
pub fn rendezvous_geojson(net: &SpatialNetwork, report: &DetectorReport) -> Value {
    let features: Vec<Value> = report
        .rendezvous()
        .map(|r| {
            let loc = net.location(r.node);
            let (x, y) = match net.projection() {
                Some(p) => p.unproject(&loc),
                None => (loc.x, loc.y),
            };
            json!({
                "type": "Feature",
                "geometry": { "type": "Point", "coordinates": [x, y] },
                "properties": {
                    "pair_id": r.pair.to_string(),
                    "node_id": net.external_id(r.node),
                    "alpha_i": [r.alpha_i.ea, r.alpha_i.ld],
                    "alpha_j": [r.alpha_j.ea, r.alpha_j.ld],
                    "overlap_s": r.overlap_s(),
                    "slices": r.qualifying_slices.iter().collect::<Vec<_>>(),
                },
            })
        })
        .collect();
    json!({ "type": "FeatureCollection", "features": features })
}

/// Counters, timing and pruning summary of a report.
pub fn metrics_json(net: &SpatialNetwork, report: &DetectorReport) -> Value {
    let c = &report.counters;
    json!({
        "detector": report.detector.name(),
        "pairs": report.pairs.len(),
        "rendezvous_nodes": report.rendezvous_count(),
        "bounded_nodes": report.bounded_total(),
        "study_nodes": net.node_count(),
        "npe": finite_or_null(report_npe(net, report)),
        "wall_time_s": report.wall_time_s,
        "counters": {
            "slices_processed": c.slices_processed,
            "lens_tests": c.lens_tests,
            "shortest_path_runs": c.shortest_path_runs,
            "reuse_hits": c.reuse_hits,
            "node_checks": c.node_checks,
            "snap_failures": c.snap_failures,
        },
    })
}
