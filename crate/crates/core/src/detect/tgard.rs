use std::collections::BTreeMap;

use super::{qualify, DetectParams, PairDetection, RendezvousNode};
use crate::geometry::{lens_at, lenses_intersect};
use crate::network::{EdgeWeightModel, NodeId};
use crate::reach::{availability, refresh_profile, ReachProfile, Refresh};
use crate::subnet::PairSamples;

/// Time-slicing detector. Walks slices `0..=K` in order; at each slice the
/// two lenses are intersected, region nodes inside both lenses that are not
/// yet admitted are tested against the current availability profiles, and
/// profiles are refreshed under the drift rule.
pub fn tgard(ctx: &PairSamples, model: &EdgeWeightModel, params: &DetectParams) -> PairDetection {
    let mut out = PairDetection::empty(ctx.id());
    if ctx.region.is_empty() {
        return out;
    }
    let gaps = ctx.pair.gaps();
    let mut profiles: Vec<ReachProfile> = Vec::with_capacity(2);
    for (net, gap) in ctx.nets.iter().zip(gaps) {
        match availability(net, gap, net.graph.weights(model, ctx.windows[0]), 0) {
            Ok(p) => profiles.push(p),
            Err(_) => {
                out.counters.snap_failures += 1;
                return out;
            }
        }
        out.counters.shortest_path_runs += 1;
    }

    let mut found: BTreeMap<NodeId, RendezvousNode> = BTreeMap::new();
    for (k, &t) in ctx.times.iter().enumerate() {
        if k > 0 {
            for (g, gap) in gaps.iter().enumerate() {
                let refreshed = if params.tau == f64::INFINITY {
                    (profiles[g].relabel(k), Refresh::Reused)
                } else {
                    let w = ctx.nets[g].graph.weights(model, ctx.windows[k]);
                    refresh_profile(&profiles[g], gap, w, k, params.tau).expect("profile refresh on its own gap")
                };
                match refreshed.1 {
                    Refresh::Reused => out.counters.reuse_hits += 1,
                    Refresh::Recomputed => out.counters.shortest_path_runs += 1,
                }
                profiles[g] = refreshed.0;
            }
        }
        out.counters.slices_processed += 1;
        out.counters.lens_tests += 1;
        let (Ok(Some(li)), Ok(Some(lj))) = (lens_at(gaps[0], t), lens_at(gaps[1], t)) else {
            continue;
        };
        if !lenses_intersect(&li, &lj) {
            continue;
        }
        for &(node, p) in &ctx.region {
            if found.contains_key(&node) {
                continue;
            }
            out.counters.node_checks += 1;
            if !(li.contains(&p) && lj.contains(&p)) {
                continue;
            }
            let (ai, aj) = (profiles[0].interval(node), profiles[1].interval(node));
            if let Some(mut r) = qualify(ctx.id(), node, ai, aj, params.time_overlap) {
                r.qualifying_slices.insert(k);
                found.insert(node, r);
            }
        }
    }
    out.nodes = found.into_values().collect();
    out.bounded = out.nodes.len();
    out
}
