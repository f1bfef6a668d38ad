use super::{qualify, DetectParams, PairDetection};
use crate::network::EdgeWeightModel;
use crate::reach::availability;
use crate::subnet::PairSamples;

/// Space-time prism baseline: every node in the ellipse intersection is a
/// candidate; candidates whose availability intervals, computed once with
/// the whole overlap window's weights, overlap by at least TO qualify.
pub fn prism(ctx: &PairSamples, model: &EdgeWeightModel, params: &DetectParams) -> PairDetection {
    let mut out = PairDetection::empty(ctx.id());
    out.bounded = ctx.region.len();
    if ctx.region.is_empty() {
        return out;
    }
    let window = ctx.pair.overlap;
    let [gi, gj] = ctx.pair.gaps();
    let [ni, nj] = &ctx.nets;
    let profiles = availability(ni, gi, ni.graph.weights(model, window), 0)
        .and_then(|a| Ok((a, availability(nj, gj, nj.graph.weights(model, window), 0)?)));
    let (pi, pj) = match profiles {
        Ok(p) => p,
        Err(_) => {
            out.counters.snap_failures += 1;
            return out;
        }
    };
    out.counters.shortest_path_runs += 2;
    for &(node, _) in &ctx.region {
        out.counters.node_checks += 1;
        if let Some(r) = qualify(ctx.id(), node, pi.interval(node), pj.interval(node), params.time_overlap) {
            out.nodes.push(r);
        }
    }
    out
}
