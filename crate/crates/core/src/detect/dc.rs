use std::collections::HashMap;

use super::{qualify, DetectParams, PairDetection, RendezvousNode};
use crate::geometry::{lens_at, lens_intersection_area, lenses_intersect, Point, EPS_GEO};
use crate::network::{EdgeWeightModel, EdgeWeights, NodeId};
use crate::reach::{availability, ReachProfile, ReuseChain};
use crate::subnet::PairSamples;

/// Region node still waiting for admission.
struct Pending {
    node: NodeId,
    point: Point,
    /// Slices outside `first..=last` cannot place the node in both lenses.
    first: usize,
    last: usize,
    /// Basis pairs under which the availability test already failed.
    rejected: Vec<(usize, usize)>,
    admitted: bool,
}

type WeightFn<'a> = Box<dyn FnMut(usize) -> EdgeWeights + 'a>;

/// Lazily computed reuse chain and profiles of one gap.
struct GapState<'a> {
    chain: ReuseChain<WeightFn<'a>>,
    profiles: HashMap<usize, ReachProfile>,
}

/// Dual-convergence detector. Visits slice pairs `(k, K - k)` from both
/// ends toward the middle and stops once no pending region node can lie in
/// both lenses at any unvisited slice. Admits exactly the node set of
/// [`super::tgard`]: a node is tested at every slice where it lies in both
/// lenses, with the profiles that slice would use under the reuse rule.
pub fn dc_tgard(ctx: &PairSamples, model: &EdgeWeightModel, params: &DetectParams) -> PairDetection {
    let mut out = PairDetection::empty(ctx.id());
    if ctx.region.is_empty() {
        return out;
    }
    if !ctx.nets.iter().all(|n| n.is_snapped()) {
        out.counters.snap_failures += 1;
        return out;
    }
    let k_max = ctx.slices();
    let gaps = ctx.pair.gaps();

    let mut pending: Vec<Pending> = ctx
        .region
        .iter()
        .filter_map(|&(node, point)| {
            let (first, last) = slice_bounds(ctx, point)?;
            Some(Pending {
                node,
                point,
                first,
                last,
                rejected: Vec::new(),
                admitted: false,
            })
        })
        .collect();

    let mut states: Vec<GapState> = ctx
        .nets
        .iter()
        .map(|net| {
            let f: WeightFn = Box::new(move |k| net.graph.weights(model, ctx.windows[k]));
            GapState {
                chain: ReuseChain::new(k_max + 1, params.tau, f),
                profiles: HashMap::new(),
            }
        })
        .collect();

    let mut found: Vec<RendezvousNode> = Vec::new();
    let mut peak = f64::NEG_INFINITY;
    let (mut lo, mut hi) = (0usize, k_max);
    loop {
        let open = pending.iter().any(|u| !u.admitted && u.first <= hi && u.last >= lo);
        if !open {
            break;
        }
        out.counters.slices_processed += 1;
        let frontier: &[usize] = if lo == hi { &[lo] } else { &[lo, hi] };
        for &k in frontier {
            let t = ctx.times[k];
            out.counters.lens_tests += 1;
            let (Ok(Some(li)), Ok(Some(lj))) = (lens_at(gaps[0], t), lens_at(gaps[1], t)) else {
                continue;
            };
            if !lenses_intersect(&li, &lj) {
                continue;
            }
            peak = peak.max(lens_intersection_area(&li, &lj));
            for u in pending.iter_mut() {
                if u.admitted || k < u.first || k > u.last {
                    continue;
                }
                out.counters.node_checks += 1;
                if !(li.contains(&u.point) && lj.contains(&u.point)) {
                    continue;
                }
                let bases = (states[0].chain.basis(k), states[1].chain.basis(k));
                if u.rejected.contains(&bases) {
                    continue;
                }
                let mut alphas = [None, None];
                for (g, state) in states.iter_mut().enumerate() {
                    let b = bases_of(bases, g);
                    let profile = state.profiles.entry(b).or_insert_with(|| {
                        out.counters.shortest_path_runs += 1;
                        let w = state
                            .chain
                            .take_weights(b)
                            .unwrap_or_else(|| ctx.nets[g].graph.weights(model, ctx.windows[b]));
                        availability(&ctx.nets[g], gaps[g], w, b).expect("anchors checked above")
                    });
                    alphas[g] = profile.interval(u.node);
                }
                match qualify(ctx.id(), u.node, alphas[0], alphas[1], params.time_overlap) {
                    Some(mut r) => {
                        r.qualifying_slices.insert(k);
                        found.push(r);
                        u.admitted = true;
                    }
                    None => u.rejected.push(bases),
                }
            }
        }
        if hi <= lo + 1 {
            break;
        }
        lo += 1;
        hi -= 1;
    }
    // Slices whose basis was resolved and lies elsewhere reused a profile.
    for s in &states {
        out.counters.reuse_hits += (0..=k_max).filter(|&k| s.chain.known(k).is_some_and(|b| b != k)).count() as u64;
    }
    found.sort_by_key(|r| r.node);
    out.nodes = found;
    out.bounded = out.nodes.len();
    out.peak_overlap_area = peak.is_finite().then_some(peak);
    out
}

fn bases_of(bases: (usize, usize), g: usize) -> usize {
    if g == 0 {
        bases.0
    } else {
        bases.1
    }
}

/// Conservative slice range in which `p` can lie in both gaps' lenses:
/// `p` is in a gap's lens at `t` only if
/// `t_s + d(p, start) / ms <= t <= t_e - d(p, end) / ms`.
/// The range is widened by one slice on each side to absorb rounding.
fn slice_bounds(ctx: &PairSamples, p: Point) -> Option<(usize, usize)> {
    let k_max = ctx.slices();
    let (t0, t1) = (ctx.times[0], ctx.times[k_max]);
    let step = (t1 - t0) / k_max as f64;
    if !(step >= 1e-3) {
        return Some((0, k_max));
    }
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for g in ctx.pair.gaps() {
        let ds = (p.distance(&g.start_anchor) - EPS_GEO).max(0.0);
        let de = (p.distance(&g.end_anchor) - EPS_GEO).max(0.0);
        lo = lo.max(g.t_s + ds / g.ms);
        hi = hi.min(g.t_e - de / g.ms);
    }
    let first = ((lo - t0) / step).floor() - 1.0;
    let last = ((hi - t0) / step).ceil() + 1.0;
    let first = first.clamp(0.0, k_max as f64) as usize;
    let last = last.clamp(-1.0, k_max as f64);
    if last < first as f64 {
        return None;
    }
    Some((first, last as usize))
}
