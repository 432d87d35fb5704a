use rand::Rng;

use crate::graph::{InfoGraph, NodeId};

/// Draws `n` nodes of the positive's kind, uniformly with replacement,
/// among those that are neither the anchor nor adjacent to it. Returns an
/// empty list when no such node exists.
pub fn sample_negatives(
    graph: &InfoGraph,
    anchor: NodeId,
    positive: NodeId,
    n: usize,
    rng: &mut impl Rng,
) -> Vec<NodeId> {
    let kind = positive.kind;
    let count = graph.count_of(kind);
    let blocked = graph.degree_to_kind(anchor, kind) + usize::from(anchor.kind == kind);
    let valid = count.saturating_sub(blocked);
    if valid == 0 || n == 0 {
        return Vec::new();
    }
    let ok = |c: NodeId| c != anchor && !graph.has_edge(anchor, c);
    if valid * 4 >= count {
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let c = NodeId {
                kind,
                index: rng.gen_range(0..count),
            };
            if ok(c) {
                out.push(c);
            }
        }
        out
    } else {
        let candidates: Vec<NodeId> = (0..count)
            .map(|index| NodeId { kind, index })
            .filter(|&c| ok(c))
            .collect();
        (0..n)
            .map(|_| candidates[rng.gen_range(0..candidates.len())])
            .collect()
    }
}
