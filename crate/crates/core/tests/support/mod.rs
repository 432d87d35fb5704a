//! Independent oracles shared by the integration tests and the acceptance
//! suite.
#![allow(dead_code)]

use rand::Rng;
use std::collections::BTreeSet;

use usertype::corpus::{Corpus, TokenSeq};
use usertype::encoder::{
    encode_rows, encoder_backward, EncoderConfig, EncoderParams, EncoderVariant, VocabEmbeddings,
};
use usertype::graph::{EdgeKind, InfoGraph, NodeId, View};
use usertype::seed::Rng as SeedRng;
use usertype::trainer::{evaluate_pairs, EmbeddingSpace, ObjectiveWeights, TrainConfig, TrainingPair, Weighting};
use usertype::weak_labeler::{RuleOutcome, RuleSet, WeakLabeling};
use usertype::UserTypeId;

pub const FD_STEP: f64 = 1e-5;
pub const GRAD_TOL: f64 = 1e-4;
/// Below this magnitude gradients are compared absolutely.
const GRAD_FLOOR: f64 = 1e-6;

pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(GRAD_FLOOR)
}

#[derive(Debug, Default, Clone, Copy)]
pub struct GradReport {
    pub checked: usize,
    pub worst: f64,
}

impl GradReport {
    fn record(&mut self, analytic: f64, numeric: f64) {
        self.checked += 1;
        self.worst = self.worst.max(rel_err(analytic, numeric));
    }

    pub fn merge(&mut self, other: GradReport) {
        self.checked += other.checked;
        self.worst = self.worst.max(other.worst);
    }

    pub fn ok(&self) -> bool {
        self.checked > 0 && self.worst < GRAD_TOL
    }
}

/// Central difference of `f(h)`, where `h` is the offset applied to one
/// coordinate.
fn central(mut f: impl FnMut(f64) -> f64) -> f64 {
    (f(FD_STEP) - f(-FD_STEP)) / (2.0 * FD_STEP)
}

pub fn random_vocab(rng: &mut impl Rng, words: usize, dim: usize) -> VocabEmbeddings {
    let tokens = (0..words).map(|i| format!("w{i}")).collect();
    let rows = (0..words)
        .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    VocabEmbeddings::from_rows(tokens, rows).unwrap()
}

fn randomize(params: &mut EncoderParams, rng: &mut impl Rng, scale: f64) {
    for buf in params.buffers_mut() {
        for x in buf.iter_mut() {
            *x = rng.gen_range(-scale..scale);
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// One random trial for an encoder: checks d(g·enc)/dθ for every encoder
/// parameter and every word-vector entry used by the input.
pub fn encoder_trial(variant: EncoderVariant, rng: &mut SeedRng) -> GradReport {
    let d_in = rng.gen_range(2..5);
    let hidden = rng.gen_range(2..4);
    let words = 6;
    let vocab = random_vocab(rng, words, d_in);
    let config = EncoderConfig {
        variant,
        hidden,
        ..Default::default()
    };
    let out_dim = match variant {
        EncoderVariant::MeanPool => rng.gen_range(2..5),
        EncoderVariant::Lstm => hidden,
        EncoderVariant::BiLstm => 2 * hidden,
    };
    let mut params = EncoderParams::init(&config, d_in, out_dim, rng).unwrap();
    randomize(&mut params, rng, 0.6);
    let len = rng.gen_range(1..7);
    // the last row is the zero out-of-vocabulary row
    let rows: Vec<usize> = (0..len).map(|_| rng.gen_range(0..=words)).collect();
    let g: Vec<f64> = (0..out_dim).map(|_| rng.gen_range(-1.0..1.0)).collect();

    let (_, act) = encode_rows(&vocab, &params, rows.clone());
    let (grads, dx) = encoder_backward(&vocab, &params, &act, &g).unwrap();
    let mut report = GradReport::default();

    let grad_bufs: Vec<Vec<f64>> = grads.buffers().iter().map(|b| b.to_vec()).collect();
    for (b, gb) in grad_bufs.iter().enumerate() {
        for (i, &analytic) in gb.iter().enumerate() {
            let numeric = central(|h| {
                let mut p = params.clone();
                p.buffers_mut()[b][i] += h;
                dot(&encode_rows(&vocab, &p, rows.clone()).0, &g)
            });
            report.record(analytic, numeric);
        }
    }

    // word vectors: sum position gradients per distinct row
    let distinct: BTreeSet<usize> = rows.iter().copied().filter(|&r| r < words).collect();
    for &r in &distinct {
        for j in 0..d_in {
            let analytic: f64 = rows
                .iter()
                .zip(&dx)
                .filter(|(&row, _)| row == r)
                .map(|(_, d)| d[j])
                .sum();
            let numeric = central(|h| {
                let mut v = vocab.clone();
                v.matrix[r * d_in + j] += h;
                dot(&encode_rows(&v, &params, rows.clone()).0, &g)
            });
            report.record(analytic, numeric);
        }
    }
    report
}

/// The four-node graph: one user, its description and the two types, with
/// the user and its description both linked to the first type.
pub fn four_node_graph() -> InfoGraph {
    let mut g = InfoGraph::empty(1, View::DesNet);
    let t0 = NodeId::user_type(UserTypeId(0));
    g.add_observed_edge(NodeId::desc(0), NodeId::user(0), EdgeKind::DescUser).unwrap();
    g.add_observed_edge(NodeId::user(0), t0, EdgeKind::UserType).unwrap();
    g.add_observed_edge(NodeId::desc(0), t0, EdgeKind::DescType).unwrap();
    g
}

/// Positive pairs of `graph` in both directions, each with `n` negatives
/// chosen by scanning for same-kind nodes not adjacent to the anchor.
pub fn fixed_pairs(graph: &InfoGraph, n: usize, rng: &mut impl Rng) -> Vec<TrainingPair> {
    let mut out = Vec::new();
    for e in graph.edges() {
        for (a, p) in [(e.a, e.b), (e.b, e.a)] {
            let pool: Vec<NodeId> = (0..graph.node_count())
                .map(|i| graph.node_at(i))
                .filter(|c| c.kind == p.kind && *c != a && !graph.has_edge(a, *c))
                .collect();
            let negatives = if pool.is_empty() {
                Vec::new()
            } else {
                (0..n).map(|_| pool[rng.gen_range(0..pool.len())]).collect()
            };
            out.push(TrainingPair {
                anchor: a,
                positive: p,
                kind: e.kind,
                negatives,
            });
        }
    }
    out
}

/// Random space over `graph` with trainable word vectors.
pub fn random_space(
    graph: &InfoGraph,
    variant: EncoderVariant,
    rng: &mut SeedRng,
) -> (EmbeddingSpace, Vec<Vec<usize>>) {
    let words = 5;
    let d_in = 3;
    let vocab = random_vocab(rng, words, d_in);
    let hidden = 2;
    let dim = match variant {
        EncoderVariant::MeanPool => 4,
        EncoderVariant::Lstm => hidden,
        EncoderVariant::BiLstm => 2 * hidden,
    };
    let config = TrainConfig {
        dim,
        encoder: EncoderConfig {
            variant,
            hidden,
            trainable_word_vectors: true,
            ..Default::default()
        },
        ..Default::default()
    };
    let mut space = EmbeddingSpace::init(vocab, graph.n_users(), &config, rng).unwrap();
    for x in space.free.iter_mut() {
        *x = rng.gen_range(-1.0..1.0);
    }
    randomize(&mut space.encoder, rng, 0.6);
    let inputs = (0..graph.n_users())
        .map(|_| (0..rng.gen_range(1..5)).map(|_| rng.gen_range(0..words)).collect())
        .collect();
    (space, inputs)
}

/// Analytic vs central-difference gradient of the loss over `pairs` with
/// respect to every free vector, encoder parameter and word-vector entry.
pub fn loss_gradient_check(
    space: &EmbeddingSpace,
    inputs: &[Vec<usize>],
    pairs: &[TrainingPair],
    weights: &ObjectiveWeights,
    weighting: Weighting,
) -> GradReport {
    let (_, grads) = evaluate_pairs(space, inputs, pairs, weights, weighting, true).unwrap();
    let grads = grads.unwrap();
    let mut report = GradReport::default();
    let loss = |s: &EmbeddingSpace| evaluate_pairs(s, inputs, pairs, weights, weighting, false).unwrap().0.objective;
    for (i, &analytic) in grads.free.iter().enumerate() {
        let numeric = central(|h| {
            let mut s = space.clone();
            s.free[i] += h;
            loss(&s)
        });
        report.record(analytic, numeric);
    }
    for (b, gb) in grads.encoder.buffers().iter().enumerate() {
        for (i, &analytic) in gb.iter().enumerate() {
            let numeric = central(|h| {
                let mut s = space.clone();
                s.encoder.buffers_mut()[b][i] += h;
                loss(&s)
            });
            report.record(analytic, numeric);
        }
    }
    let words = grads.words.as_ref().expect("trainable word vectors");
    for (i, &analytic) in words.iter().enumerate() {
        let numeric = central(|h| {
            let mut s = space.clone();
            s.vocab.matrix[i] += h;
            loss(&s)
        });
        report.record(analytic, numeric);
    }
    report
}

pub fn random_weights(rng: &mut impl Rng) -> ObjectiveWeights {
    ObjectiveWeights {
        desc_type: rng.gen_range(0.1..2.0),
        user_type: rng.gen_range(0.1..2.0),
        desc_user: rng.gen_range(0.1..2.0),
        user_user: rng.gen_range(0.1..2.0),
    }
}

/// Node and per-kind edge counts predicted from the corpus alone.
#[derive(Debug, PartialEq, Eq)]
pub struct SchemaCounts {
    pub nodes: usize,
    pub edges: [usize; 4],
}

pub fn expected_schema(corpus: &Corpus, weak: &WeakLabeling, view: View) -> SchemaCounts {
    let n = corpus.len();
    let mut pairs = BTreeSet::new();
    for (u, user) in corpus.users.iter().enumerate() {
        for &m in &user.mentions {
            if m != u {
                pairs.insert((u.min(m), u.max(m)));
            }
        }
    }
    let labeled = weak.labels.len();
    let mut edges = [0; 4];
    edges[EdgeKind::DescType.index()] = labeled;
    edges[EdgeKind::UserType.index()] = labeled;
    if view != View::Net {
        edges[EdgeKind::DescUser.index()] = n;
    }
    if view != View::Des {
        edges[EdgeKind::UserUser.index()] = pairs.len();
    }
    SchemaCounts { nodes: 2 * n + 2, edges }
}

pub fn actual_schema(graph: &InfoGraph) -> SchemaCounts {
    let mut edges = [0; 4];
    for e in graph.edges() {
        edges[e.kind.index()] += 1;
    }
    SchemaCounts {
        nodes: graph.node_count(),
        edges,
    }
}

/// Rule matching by linear scans over the token list.
pub fn brute_force_outcome(rules: &RuleSet, tokens: &[String]) -> RuleOutcome {
    let has = |kw: &[String]| kw.iter().all(|t| tokens.iter().any(|x| x == t));
    let mut hits: Vec<(usize, usize)> = Vec::new();
    for (id, rule) in rules.rules.iter().enumerate() {
        let trigger = rule.trigger_any.iter().any(|k| has(&k.0));
        let require = rule.require_any.is_empty() || rule.require_any.iter().any(|k| has(&k.0));
        let exclude = rule.exclude_any.iter().any(|k| has(&k.0));
        if trigger && require && !exclude {
            hits.push((id, rule.label));
        }
    }
    let labels: BTreeSet<usize> = hits.iter().map(|h| h.1).collect();
    match labels.len() {
        0 => RuleOutcome::NoMatch,
        1 => RuleOutcome::Match {
            label: hits[0].1,
            rule_id: hits[0].0,
        },
        _ => RuleOutcome::Conflict,
    }
}

/// A random description drawn mostly from the rule keywords.
pub fn random_description(rules: &RuleSet, rng: &mut impl Rng) -> TokenSeq {
    let mut pool: Vec<String> = rules.keywords().flat_map(|k| k.0.iter().cloned()).collect();
    pool.sort();
    pool.dedup();
    pool.extend(["morning", "coffee", "love", "life", "mom", "travel"].map(String::from));
    let len = rng.gen_range(0..10);
    TokenSeq::new((0..len).map(|_| pool[rng.gen_range(0..pool.len())].clone()).collect())
}
