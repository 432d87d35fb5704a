//! Joint embedding of the information graph.
//!
//! Every edge gives two positive pairs (one per direction). Each positive
//! pair `(anchor, positive)` is scored against `negatives_per_positive`
//! nodes of the positive's kind that do not touch the anchor:
//!
//! ```text
//! loss(pair) = mean_n ln(1 + exp(φ(a)·φ(n) − φ(a)·φ(p)))
//! E_t        = mean of loss(pair) over the pairs of edge kind t
//! total      = Σ_t λ_t E_t
//! ```
//!
//! Training shuffles the pairs each epoch, takes Adam steps on mini-batch
//! means, and stops after `max_epochs` or once the epoch loss has not
//! improved for `patience` epochs. User vectors are re-encoded from tweets
//! whenever they are used, so gradients reach the encoder.

mod adam;
mod baseline;
mod loss;
mod sampling;
mod space;

pub use adam::{adam_step, AdamState, BETA1, BETA2, EPSILON};
pub use baseline::{train_supervised_baseline, BaselineHistory, SupervisedClassifier};
pub use loss::{pair_loss, pair_loss_slope};
pub use sampling::sample_negatives;
pub use space::EmbeddingSpace;

use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::encoder::{encoder_backward, EncoderActivation, EncoderConfig, EncoderParams, VocabEmbeddings};
use crate::graph::{EdgeKind, InfoGraph, NodeId, NodeKind};
use crate::seed::{rng_for, Rng};
use crate::{Error, Result};

/// λ per edge kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ObjectiveWeights {
    pub desc_type: f64,
    pub user_type: f64,
    pub desc_user: f64,
    pub user_user: f64,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        ObjectiveWeights::uniform(1.0)
    }
}

impl ObjectiveWeights {
    pub fn uniform(w: f64) -> Self {
        ObjectiveWeights {
            desc_type: w,
            user_type: w,
            desc_user: w,
            user_user: w,
        }
    }

    pub fn get(&self, kind: EdgeKind) -> f64 {
        match kind {
            EdgeKind::DescType => self.desc_type,
            EdgeKind::UserType => self.user_type,
            EdgeKind::DescUser => self.desc_user,
            EdgeKind::UserUser => self.user_user,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        ObjectiveWeights {
            desc_type: self.desc_type * c,
            user_type: self.user_type * c,
            desc_user: self.desc_user * c,
            user_user: self.user_user * c,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// Node vector dimension.
    pub dim: usize,
    pub encoder: EncoderConfig,
    pub objective_weights: ObjectiveWeights,
    pub negatives_per_positive: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 300,
            encoder: EncoderConfig::default(),
            objective_weights: ObjectiveWeights::default(),
            negatives_per_positive: 5,
            learning_rate: 0.001,
            batch_size: 16,
            max_epochs: 100,
            patience: 10,
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// Settings for the supervised LSTM baseline: forward LSTM with 150
    /// hidden units, learning rate 0.01, 20 epochs.
    pub fn baseline() -> TrainConfig {
        TrainConfig {
            dim: 150,
            encoder: EncoderConfig {
                variant: crate::encoder::EncoderVariant::Lstm,
                hidden: 150,
                ..Default::default()
            },
            learning_rate: 0.01,
            max_epochs: 20,
            patience: 20,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.to_string()));
        if self.negatives_per_positive == 0 {
            return bad("negatives_per_positive must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if self.batch_size == 0 || self.max_epochs == 0 {
            return bad("batch_size and max_epochs must be positive");
        }
        if self.patience == 0 || self.patience > self.max_epochs {
            return bad("patience must be in 1..=max_epochs");
        }
        let w = self.objective_weights;
        if [w.desc_type, w.user_type, w.desc_user, w.user_user]
            .iter()
            .any(|x| !x.is_finite() || *x < 0.0)
        {
            return bad("objective weights must be finite and non-negative");
        }
        self.encoder.check_output_dim(self.dim)
    }
}

/// A positive pair with its sampled negatives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingPair {
    pub anchor: NodeId,
    pub positive: NodeId,
    pub kind: EdgeKind,
    pub negatives: Vec<NodeId>,
}

/// Both directions of every edge, in edge-list order.
pub fn positive_pairs(graph: &InfoGraph) -> Vec<TrainingPair> {
    graph
        .edges()
        .iter()
        .flat_map(|e| {
            [(e.a, e.b), (e.b, e.a)].map(|(anchor, positive)| TrainingPair {
                anchor,
                positive,
                kind: e.kind,
                negatives: Vec::new(),
            })
        })
        .collect()
}

pub fn attach_negatives(graph: &InfoGraph, pairs: &mut [TrainingPair], n: usize, rng: &mut Rng) {
    for p in pairs {
        p.negatives = sample_negatives(graph, p.anchor, p.positive, n, rng);
    }
}

/// Per-objective means and their weighted sum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub total: f64,
    /// `E_t` per [`EdgeKind::index`]; 0 for kinds without pairs.
    pub per_objective: [f64; 4],
    pub pair_counts: [usize; 4],
    /// Value of the differentiated objective under the chosen
    /// [`Weighting`]; equals `total` for [`Weighting::PerObjectiveMean`].
    #[serde(skip)]
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    #[serde(flatten)]
    pub loss: LossBreakdown,
}

/// How pair losses are combined into the differentiated objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    /// `Σ_pairs λ_t loss(pair) / |pairs|` (mini-batch training).
    BatchMean,
    /// `Σ_t λ_t mean_{pairs of t} loss(pair)` (the reported total).
    PerObjectiveMean,
}

/// Gradients for every parameter of an [`EmbeddingSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceGrads {
    pub free: Vec<f64>,
    pub encoder: EncoderParams,
    pub words: Option<Vec<f64>>,
}

/// Evaluates the loss of `pairs` (pairs without negatives are skipped) and,
/// if asked, its exact gradient.
pub fn evaluate_pairs(
    space: &EmbeddingSpace,
    inputs: &[Vec<usize>],
    pairs: &[TrainingPair],
    weights: &ObjectiveWeights,
    weighting: Weighting,
    want_grad: bool,
) -> Result<(LossBreakdown, Option<SpaceGrads>)> {
    let d = space.dim;
    let mut counts = [0usize; 4];
    for p in pairs.iter().filter(|p| !p.negatives.is_empty()) {
        counts[p.kind.index()] += 1;
    }
    let n_valid: usize = counts.iter().sum();

    // Encode each user once.
    let mut slot_of = vec![usize::MAX; space.n_users];
    let mut users: Vec<(usize, Vec<f64>, EncoderActivation)> = Vec::new();
    let mut touch = |node: NodeId, users: &mut Vec<(usize, Vec<f64>, EncoderActivation)>| {
        if node.kind == NodeKind::User && slot_of[node.index] == usize::MAX {
            slot_of[node.index] = users.len();
            let (v, act) = space.encode(&inputs[node.index]);
            users.push((node.index, v, act));
        }
    };
    for p in pairs.iter().filter(|p| !p.negatives.is_empty()) {
        touch(p.anchor, &mut users);
        touch(p.positive, &mut users);
        for &n in &p.negatives {
            touch(n, &mut users);
        }
    }

    let vec_of = |node: NodeId| -> &[f64] {
        match space.free_row(node) {
            Some(r) => space.free_vector(r),
            None => &users[slot_of[node.index]].1,
        }
    };

    let mut free_grad = if want_grad { vec![0.0; space.free.len()] } else { Vec::new() };
    let mut user_grad = if want_grad { vec![vec![0.0; d]; users.len()] } else { Vec::new() };
    let mut sums = [0.0f64; 4];

    for p in pairs.iter().filter(|p| !p.negatives.is_empty()) {
        let a = vec_of(p.anchor);
        let pos = vec_of(p.positive);
        let s_pos = dot(a, pos);
        let m = p.negatives.len() as f64;
        let mut pair = 0.0;
        let mut slopes = Vec::with_capacity(p.negatives.len());
        for &n in &p.negatives {
            let s_neg = dot(a, vec_of(n));
            pair += pair_loss(s_pos, s_neg);
            slopes.push(pair_loss_slope(s_pos, s_neg));
        }
        let k = p.kind.index();
        sums[k] += pair / m;
        if !want_grad {
            continue;
        }
        let lambda = weights.get(p.kind);
        let w = match weighting {
            Weighting::BatchMean => lambda / n_valid as f64,
            Weighting::PerObjectiveMean => lambda / counts[k] as f64,
        } / m;
        if w == 0.0 {
            continue;
        }
        // dL/da = w Σ σ_j (n_j − p), dL/dp = −w Σ σ_j a, dL/dn_j = w σ_j a
        let mut ga = vec![0.0; d];
        let sigma_sum: f64 = slopes.iter().sum();
        axpy(&mut ga, -w * sigma_sum, pos);
        for (&n, &s) in p.negatives.iter().zip(&slopes) {
            axpy(&mut ga, w * s, vec_of(n));
        }
        let a_vec = a.to_vec();
        let mut add = |node: NodeId, scale: f64, v: &[f64]| match space.free_row(node) {
            Some(r) => axpy(&mut free_grad[r * d..(r + 1) * d], scale, v),
            None => axpy(&mut user_grad[slot_of[node.index]], scale, v),
        };
        add(p.anchor, 1.0, &ga);
        add(p.positive, -w * sigma_sum, &a_vec);
        for (&n, &s) in p.negatives.iter().zip(&slopes) {
            add(n, w * s, &a_vec);
        }
    }

    let mut breakdown = LossBreakdown {
        pair_counts: counts,
        ..Default::default()
    };
    for k in 0..4 {
        if counts[k] > 0 {
            breakdown.per_objective[k] = sums[k] / counts[k] as f64;
            breakdown.total += weights.get(EdgeKind::ALL[k]) * breakdown.per_objective[k];
            if n_valid > 0 {
                breakdown.objective += weights.get(EdgeKind::ALL[k]) * sums[k] / n_valid as f64;
            }
        }
    }
    if weighting == Weighting::PerObjectiveMean {
        breakdown.objective = breakdown.total;
    }
    if !want_grad {
        return Ok((breakdown, None));
    }

    let mut encoder = space.encoder.zeros_like();
    let mut words = space.vocab.trainable.then(|| vec![0.0; space.vocab.matrix.len()]);
    let d_in = space.vocab.dim();
    for ((_, _, act), g) in users.iter().zip(&user_grad) {
        if act.rows.is_empty() || g.iter().all(|&x| x == 0.0) {
            continue;
        }
        let (pg, dx) = encoder_backward(&space.vocab, &space.encoder, act, g)?;
        encoder.add_assign(&pg)?;
        if let Some(words) = words.as_mut() {
            for (&r, row) in act.rows.iter().zip(&dx) {
                axpy(&mut words[r * d_in..(r + 1) * d_in], 1.0, row);
            }
        }
    }
    // the out-of-vocabulary row stays zero
    if let Some(words) = words.as_mut() {
        let oov = space.vocab.oov_row();
        words[oov * d_in..(oov + 1) * d_in].fill(0.0);
    }
    Ok((
        breakdown,
        Some(SpaceGrads {
            free: free_grad,
            encoder,
            words,
        }),
    ))
}

/// `Σ_t λ_t E_t` over every positive pair of the graph, with negatives
/// drawn from `rng` in edge-list order.
pub fn total_loss(
    space: &EmbeddingSpace,
    graph: &InfoGraph,
    inputs: &[Vec<usize>],
    config: &TrainConfig,
    rng: &mut Rng,
) -> Result<LossBreakdown> {
    let mut pairs = positive_pairs(graph);
    attach_negatives(graph, &mut pairs, config.negatives_per_positive, rng);
    Ok(evaluate_pairs(space, inputs, &pairs, &config.objective_weights, Weighting::PerObjectiveMean, false)?.0)
}

/// Adam moments for every parameter buffer of a space.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    free: AdamState,
    encoder: Vec<AdamState>,
    words: Option<AdamState>,
}

impl OptimizerState {
    pub fn new(space: &EmbeddingSpace) -> OptimizerState {
        OptimizerState {
            free: AdamState::new(space.free.len()),
            encoder: space.encoder.buffers().iter().map(|b| AdamState::new(b.len())).collect(),
            words: space.vocab.trainable.then(|| AdamState::new(space.vocab.matrix.len())),
        }
    }

    pub fn step(&mut self, space: &mut EmbeddingSpace, grads: &SpaceGrads, lr: f64) -> Result<()> {
        adam_step(&mut space.free, &grads.free, &mut self.free, lr)?;
        let gbufs = grads.encoder.buffers();
        for ((p, g), s) in space.encoder.buffers_mut().into_iter().zip(gbufs).zip(&mut self.encoder) {
            adam_step(p, g, s, lr)?;
        }
        if let (Some(g), Some(s)) = (&grads.words, &mut self.words) {
            adam_step(&mut space.vocab.matrix, g, s, lr)?;
        }
        Ok(())
    }
}

/// Trains `space` in place on `graph`. Returns the per-epoch losses.
pub fn train_space(
    space: &mut EmbeddingSpace,
    graph: &InfoGraph,
    inputs: &[Vec<usize>],
    config: &TrainConfig,
    rng: &mut Rng,
) -> Result<Vec<EpochLoss>> {
    config.validate()?;
    if graph.edges().is_empty() {
        return Err(Error::EmptyGraph);
    }
    let mut opt = OptimizerState::new(space);
    let mut pairs = positive_pairs(graph);
    let mut history = Vec::new();
    let mut best = f64::INFINITY;
    let mut since_best = 0;
    for epoch in 1..=config.max_epochs {
        pairs.shuffle(rng);
        attach_negatives(graph, &mut pairs, config.negatives_per_positive, rng);
        for p in &pairs {
            for &n in &p.negatives {
                assert!(!graph.has_edge(p.anchor, n), "negative {n} touches anchor {}", p.anchor);
            }
        }
        let mut sums = [0.0; 4];
        let mut counts = [0usize; 4];
        for batch in pairs.chunks(config.batch_size) {
            let (loss, grads) = evaluate_pairs(space, inputs, batch, &config.objective_weights, Weighting::BatchMean, true)?;
            for k in 0..4 {
                sums[k] += loss.per_objective[k] * loss.pair_counts[k] as f64;
                counts[k] += loss.pair_counts[k];
            }
            if let Some(g) = grads {
                opt.step(space, &g, config.learning_rate)?;
            }
        }
        let mut loss = LossBreakdown {
            pair_counts: counts,
            ..Default::default()
        };
        for k in 0..4 {
            if counts[k] > 0 {
                loss.per_objective[k] = sums[k] / counts[k] as f64;
                loss.total += config.objective_weights.get(EdgeKind::ALL[k]) * loss.per_objective[k];
            }
        }
        if !loss.total.is_finite() {
            return Err(Error::InvalidParams(format!("loss diverged at epoch {epoch}")));
        }
        history.push(EpochLoss { epoch, loss });
        if loss.total < best {
            best = loss.total;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= config.patience {
                break;
            }
        }
    }
    Ok(history)
}

/// Fresh space for `corpus`, seeded from `config.seed`.
pub fn init_space(vocab: &VocabEmbeddings, corpus: &Corpus, config: &TrainConfig, stage: &str) -> Result<EmbeddingSpace> {
    let mut rng = rng_for(config.seed, stage);
    EmbeddingSpace::init(vocab.clone(), corpus.len(), config, &mut rng)
}

pub fn train_embeddings(
    graph: &InfoGraph,
    corpus: &Corpus,
    vocab: &VocabEmbeddings,
    config: &TrainConfig,
) -> Result<(EmbeddingSpace, Vec<EpochLoss>)> {
    config.validate()?;
    if graph.edges().is_empty() {
        return Err(Error::EmptyGraph);
    }
    let mut space = init_space(vocab, corpus, config, "train/init")?;
    let inputs = space.user_inputs(corpus)?;
    let mut rng = rng_for(config.seed, "train/epochs");
    let history = train_space(&mut space, graph, &inputs, config, &mut rng)?;
    Ok((space, history))
}

/// `epoch,total,desc_type,user_type,desc_user,user_user`
pub fn write_loss_csv(history: &[EpochLoss], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("epoch,total,desc_type,user_type,desc_user,user_user\n");
    for h in history {
        let p = h.loss.per_objective;
        out.push_str(&format!("{},{},{},{},{},{}\n", h.epoch, h.loss.total, p[0], p[1], p[2], p[3]));
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}
