//! Iterative self-labeling over the information graph.
//!
//! Each iteration trains an ensemble of embedding spaces on the current
//! graph, predicts a type for every user from user-type similarity, and
//! promotes the `k` unlabeled users the ensemble agrees on most by adding
//! a user-type and a description-type edge. The loop stops once the share
//! of users whose predicted label changed since the previous iteration
//! drops below the churn threshold, or after `max_iterations`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::encoder::VocabEmbeddings;
use crate::graph::{build_graph, EdgeKind, GraphStats, InfoGraph, NodeId, View};
use crate::seed::rng_for;
use crate::trainer::{init_space, train_space, EmbeddingSpace, EpochLoss, TrainConfig};
use crate::weak_labeler::WeakLabeling;
use crate::{Error, Result, UserTypeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionSource {
    /// The user carried a weak label from the start.
    Weak,
    /// The user was promoted during the run.
    Inferred,
    Final,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub user_id: String,
    pub label: UserTypeId,
    /// `|σ₁ − σ₂|` for the softmax over the two type scores.
    pub confidence: f64,
    pub source: PredictionSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmConfig {
    /// Promotions per iteration.
    pub k: usize,
    pub churn_threshold: f64,
    pub ensemble_size: usize,
    pub max_iterations: usize,
    /// Continue each member from its previous parameters instead of
    /// re-initializing.
    pub warm_start: bool,
    pub train: TrainConfig,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig {
            k: 20,
            churn_threshold: 0.10,
            ensemble_size: 3,
            max_iterations: 10,
            warm_start: true,
            train: TrainConfig::default(),
        }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.ensemble_size == 0 || self.max_iterations == 0 {
            return Err(Error::InvalidParams(
                "k, ensemble_size and max_iterations must be positive".into(),
            ));
        }
        if !(self.churn_threshold > 0.0 && self.churn_threshold <= 1.0) {
            return Err(Error::InvalidParams("churn_threshold must be in (0, 1]".into()));
        }
        self.train.validate()
    }

    /// One training round, no promotions.
    pub fn single_pass(&self) -> EmConfig {
        EmConfig {
            max_iterations: 1,
            ..self.clone()
        }
    }
}

/// `|σ₁ − σ₂|` for `σ = softmax(s0, s1)`.
pub fn softmax_margin(s0: f64, s1: f64) -> f64 {
    ((s0 - s1) / 2.0).tanh().abs()
}

/// Scores every user against both types. Ties go to the first type.
pub fn predict_types(space: &EmbeddingSpace, corpus: &Corpus, inputs: &[Vec<usize>]) -> Result<Vec<Prediction>> {
    if corpus.len() != space.n_users || inputs.len() != space.n_users {
        return Err(Error::Shape(format!(
            "space has {} users, corpus {} and inputs {}",
            space.n_users,
            corpus.len(),
            inputs.len()
        )));
    }
    let t0 = space.vector(NodeId::user_type(UserTypeId::FIRST), inputs);
    let t1 = space.vector(NodeId::user_type(UserTypeId::SECOND), inputs);
    Ok(corpus
        .users
        .iter()
        .zip(space.user_vectors(inputs))
        .map(|(u, v)| {
            let s0: f64 = v.iter().zip(&t0).map(|(a, b)| a * b).sum();
            let s1: f64 = v.iter().zip(&t1).map(|(a, b)| a * b).sum();
            Prediction {
                user_id: u.user_id.clone(),
                label: if s1 > s0 { UserTypeId::SECOND } else { UserTypeId::FIRST },
                confidence: softmax_margin(s0, s1),
                source: PredictionSource::Final,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Promotion {
    pub user_id: String,
    pub label: UserTypeId,
    pub votes: usize,
    /// Mean confidence among the voting members.
    pub confidence: f64,
}

/// Promotes up to `k` users without a user-type edge. `ensemble[m][u]` is
/// member `m`'s prediction for corpus user `u`.
///
/// Each member nominates its `k` most confident unlabeled users. A
/// (user, label) pair gets one vote per member nominating it; pairs are
/// ranked by votes, then mean confidence, then user id, and each user is
/// promoted at most once, to its best-ranked label.
pub fn infer_edges(ensemble: &[Vec<Prediction>], graph: &mut InfoGraph, corpus: &Corpus, k: usize) -> Result<Vec<Promotion>> {
    let n = graph.n_users();
    if corpus.len() != n || ensemble.iter().any(|p| p.len() != n) {
        return Err(Error::Shape("ensemble predictions must cover every user".into()));
    }
    let unlabeled: Vec<usize> = (0..n).filter(|&u| graph.user_type_of(u).is_none()).collect();
    // (user, label) -> (votes, confidence sum)
    let mut tally: BTreeMap<(usize, UserTypeId), (usize, f64)> = BTreeMap::new();
    for member in ensemble {
        let mut ranked = unlabeled.clone();
        ranked.sort_by(|&a, &b| {
            member[b]
                .confidence
                .total_cmp(&member[a].confidence)
                .then_with(|| corpus.users[a].user_id.cmp(&corpus.users[b].user_id))
        });
        for &u in ranked.iter().take(k) {
            let e = tally.entry((u, member[u].label)).or_insert((0, 0.0));
            e.0 += 1;
            e.1 += member[u].confidence;
        }
    }
    let mut candidates: Vec<(usize, UserTypeId, usize, f64)> = tally
        .into_iter()
        .map(|((u, l), (votes, sum))| (u, l, votes, sum / votes as f64))
        .collect();
    candidates.sort_by(|a, b| {
        b.2.cmp(&a.2)
            .then_with(|| b.3.total_cmp(&a.3))
            .then_with(|| corpus.users[a.0].user_id.cmp(&corpus.users[b.0].user_id))
            .then_with(|| a.1.cmp(&b.1))
    });
    let mut promoted = Vec::new();
    let mut taken = vec![false; n];
    for (u, label, votes, confidence) in candidates {
        if promoted.len() == k {
            break;
        }
        if taken[u] {
            continue;
        }
        taken[u] = true;
        let t = NodeId::user_type(label);
        graph.add_inferred_edge(NodeId::user(u), t, EdgeKind::UserType)?;
        graph.add_inferred_edge(NodeId::desc(u), t, EdgeKind::DescType)?;
        promoted.push(Promotion {
            user_id: corpus.users[u].user_id.clone(),
            label,
            votes,
            confidence,
        });
    }
    Ok(promoted)
}

/// Starting parameters for ensemble member `member`: the member's previous
/// space under warm start, otherwise a fresh initialization that is the
/// same in every iteration.
pub fn warm_start_policy(
    previous: Option<&EmbeddingSpace>,
    warm_start: bool,
    member: usize,
    vocab: &VocabEmbeddings,
    corpus: &Corpus,
    config: &TrainConfig,
) -> Result<EmbeddingSpace> {
    match previous {
        Some(space) if warm_start => Ok(space.clone()),
        _ => init_space(vocab, corpus, config, &format!("em/member/{member}/init")),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Per ensemble member.
    pub losses: Vec<Vec<EpochLoss>>,
    /// Graph the members were trained on.
    pub graph: GraphStats,
    /// Share of users whose canonical label changed; absent in iteration 1.
    pub churn: Option<f64>,
    pub promoted: Vec<Promotion>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmRunReport {
    pub view: View,
    pub type_names: [String; 2],
    pub iterations: Vec<IterationRecord>,
    pub iterations_run: usize,
    pub stop_reason: StopReason,
    pub final_graph: GraphStats,
    /// One per corpus user, in corpus order.
    pub predictions: Vec<Prediction>,
    /// Promoted users whose final label differs from the promoted one.
    pub disagreements: Vec<String>,
}

impl EmRunReport {
    pub fn promotions(&self) -> impl Iterator<Item = (usize, &Promotion)> {
        self.iterations
            .iter()
            .flat_map(|it| it.promoted.iter().map(move |p| (it.iteration, p)))
    }

    pub fn label_of(&self, user_id: &str) -> Option<UserTypeId> {
        self.predictions.iter().find(|p| p.user_id == user_id).map(|p| p.label)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, serde_json::to_string_pretty(self)?).map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<EmRunReport> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// `iteration,user_id,label,votes,confidence`
    pub fn write_promotions_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
        let res: std::result::Result<(), csv::Error> = (|| {
            w.write_record(["iteration", "user_id", "label", "votes", "confidence"])?;
            for (iteration, p) in self.promotions() {
                w.write_record([
                    iteration.to_string(),
                    p.user_id.clone(),
                    self.type_names[p.label.index()].clone(),
                    p.votes.to_string(),
                    p.confidence.to_string(),
                ])?;
            }
            w.flush()?;
            Ok(())
        })();
        res.map_err(|e| csv_error(path, e))
    }
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: format!("{other:?}"),
        },
    }
}

/// The report plus the final graph and canonical space.
#[derive(Debug, Clone)]
pub struct EmOutput {
    pub report: EmRunReport,
    pub graph: InfoGraph,
    pub space: EmbeddingSpace,
    pub inputs: Vec<Vec<usize>>,
}

pub fn run_em(
    corpus: &Corpus,
    weak: &WeakLabeling,
    vocab: &VocabEmbeddings,
    config: &EmConfig,
    view: View,
) -> Result<EmOutput> {
    config.validate()?;
    if weak.is_empty() {
        return Err(Error::InvalidParams("EM needs at least one weakly labeled user".into()));
    }
    let mut graph = build_graph(corpus, weak, view)?;
    if graph.edges().is_empty() {
        return Err(Error::EmptyGraph);
    }
    let mut spaces: Vec<Option<EmbeddingSpace>> = vec![None; config.ensemble_size];
    let mut inputs = None;
    let mut previous: Option<Vec<Prediction>> = None;
    let mut iterations = Vec::new();
    let mut stop_reason = StopReason::MaxIterations;

    for iteration in 1..=config.max_iterations {
        let stats = graph.stats();
        let mut losses = Vec::with_capacity(config.ensemble_size);
        let mut ensemble = Vec::with_capacity(config.ensemble_size);
        for (m, slot) in spaces.iter_mut().enumerate() {
            let mut space = warm_start_policy(slot.as_ref(), config.warm_start, m, vocab, corpus, &config.train)?;
            let inputs = match &inputs {
                Some(i) => i,
                None => inputs.insert(space.user_inputs(corpus)?),
            };
            let mut rng = rng_for(config.train.seed, &format!("em/member/{m}/iter/{iteration}"));
            losses.push(train_space(&mut space, &graph, inputs, &config.train, &mut rng)?);
            ensemble.push(predict_types(&space, corpus, inputs)?);
            *slot = Some(space);
        }
        log::info!(
            "iteration {iteration}: {} edges, final loss {:.4}",
            stats.edges(),
            losses[0].last().map_or(f64::NAN, |l| l.loss.total)
        );
        let churn = previous.as_ref().map(|prev| {
            let changed = prev.iter().zip(&ensemble[0]).filter(|(a, b)| a.label != b.label).count();
            changed as f64 / corpus.len() as f64
        });
        let converged = churn.is_some_and(|c| c < config.churn_threshold);
        let promoted = if converged || iteration == config.max_iterations {
            Vec::new()
        } else {
            infer_edges(&ensemble, &mut graph, corpus, config.k)?
        };
        iterations.push(IterationRecord {
            iteration,
            losses,
            graph: stats,
            churn,
            promoted,
        });
        previous = Some(ensemble.swap_remove(0));
        if converged {
            stop_reason = StopReason::Converged;
            break;
        }
    }

    let mut predictions = previous.expect("at least one iteration");
    let mut promoted_label = BTreeMap::new();
    for p in iterations.iter().flat_map(|it| &it.promoted) {
        promoted_label.insert(p.user_id.as_str(), p.label);
    }
    let mut disagreements = Vec::new();
    for p in &mut predictions {
        if weak.get(&p.user_id).is_some() {
            p.source = PredictionSource::Weak;
        } else if let Some(&l) = promoted_label.get(p.user_id.as_str()) {
            p.source = PredictionSource::Inferred;
            if l != p.label {
                disagreements.push(p.user_id.clone());
            }
        }
    }
    let space = spaces.swap_remove(0).expect("trained");
    let report = EmRunReport {
        view,
        type_names: corpus.type_names.clone(),
        iterations_run: iterations.len(),
        iterations,
        stop_reason,
        final_graph: graph.stats(),
        predictions,
        disagreements,
    };
    Ok(EmOutput {
        report,
        graph,
        space,
        inputs: inputs.expect("inputs computed"),
    })
}
