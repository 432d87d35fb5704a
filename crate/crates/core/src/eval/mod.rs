//! Holdout evaluation, the view ablation and embedding export.

pub mod metrics;

use std::path::Path;

pub use metrics::{accuracy, macro_f1, ConfusionMatrix};
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, SynthParams};
use crate::em::{csv_error, run_em, EmConfig, EmRunReport, Prediction};
use crate::encoder::VocabEmbeddings;
use crate::graph::{InfoGraph, NodeKind, View};
use crate::trainer::{EmbeddingSpace, SupervisedClassifier};
use crate::weak_labeler::WeakLabeling;
use crate::{Error, Result, UserTypeId};

/// Anything that labels every user of a corpus.
pub trait UserClassifier {
    fn predict_users(&self, corpus: &Corpus) -> Result<Vec<UserTypeId>>;
}

impl UserClassifier for EmRunReport {
    fn predict_users(&self, corpus: &Corpus) -> Result<Vec<UserTypeId>> {
        predictions_for(&self.predictions, corpus)
    }
}

impl UserClassifier for SupervisedClassifier {
    fn predict_users(&self, corpus: &Corpus) -> Result<Vec<UserTypeId>> {
        Ok(self.predict_corpus(corpus))
    }
}

impl UserClassifier for [Prediction] {
    fn predict_users(&self, corpus: &Corpus) -> Result<Vec<UserTypeId>> {
        predictions_for(self, corpus)
    }
}

fn predictions_for(predictions: &[Prediction], corpus: &Corpus) -> Result<Vec<UserTypeId>> {
    let mut out = vec![None; corpus.len()];
    for p in predictions {
        let u = corpus
            .user_index(&p.user_id)
            .ok_or_else(|| Error::UnknownUser(p.user_id.clone()))?;
        out[u] = Some(p.label);
    }
    out.into_iter()
        .zip(&corpus.users)
        .map(|(l, u)| l.ok_or_else(|| Error::UnknownUser(format!("no prediction for {}", u.user_id))))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalOptions {
    /// Count gold users that also carry a weak label.
    pub include_weak: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { include_weak: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_eval: usize,
    /// Evaluated users that also carry a weak label.
    pub n_weak_overlap: usize,
    pub include_weak: bool,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub precision: [f64; 2],
    pub recall: [f64; 2],
    pub f1: [f64; 2],
    pub confusion: ConfusionMatrix,
    pub type_names: [String; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_fingerprint: Option<String>,
}

impl EvalReport {
    pub fn with_fingerprint(mut self, fingerprint: impl Into<String>) -> Self {
        self.config_fingerprint = Some(fingerprint.into());
        self
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, serde_json::to_string_pretty(self)?).map_err(|e| Error::io(path, e))
    }
}

/// Scores `predictions` (one per corpus user) against the gold-labeled users.
pub fn evaluate_labels(
    predictions: &[UserTypeId],
    corpus: &Corpus,
    weak: &WeakLabeling,
    options: EvalOptions,
) -> Result<EvalReport> {
    if predictions.len() != corpus.len() {
        return Err(Error::Shape(format!(
            "{} predictions for {} users",
            predictions.len(),
            corpus.len()
        )));
    }
    let mut preds = Vec::new();
    let mut gold = Vec::new();
    let mut overlap = 0;
    for (u, &p) in corpus.users.iter().zip(predictions) {
        let Some(g) = u.gold_label else { continue };
        let is_weak = weak.get(&u.user_id).is_some();
        if is_weak && !options.include_weak {
            continue;
        }
        overlap += usize::from(is_weak);
        preds.push(p);
        gold.push(g);
    }
    if gold.is_empty() {
        return Err(Error::EmptyEvaluation("no gold-labeled users selected".into()));
    }
    let confusion = ConfusionMatrix::from_labels(&preds, &gold)?;
    Ok(EvalReport {
        n_eval: gold.len(),
        n_weak_overlap: overlap,
        include_weak: options.include_weak,
        accuracy: confusion.accuracy(),
        macro_f1: confusion.macro_f1(),
        precision: [confusion.precision(0), confusion.precision(1)],
        recall: [confusion.recall(0), confusion.recall(1)],
        f1: [confusion.f1(0), confusion.f1(1)],
        confusion,
        type_names: corpus.type_names.clone(),
        config_fingerprint: None,
    })
}

pub fn evaluate<C: UserClassifier + ?Sized>(
    classifier: &C,
    corpus: &Corpus,
    weak: &WeakLabeling,
    options: EvalOptions,
) -> Result<EvalReport> {
    evaluate_labels(&classifier.predict_users(corpus)?, corpus, weak, options)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationModel {
    /// One training round without promotions.
    LabelPropagation,
    Em,
}

impl AblationModel {
    pub fn name(self) -> &'static str {
        match self {
            AblationModel::LabelPropagation => "label_propagation",
            AblationModel::Em => "em",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub model: AblationModel,
    pub view: View,
    pub observed_edges: usize,
    pub iterations_run: usize,
    pub eval: EvalReport,
}

/// Six rows: label propagation then EM, each over des, net and des+net.
pub fn run_ablation(
    corpus: &Corpus,
    weak: &WeakLabeling,
    vocab: &VocabEmbeddings,
    config: &EmConfig,
    options: EvalOptions,
) -> Result<Vec<AblationRow>> {
    let mut rows = Vec::with_capacity(6);
    for model in [AblationModel::LabelPropagation, AblationModel::Em] {
        let cfg = match model {
            AblationModel::LabelPropagation => config.single_pass(),
            AblationModel::Em => config.clone(),
        };
        for view in View::ALL {
            let out = run_em(corpus, weak, vocab, &cfg, view)?;
            log::info!("ablation {} {}: {} iterations", model.name(), view.name(), out.report.iterations_run);
            rows.push(AblationRow {
                model,
                view,
                observed_edges: out.report.final_graph.observed_edges(),
                iterations_run: out.report.iterations_run,
                eval: evaluate(&out.report, corpus, weak, options)?,
            });
        }
    }
    Ok(rows)
}

/// `model,view,accuracy,macro_f1`
pub fn write_ablation_csv(rows: &[AblationRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let res: std::result::Result<(), csv::Error> = (|| {
        w.write_record(["model", "view", "accuracy", "macro_f1"])?;
        for r in rows {
            w.write_record([
                r.model.name().to_string(),
                r.view.name().to_string(),
                r.eval.accuracy.to_string(),
                r.eval.macro_f1.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    })();
    res.map_err(|e| csv_error(path, e))
}

/// Synthetic corpus with no description keywords to speak of, so only the
/// mention network carries label information.
pub fn network_only_params(seed: u64) -> SynthParams {
    SynthParams {
        homophily: 0.95,
        desc_keyword_coverage: 0.1,
        seed,
        ..Default::default()
    }
}

/// One row of an embedding export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRow {
    pub node_id: String,
    pub kind: String,
    pub gold: String,
    pub predicted: String,
    pub vector: Vec<f64>,
}

/// Writes every graph node as `node_id,kind,gold,predicted,v0..v{d-1}`.
/// Users carry their gold (if any) and predicted labels, descriptions are
/// named `desc:<user_id>`, and type nodes carry their own name in both
/// label columns.
pub fn export_embeddings(
    space: &EmbeddingSpace,
    graph: &InfoGraph,
    corpus: &Corpus,
    inputs: &[Vec<usize>],
    predictions: &[Prediction],
    path: impl AsRef<Path>,
) -> Result<usize> {
    let path = path.as_ref();
    if graph.n_users() != space.n_users || corpus.len() != space.n_users {
        return Err(Error::Shape("graph, corpus and space disagree on user count".into()));
    }
    let predicted = predictions_for(predictions, corpus)?;
    let name = |t: UserTypeId| corpus.type_name(t).to_string();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut header = vec!["node_id".to_string(), "kind".into(), "gold".into(), "predicted".into()];
    header.extend((0..space.dim).map(|i| format!("v{i}")));
    w.write_record(&header).map_err(|e| csv_error(path, e))?;
    let mut written = 0;
    for dense in 0..graph.node_count() {
        let node = graph.node_at(dense);
        let (id, kind, gold, pred) = match node.kind {
            NodeKind::User => {
                let u = &corpus.users[node.index];
                (
                    u.user_id.clone(),
                    "user",
                    u.gold_label.map(name).unwrap_or_default(),
                    name(predicted[node.index]),
                )
            }
            NodeKind::Desc => (
                format!("desc:{}", corpus.users[node.index].user_id),
                "desc",
                String::new(),
                String::new(),
            ),
            NodeKind::Type => {
                let n = name(UserTypeId(node.index));
                (n.clone(), "type", n.clone(), n)
            }
        };
        let mut record = vec![id, kind.to_string(), gold, pred];
        record.extend(space.vector(node, inputs).iter().map(|x| x.to_string()));
        w.write_record(&record).map_err(|e| csv_error(path, e))?;
        written += 1;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(written)
}

pub fn read_embeddings_csv(path: impl AsRef<Path>) -> Result<Vec<EmbeddingRow>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let bad = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 2,
            message,
        };
        if rec.len() < 4 {
            return Err(bad(format!("expected at least 4 columns, found {}", rec.len())));
        }
        let vector = rec
            .iter()
            .skip(4)
            .map(|s| s.parse::<f64>().map_err(|e| bad(format!("{s:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(EmbeddingRow {
            node_id: rec[0].to_string(),
            kind: rec[1].to_string(),
            gold: rec[2].to_string(),
            predicted: rec[3].to_string(),
            vector,
        });
    }
    Ok(rows)
}
