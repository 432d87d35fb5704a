//! Supervised sequence classifier trained directly on the weak labels.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamState};
use crate::corpus::{Corpus, User};
use crate::encoder::{encode_rows, encoder_backward, token_rows, EncoderParams, VocabEmbeddings};
use crate::seed::rng_for;
use crate::trainer::TrainConfig;
use crate::weak_labeler::WeakLabeling;
use crate::{Error, Result, UserTypeId};

const MIN_LABELED: usize = 5;
const VALIDATION_SHARE: f64 = 0.2;

/// Encoder plus a two-way softmax head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupervisedClassifier {
    pub vocab: VocabEmbeddings,
    pub encoder: EncoderParams,
    /// `2 x dim`, row-major.
    pub head_weight: Vec<f64>,
    pub head_bias: [f64; 2],
    pub max_seq_len: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineHistory {
    pub epoch: usize,
    pub train_loss: f64,
    pub validation_loss: f64,
}

impl SupervisedClassifier {
    fn logits(&self, h: &[f64]) -> [f64; 2] {
        let d = h.len();
        let mut z = self.head_bias;
        for (c, zc) in z.iter_mut().enumerate() {
            *zc += self.head_weight[c * d..(c + 1) * d].iter().zip(h).map(|(w, x)| w * x).sum::<f64>();
        }
        z
    }

    /// Class probabilities for a user.
    pub fn probabilities(&self, user: &User) -> [f64; 2] {
        let rows = token_rows(&self.vocab, &user.tweets, self.max_seq_len);
        softmax(self.logits(&encode_rows(&self.vocab, &self.encoder, rows).0))
    }

    /// Ties go to the first type.
    pub fn predict(&self, user: &User) -> UserTypeId {
        let p = self.probabilities(user);
        if p[1] > p[0] {
            UserTypeId::SECOND
        } else {
            UserTypeId::FIRST
        }
    }

    pub fn predict_corpus(&self, corpus: &Corpus) -> Vec<UserTypeId> {
        corpus.users.iter().map(|u| self.predict(u)).collect()
    }

    /// Mean cross-entropy over `(rows, label)` examples.
    fn loss(&self, examples: &[(Vec<usize>, UserTypeId)]) -> f64 {
        if examples.is_empty() {
            return 0.0;
        }
        let total: f64 = examples
            .iter()
            .map(|(rows, y)| {
                let h = encode_rows(&self.vocab, &self.encoder, rows.clone()).0;
                cross_entropy(self.logits(&h), *y)
            })
            .sum();
        total / examples.len() as f64
    }

    pub fn write_json(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, serde_json::to_string(self)?).map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: impl AsRef<std::path::Path>) -> Result<SupervisedClassifier> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn softmax(z: [f64; 2]) -> [f64; 2] {
    let m = z[0].max(z[1]);
    let e = [(z[0] - m).exp(), (z[1] - m).exp()];
    let s = e[0] + e[1];
    [e[0] / s, e[1] / s]
}

fn cross_entropy(z: [f64; 2], y: UserTypeId) -> f64 {
    let m = z[0].max(z[1]);
    let lse = m + ((z[0] - m).exp() + (z[1] - m).exp()).ln();
    lse - z[y.index()]
}

/// Number of validation examples out of `n` labeled users.
pub fn validation_size(n: usize) -> usize {
    ((n as f64 * VALIDATION_SHARE).round() as usize).min(n.saturating_sub(1))
}

/// Trains on weakly labeled users, holding out a seeded 20% for
/// validation and keeping the epoch with the lowest validation loss.
/// `config.dim` must match the encoder output.
pub fn train_supervised_baseline(
    corpus: &Corpus,
    weak: &WeakLabeling,
    vocab: &VocabEmbeddings,
    config: &TrainConfig,
) -> Result<(SupervisedClassifier, Vec<BaselineHistory>)> {
    config.validate()?;
    let mut labeled: Vec<(Vec<usize>, UserTypeId)> = corpus
        .users
        .iter()
        .filter_map(|u| {
            weak.get(&u.user_id)
                .map(|y| (token_rows(vocab, &u.tweets, config.encoder.max_seq_len), y))
        })
        .collect();
    if labeled.len() < MIN_LABELED {
        return Err(Error::InvalidParams(format!(
            "baseline needs at least {MIN_LABELED} weakly labeled users, found {}",
            labeled.len()
        )));
    }
    let mut rng = rng_for(config.seed, "baseline/split");
    labeled.shuffle(&mut rng);
    let n_val = validation_size(labeled.len());
    let train_set = labeled.split_off(n_val);
    let val_set = labeled;

    let mut init_rng = rng_for(config.seed, "baseline/init");
    let dim = config.dim;
    let mut model = SupervisedClassifier {
        vocab: {
            let mut v = vocab.clone();
            v.trainable = false;
            v
        },
        encoder: EncoderParams::init(&config.encoder, vocab.dim(), dim, &mut init_rng)?,
        head_weight: {
            use rand::Rng;
            let r = 1.0 / (dim as f64).sqrt();
            (0..2 * dim).map(|_| init_rng.gen_range(-r..=r)).collect()
        },
        head_bias: [0.0; 2],
        max_seq_len: config.encoder.max_seq_len,
    };

    let mut enc_state: Vec<AdamState> = model.encoder.buffers().iter().map(|b| AdamState::new(b.len())).collect();
    let mut head_state = AdamState::new(2 * dim);
    let mut bias_state = AdamState::new(2);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut epoch_rng = rng_for(config.seed, "baseline/epochs");
    let mut best = (model.loss(&val_set), model.clone());
    let mut history = Vec::new();

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut epoch_rng);
        let mut train_total = 0.0;
        for batch in order.chunks(config.batch_size) {
            let scale = 1.0 / batch.len() as f64;
            let mut g_enc = model.encoder.zeros_like();
            let mut g_head = vec![0.0; 2 * dim];
            let mut g_bias = [0.0; 2];
            for &i in batch {
                let (rows, y) = &train_set[i];
                let (h, act) = encode_rows(&model.vocab, &model.encoder, rows.clone());
                let z = model.logits(&h);
                train_total += cross_entropy(z, *y);
                let p = softmax(z);
                let mut dh = vec![0.0; dim];
                for c in 0..2 {
                    let dz = scale * (p[c] - if c == y.index() { 1.0 } else { 0.0 });
                    g_bias[c] += dz;
                    for j in 0..dim {
                        g_head[c * dim + j] += dz * h[j];
                        dh[j] += dz * model.head_weight[c * dim + j];
                    }
                }
                if !act.rows.is_empty() {
                    let (g, _) = encoder_backward(&model.vocab, &model.encoder, &act, &dh)?;
                    g_enc.add_assign(&g)?;
                }
            }
            let lr = config.learning_rate;
            let g_bufs = g_enc.buffers();
            for ((p, g), s) in model.encoder.buffers_mut().into_iter().zip(g_bufs).zip(&mut enc_state) {
                adam_step(p, g, s, lr)?;
            }
            adam_step(&mut model.head_weight, &g_head, &mut head_state, lr)?;
            adam_step(&mut model.head_bias, &g_bias, &mut bias_state, lr)?;
        }
        let validation_loss = model.loss(&val_set);
        history.push(BaselineHistory {
            epoch,
            train_loss: train_total / train_set.len() as f64,
            validation_loss,
        });
        if validation_loss < best.0 {
            best = (validation_loss, model.clone());
        }
    }
    Ok((best.1, history))
}
