use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::encoder::{encode_rows, token_rows, EncoderActivation, EncoderParams, VocabEmbeddings};
use crate::graph::{NodeId, NodeKind};
use crate::seed::Rng as SeedRng;
use crate::trainer::TrainConfig;
use crate::{Error, Result};

/// Node vectors: free vectors for descriptions and types, encoder outputs
/// for users.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingSpace {
    pub dim: usize,
    pub n_users: usize,
    /// `(n_users + 2) x dim`: description rows, then the two type rows.
    pub free: Vec<f64>,
    pub vocab: VocabEmbeddings,
    pub encoder: EncoderParams,
    pub max_seq_len: usize,
}

impl EmbeddingSpace {
    /// Free vectors uniform in `[-0.5/d, 0.5/d]`, encoder per its own
    /// initialization.
    pub fn init(vocab: VocabEmbeddings, n_users: usize, config: &TrainConfig, rng: &mut SeedRng) -> Result<EmbeddingSpace> {
        let dim = config.dim;
        config.encoder.check_output_dim(dim)?;
        let half = 0.5 / dim as f64;
        let free = (0..(n_users + 2) * dim).map(|_| rng.gen_range(-half..=half)).collect();
        let encoder = EncoderParams::init(&config.encoder, vocab.dim(), dim, rng)?;
        let mut vocab = vocab;
        vocab.trainable = config.encoder.trainable_word_vectors;
        Ok(EmbeddingSpace {
            dim,
            n_users,
            free,
            vocab,
            encoder,
            max_seq_len: config.encoder.max_seq_len,
        })
    }

    /// Row in [`EmbeddingSpace::free`] for a description or type node.
    pub fn free_row(&self, node: NodeId) -> Option<usize> {
        match node.kind {
            NodeKind::User => None,
            NodeKind::Desc => Some(node.index),
            NodeKind::Type => Some(self.n_users + node.index),
        }
    }

    pub fn free_vector(&self, row: usize) -> &[f64] {
        &self.free[row * self.dim..(row + 1) * self.dim]
    }

    /// Token rows for every user, in corpus order.
    pub fn user_inputs(&self, corpus: &Corpus) -> Result<Vec<Vec<usize>>> {
        if corpus.len() != self.n_users {
            return Err(Error::Shape(format!(
                "space has {} users, corpus has {}",
                self.n_users,
                corpus.len()
            )));
        }
        Ok(corpus
            .users
            .iter()
            .map(|u| token_rows(&self.vocab, &u.tweets, self.max_seq_len))
            .collect())
    }

    pub fn encode(&self, rows: &[usize]) -> (Vec<f64>, EncoderActivation) {
        encode_rows(&self.vocab, &self.encoder, rows.to_vec())
    }

    /// The vector of any node; users are encoded from `inputs`.
    pub fn vector(&self, node: NodeId, inputs: &[Vec<usize>]) -> Vec<f64> {
        match self.free_row(node) {
            Some(r) => self.free_vector(r).to_vec(),
            None => self.encode(&inputs[node.index]).0,
        }
    }

    /// Vectors of all user nodes.
    pub fn user_vectors(&self, inputs: &[Vec<usize>]) -> Vec<Vec<f64>> {
        inputs.iter().map(|rows| self.encode(rows).0).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.free.iter().all(|x| x.is_finite()) && self.encoder.is_finite() && self.vocab.matrix.iter().all(|x| x.is_finite())
    }

    pub fn write_json(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: impl AsRef<std::path::Path>) -> Result<EmbeddingSpace> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}
