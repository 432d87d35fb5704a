//! Text encoders that turn a user's tweets into a node vector.
//!
//! Two variants, both with exact gradients:
//! - `MeanPool`: a linear projection of the mean word vector.
//! - `Lstm` / `BiLstm`: an LSTM over the word vectors of the concatenated
//!   tweets. The bidirectional form concatenates the forward and backward
//!   hidden states at each position; the output is the average over
//!   positions.
//!
//! A user with no tokens encodes to the zero vector.

mod lstm;
mod vocab;

pub use lstm::{CellTrace, LstmCell};
pub use vocab::{load_word_vectors, VocabEmbeddings};

pub(crate) use lstm::sigmoid;
use lstm::{axpy, dot, INIT_RANGE};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::TokenSeq;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EncoderVariant {
    MeanPool,
    /// Forward-only LSTM; output dimension is the hidden size.
    Lstm,
    #[default]
    BiLstm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EncoderConfig {
    pub variant: EncoderVariant,
    pub hidden: usize,
    /// Longer token sequences are truncated at the tail.
    pub max_seq_len: usize,
    pub trainable_word_vectors: bool,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            variant: EncoderVariant::BiLstm,
            hidden: 150,
            max_seq_len: 512,
            trainable_word_vectors: false,
        }
    }
}

impl EncoderConfig {
    /// The output dimension for a given requested node dimension, or an
    /// error if the variant cannot produce it.
    pub fn check_output_dim(&self, d: usize) -> Result<()> {
        let out = match self.variant {
            EncoderVariant::MeanPool => d,
            EncoderVariant::Lstm => self.hidden,
            EncoderVariant::BiLstm => 2 * self.hidden,
        };
        if out != d || d == 0 {
            return Err(Error::InvalidParams(format!(
                "{:?} encoder with hidden {} cannot produce dimension {d}",
                self.variant, self.hidden
            )));
        }
        if self.max_seq_len == 0 {
            return Err(Error::InvalidParams("max_seq_len must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanPoolParams {
    pub input_dim: usize,
    pub output_dim: usize,
    /// `output_dim x input_dim`, row-major.
    pub weight: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmParams {
    pub forward: LstmCell,
    pub backward: Option<LstmCell>,
}

/// Trainable encoder parameters. Gradients use the same type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncoderParams {
    MeanPool(MeanPoolParams),
    Lstm(LstmParams),
}

impl EncoderParams {
    pub fn init(config: &EncoderConfig, input_dim: usize, output_dim: usize, rng: &mut impl Rng) -> Result<EncoderParams> {
        config.check_output_dim(output_dim)?;
        Ok(match config.variant {
            EncoderVariant::MeanPool => EncoderParams::MeanPool(MeanPoolParams {
                input_dim,
                output_dim,
                weight: (0..input_dim * output_dim)
                    .map(|_| rng.gen_range(-INIT_RANGE..=INIT_RANGE))
                    .collect(),
            }),
            EncoderVariant::Lstm => EncoderParams::Lstm(LstmParams {
                forward: LstmCell::init(input_dim, config.hidden, rng),
                backward: None,
            }),
            EncoderVariant::BiLstm => {
                let forward = LstmCell::init(input_dim, config.hidden, rng);
                let backward = LstmCell::init(input_dim, config.hidden, rng);
                EncoderParams::Lstm(LstmParams {
                    forward,
                    backward: Some(backward),
                })
            }
        })
    }

    pub fn input_dim(&self) -> usize {
        match self {
            EncoderParams::MeanPool(p) => p.input_dim,
            EncoderParams::Lstm(p) => p.forward.input_dim,
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            EncoderParams::MeanPool(p) => p.output_dim,
            EncoderParams::Lstm(p) => p.forward.hidden * if p.backward.is_some() { 2 } else { 1 },
        }
    }

    /// Same shapes, all zeros.
    pub fn zeros_like(&self) -> EncoderParams {
        let mut z = self.clone();
        for b in z.buffers_mut() {
            b.fill(0.0);
        }
        z
    }

    pub fn buffers(&self) -> Vec<&[f64]> {
        match self {
            EncoderParams::MeanPool(p) => vec![&p.weight],
            EncoderParams::Lstm(p) => {
                let mut v: Vec<&[f64]> = vec![&p.forward.w, &p.forward.u, &p.forward.b];
                if let Some(b) = &p.backward {
                    v.extend([&b.w[..], &b.u[..], &b.b[..]]);
                }
                v
            }
        }
    }

    pub fn buffers_mut(&mut self) -> Vec<&mut [f64]> {
        match self {
            EncoderParams::MeanPool(p) => vec![&mut p.weight],
            EncoderParams::Lstm(p) => {
                let mut v: Vec<&mut [f64]> = vec![&mut p.forward.w, &mut p.forward.u, &mut p.forward.b];
                if let Some(b) = &mut p.backward {
                    v.extend([&mut b.w[..], &mut b.u[..], &mut b.b[..]]);
                }
                v
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.buffers().iter().all(|b| b.iter().all(|x| x.is_finite()))
    }

    pub fn add_assign(&mut self, other: &EncoderParams) -> Result<()> {
        let theirs = other.buffers();
        let mut mine = self.buffers_mut();
        if mine.len() != theirs.len() || mine.iter().zip(&theirs).any(|(a, b)| a.len() != b.len()) {
            return Err(Error::Shape("encoder parameter shapes differ".into()));
        }
        for (a, b) in mine.iter_mut().zip(theirs) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        Ok(())
    }
}

/// Cached forward values for one encoded user.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EncoderActivation {
    /// Vocabulary rows of the encoded tokens, in sequence order.
    pub rows: Vec<usize>,
    pub state: ActivationState,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum ActivationState {
    #[default]
    Empty,
    MeanPool {
        mean: Vec<f64>,
    },
    Lstm {
        forward: CellTrace,
        /// Trace of the reverse-direction cell, in its processing order
        /// (last position first).
        backward: Option<CellTrace>,
    },
}

/// Vocabulary rows for a user's concatenated tweets, truncated to `max_len`.
pub fn token_rows(vocab: &VocabEmbeddings, tweets: &[TokenSeq], max_len: usize) -> Vec<usize> {
    tweets
        .iter()
        .flat_map(TokenSeq::iter)
        .take(max_len)
        .map(|t| vocab.lookup(t))
        .collect()
}

pub fn encode_user(
    vocab: &VocabEmbeddings,
    params: &EncoderParams,
    tweets: &[TokenSeq],
    max_len: usize,
) -> (Vec<f64>, EncoderActivation) {
    encode_rows(vocab, params, token_rows(vocab, tweets, max_len))
}

pub fn encode_rows(vocab: &VocabEmbeddings, params: &EncoderParams, rows: Vec<usize>) -> (Vec<f64>, EncoderActivation) {
    let out_dim = params.output_dim();
    let mut out = vec![0.0; out_dim];
    if rows.is_empty() {
        return (out, EncoderActivation::default());
    }
    let steps = rows.len() as f64;
    let state = match params {
        EncoderParams::MeanPool(p) => {
            let mut mean = vec![0.0; p.input_dim];
            for &r in &rows {
                axpy(&mut mean, 1.0 / steps, vocab.row(r));
            }
            for (j, o) in out.iter_mut().enumerate() {
                *o = dot(&p.weight[j * p.input_dim..(j + 1) * p.input_dim], &mean);
            }
            ActivationState::MeanPool { mean }
        }
        EncoderParams::Lstm(p) => {
            let h = p.forward.hidden;
            let forward = p.forward.forward(vocab, rows.iter().copied());
            for s in 0..rows.len() {
                axpy(&mut out[..h], 1.0 / steps, &forward.hiddens[s * h..(s + 1) * h]);
            }
            let backward = p.backward.as_ref().map(|cell| {
                let trace = cell.forward(vocab, rows.iter().rev().copied());
                for s in 0..rows.len() {
                    axpy(&mut out[h..], 1.0 / steps, &trace.hiddens[s * h..(s + 1) * h]);
                }
                trace
            });
            ActivationState::Lstm { forward, backward }
        }
    };
    (out, EncoderActivation { rows, state })
}

/// Gradients of the encoder output with respect to the parameters and to
/// each input word vector (`rows.len() x input_dim`, sequence order).
pub fn encoder_backward(
    vocab: &VocabEmbeddings,
    params: &EncoderParams,
    activation: &EncoderActivation,
    grad_out: &[f64],
) -> Result<(EncoderParams, Vec<Vec<f64>>)> {
    if grad_out.len() != params.output_dim() {
        return Err(Error::Shape(format!(
            "grad_out has {} entries, encoder output has {}",
            grad_out.len(),
            params.output_dim()
        )));
    }
    let mut grads = params.zeros_like();
    let d_in = params.input_dim();
    let steps = activation.rows.len();
    let mut dx = vec![vec![0.0; d_in]; steps];
    match (params, &activation.state, &mut grads) {
        (_, ActivationState::Empty, _) => {
            if steps != 0 {
                return Err(Error::Shape("empty activation with tokens".into()));
            }
        }
        (EncoderParams::MeanPool(p), ActivationState::MeanPool { mean }, EncoderParams::MeanPool(g)) => {
            if mean.len() != d_in {
                return Err(Error::Shape("activation does not match encoder".into()));
            }
            let mut dmean = vec![0.0; d_in];
            for (j, &go) in grad_out.iter().enumerate() {
                axpy(&mut g.weight[j * d_in..(j + 1) * d_in], go, mean);
                axpy(&mut dmean, go, &p.weight[j * d_in..(j + 1) * d_in]);
            }
            for row in dx.iter_mut() {
                axpy(row, 1.0 / steps as f64, &dmean);
            }
        }
        (EncoderParams::Lstm(p), ActivationState::Lstm { forward, backward }, EncoderParams::Lstm(g)) => {
            let h = p.forward.hidden;
            if forward.hiddens.len() != steps * h || backward.is_some() != p.backward.is_some() {
                return Err(Error::Shape("activation does not match encoder".into()));
            }
            let scale = 1.0 / steps as f64;
            let dh_fwd: Vec<f64> = grad_out[..h].iter().map(|x| x * scale).collect();
            p.forward
                .backward(vocab, &activation.rows, forward, &dh_fwd, &mut g.forward, &mut dx);
            if let (Some(cell), Some(trace), Some(gcell)) = (&p.backward, backward, &mut g.backward) {
                let dh_bwd: Vec<f64> = grad_out[h..].iter().map(|x| x * scale).collect();
                let rev_rows: Vec<usize> = activation.rows.iter().rev().copied().collect();
                let mut dx_rev = vec![vec![0.0; d_in]; steps];
                cell.backward(vocab, &rev_rows, trace, &dh_bwd, gcell, &mut dx_rev);
                for (s, row) in dx_rev.into_iter().enumerate() {
                    axpy(&mut dx[steps - 1 - s], 1.0, &row);
                }
            }
        }
        _ => return Err(Error::Shape("activation does not match encoder".into())),
    }
    Ok((grads, dx))
}
