//! Single-layer LSTM, optionally bidirectional, with backpropagation
//! through time.
//!
//! Gate layout in the stacked `4H` pre-activation vector is
//! `[input, forget, output, candidate]`:
//!
//! ```text
//! z_t = W x_t + U h_{t-1} + b
//! i = σ(z_i)   f = σ(z_f)   o = σ(z_o)   g = tanh(z_g)
//! c_t = f ⊙ c_{t-1} + i ⊙ g
//! h_t = o ⊙ tanh(c_t)
//! ```

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::encoder::VocabEmbeddings;

pub(crate) const INIT_RANGE: f64 = 0.08;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmCell {
    pub input_dim: usize,
    pub hidden: usize,
    /// `4H x D`, row-major.
    pub w: Vec<f64>,
    /// `4H x H`, row-major.
    pub u: Vec<f64>,
    /// `4H`.
    pub b: Vec<f64>,
}

/// Per-step values kept for the backward pass, in processing order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CellTrace {
    /// Post-activation gates `[i, f, o, g]`, `4H` per step.
    pub gates: Vec<f64>,
    /// Cell state after each step, `H` per step.
    pub cells: Vec<f64>,
    /// Hidden state after each step, `H` per step.
    pub hiddens: Vec<f64>,
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl LstmCell {
    pub fn zeros(input_dim: usize, hidden: usize) -> LstmCell {
        LstmCell {
            input_dim,
            hidden,
            w: vec![0.0; 4 * hidden * input_dim],
            u: vec![0.0; 4 * hidden * hidden],
            b: vec![0.0; 4 * hidden],
        }
    }

    /// Uniform in [-0.08, 0.08], forget-gate bias 1.
    pub fn init(input_dim: usize, hidden: usize, rng: &mut impl Rng) -> LstmCell {
        let mut cell = LstmCell::zeros(input_dim, hidden);
        for x in cell.w.iter_mut().chain(cell.u.iter_mut()).chain(cell.b.iter_mut()) {
            *x = rng.gen_range(-INIT_RANGE..=INIT_RANGE);
        }
        cell.b[hidden..2 * hidden].fill(1.0);
        cell
    }

    /// Runs the cell over `rows` in the given order.
    pub fn forward(&self, vocab: &VocabEmbeddings, rows: impl Iterator<Item = usize>) -> CellTrace {
        let (h_dim, d) = (self.hidden, self.input_dim);
        let mut trace = CellTrace::default();
        let mut h = vec![0.0; h_dim];
        let mut c = vec![0.0; h_dim];
        let mut z = vec![0.0; 4 * h_dim];
        for r in rows {
            let x = vocab.row(r);
            for (k, zk) in z.iter_mut().enumerate() {
                let wr = &self.w[k * d..(k + 1) * d];
                let ur = &self.u[k * h_dim..(k + 1) * h_dim];
                *zk = self.b[k] + dot(wr, x) + dot(ur, &h);
            }
            let start = trace.gates.len();
            trace.gates.extend_from_slice(&z);
            let gates = &mut trace.gates[start..];
            for j in 0..h_dim {
                let i = sigmoid(gates[j]);
                let f = sigmoid(gates[h_dim + j]);
                let o = sigmoid(gates[2 * h_dim + j]);
                let g = gates[3 * h_dim + j].tanh();
                gates[j] = i;
                gates[h_dim + j] = f;
                gates[2 * h_dim + j] = o;
                gates[3 * h_dim + j] = g;
                c[j] = f * c[j] + i * g;
                h[j] = o * c[j].tanh();
            }
            trace.cells.extend_from_slice(&c);
            trace.hiddens.extend_from_slice(&h);
        }
        trace
    }

    /// Backpropagates `dh_ext` (the gradient reaching every step's hidden
    /// state from outside the recurrence, same for every step) through the
    /// whole trace. Accumulates into `grad` and into `dx` (`steps x D`, in
    /// processing order).
    pub fn backward(
        &self,
        vocab: &VocabEmbeddings,
        rows: &[usize],
        trace: &CellTrace,
        dh_ext: &[f64],
        grad: &mut LstmCell,
        dx: &mut [Vec<f64>],
    ) {
        let (h_dim, d) = (self.hidden, self.input_dim);
        let steps = rows.len();
        let zero = vec![0.0; h_dim];
        let mut dh_next = vec![0.0; h_dim];
        let mut dc_next = vec![0.0; h_dim];
        let mut dz = vec![0.0; 4 * h_dim];
        for s in (0..steps).rev() {
            let gates = &trace.gates[s * 4 * h_dim..(s + 1) * 4 * h_dim];
            let c = &trace.cells[s * h_dim..(s + 1) * h_dim];
            let (c_prev, h_prev) = if s == 0 {
                (&zero[..], &zero[..])
            } else {
                (
                    &trace.cells[(s - 1) * h_dim..s * h_dim],
                    &trace.hiddens[(s - 1) * h_dim..s * h_dim],
                )
            };
            for j in 0..h_dim {
                let (i, f, o, g) = (gates[j], gates[h_dim + j], gates[2 * h_dim + j], gates[3 * h_dim + j]);
                let dh = dh_ext[j] + dh_next[j];
                let tc = c[j].tanh();
                let dc = dh * o * (1.0 - tc * tc) + dc_next[j];
                dz[j] = dc * g * i * (1.0 - i);
                dz[h_dim + j] = dc * c_prev[j] * f * (1.0 - f);
                dz[2 * h_dim + j] = dh * tc * o * (1.0 - o);
                dz[3 * h_dim + j] = dc * i * (1.0 - g * g);
                dc_next[j] = dc * f;
            }
            let x = vocab.row(rows[s]);
            dh_next.fill(0.0);
            let dxs = &mut dx[s];
            for (k, &dzk) in dz.iter().enumerate() {
                if dzk == 0.0 {
                    continue;
                }
                grad.b[k] += dzk;
                let wr = &self.w[k * d..(k + 1) * d];
                axpy(&mut grad.w[k * d..(k + 1) * d], dzk, x);
                axpy(dxs, dzk, wr);
                let ur = &self.u[k * h_dim..(k + 1) * h_dim];
                axpy(&mut grad.u[k * h_dim..(k + 1) * h_dim], dzk, h_prev);
                axpy(&mut dh_next, dzk, ur);
            }
        }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}
