use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Word vectors indexed by token. Row `len()` is the all-zero row used for
/// out-of-vocabulary tokens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabFile", into = "VocabFile")]
pub struct VocabEmbeddings {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    /// `(len() + 1) x dim`, row-major.
    pub matrix: Vec<f64>,
    pub trainable: bool,
}

#[derive(Serialize, Deserialize)]
struct VocabFile {
    tokens: Vec<String>,
    dim: usize,
    matrix: Vec<f64>,
    trainable: bool,
}

impl From<VocabFile> for VocabEmbeddings {
    fn from(f: VocabFile) -> Self {
        let index = f.tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        VocabEmbeddings {
            tokens: f.tokens,
            index,
            dim: f.dim,
            matrix: f.matrix,
            trainable: f.trainable,
        }
    }
}

impl From<VocabEmbeddings> for VocabFile {
    fn from(v: VocabEmbeddings) -> Self {
        VocabFile {
            tokens: v.tokens,
            dim: v.dim,
            matrix: v.matrix,
            trainable: v.trainable,
        }
    }
}

impl VocabEmbeddings {
    pub fn from_rows(tokens: Vec<String>, rows: Vec<Vec<f64>>) -> Result<VocabEmbeddings> {
        if tokens.len() != rows.len() {
            return Err(Error::Shape(format!("{} tokens but {} rows", tokens.len(), rows.len())));
        }
        let dim = rows.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(Error::Shape("word vectors need a positive dimension".into()));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        let mut matrix = Vec::with_capacity((tokens.len() + 1) * dim);
        let mut kept = Vec::with_capacity(tokens.len());
        for (tok, row) in tokens.into_iter().zip(rows) {
            if row.len() != dim {
                return Err(Error::Shape(format!("row for `{tok}` has {} values, expected {dim}", row.len())));
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::Shape(format!("row for `{tok}` is not finite")));
            }
            if index.contains_key(&tok) {
                continue;
            }
            index.insert(tok.clone(), kept.len());
            kept.push(tok);
            matrix.extend(row);
        }
        matrix.extend(std::iter::repeat_n(0.0, dim));
        Ok(VocabEmbeddings {
            tokens: kept,
            index,
            dim,
            matrix,
            trainable: false,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn oov_row(&self) -> usize {
        self.tokens.len()
    }

    pub fn lookup(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(self.oov_row())
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.matrix[r * self.dim..(r + 1) * self.dim]
    }

    pub fn vector(&self, token: &str) -> &[f64] {
        self.row(self.lookup(token))
    }

    pub fn write_text(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(f);
        for (i, t) in self.tokens.iter().enumerate() {
            let mut line = t.clone();
            for x in self.row(i) {
                line.push(' ');
                line.push_str(&x.to_string());
            }
            line.push('\n');
            w.write_all(line.as_bytes()).map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Reads the plain-text word-vector format: one line per token, the token
/// followed by `dim` space-separated numbers.
pub fn load_word_vectors(path: impl AsRef<Path>, dim: usize) -> Result<VocabEmbeddings> {
    let path = path.as_ref();
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut tokens = Vec::new();
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let mut parts = line.split_whitespace();
        let Some(token) = parts.next() else { continue };
        let row = parts
            .map(|p| p.parse::<f64>().map_err(|e| parse_err(i + 1, format!("`{p}`: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != dim {
            return Err(parse_err(i + 1, format!("expected {dim} values, found {}", row.len())));
        }
        if row.iter().any(|x| !x.is_finite()) {
            return Err(parse_err(i + 1, "non-finite value".into()));
        }
        tokens.push(token.to_string());
        rows.push(row);
    }
    if tokens.is_empty() {
        return Err(parse_err(0, "no vectors".into()));
    }
    VocabEmbeddings::from_rows(tokens, rows)
}
