//! Users, their text, and the mention network.

mod synth;
mod text;

pub use synth::{
    generate_synthetic, synthetic_word_vectors, SynthParams, PRACTITIONER_KEYWORDS,
    PROMOTIONAL_KEYWORDS,
};
pub use text::{is_emoji, preprocess_text, Stopwords, TokenSeq};

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, UserTypeId};

pub const DEFAULT_TYPE_NAMES: [&str; 2] = ["practitioner", "promotional"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct User {
    pub user_id: String,
    pub description_raw: String,
    pub tweets_raw: Vec<String>,
    /// Indices into [`Corpus::users`], deduplicated, no self-mentions.
    pub mentions: Vec<usize>,
    pub gold_label: Option<UserTypeId>,
    pub description: TokenSeq,
    pub tweets: Vec<TokenSeq>,
}

impl User {
    /// All tweet tokens concatenated in corpus order.
    pub fn tweet_tokens(&self) -> impl Iterator<Item = &str> {
        self.tweets.iter().flat_map(TokenSeq::iter)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub users: Vec<User>,
    pub type_names: [String; 2],
    #[serde(skip)]
    index: HashMap<String, usize>,
}

/// One line of the JSONL corpus format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawUser {
    pub user_id: String,
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default)]
    pub tweets: Vec<String>,
    #[serde(default)]
    pub mentions: Vec<String>,
    #[serde(default)]
    pub gold_label: Option<String>,
}

/// What ingestion discarded.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadReport {
    pub dropped_users: usize,
    pub dropped_mentions: usize,
    pub self_mentions: usize,
    pub duplicate_mentions: usize,
}

impl Corpus {
    /// Builds a corpus from raw records: drops users without a description,
    /// pre-processes all text, resolves mentions to indices.
    pub fn from_raw(
        raw: Vec<RawUser>,
        type_names: [String; 2],
        stopwords: &Stopwords,
    ) -> Result<(Corpus, LoadReport)> {
        if type_names[0] == type_names[1] {
            return Err(Error::InvalidCorpus("type names must differ".into()));
        }
        let mut report = LoadReport::default();
        let mut seen = BTreeSet::new();
        for r in &raw {
            if !seen.insert(r.user_id.as_str()) {
                return Err(Error::DuplicateUser(r.user_id.clone()));
            }
        }
        let kept: Vec<RawUser> = raw
            .into_iter()
            .filter(|r| {
                let keep = r.description.as_deref().is_some_and(|d| !d.trim().is_empty());
                if !keep {
                    report.dropped_users += 1;
                }
                keep
            })
            .collect();
        let index: HashMap<String, usize> = kept
            .iter()
            .enumerate()
            .map(|(i, r)| (r.user_id.clone(), i))
            .collect();

        let mut users = Vec::with_capacity(kept.len());
        for (i, r) in kept.into_iter().enumerate() {
            let gold_label = match &r.gold_label {
                None => None,
                Some(name) => Some(
                    type_names
                        .iter()
                        .position(|t| t == name)
                        .map(UserTypeId)
                        .ok_or_else(|| Error::UnknownLabel(name.clone()))?,
                ),
            };
            let mut mentions = Vec::new();
            for m in &r.mentions {
                match index.get(m) {
                    None => report.dropped_mentions += 1,
                    Some(&j) if j == i => report.self_mentions += 1,
                    Some(&j) if mentions.contains(&j) => report.duplicate_mentions += 1,
                    Some(&j) => mentions.push(j),
                }
            }
            let description_raw = r.description.unwrap_or_default();
            users.push(User {
                description: preprocess_text(&description_raw, stopwords),
                tweets: r.tweets.iter().map(|t| preprocess_text(t, stopwords)).collect(),
                user_id: r.user_id,
                description_raw,
                tweets_raw: r.tweets,
                mentions,
                gold_label,
            });
        }
        if report.dropped_mentions > 0 {
            log::warn!(
                "dropped {} mentions of users not in the corpus",
                report.dropped_mentions
            );
        }
        let corpus = Corpus {
            users,
            type_names,
            index,
        };
        corpus.validate()?;
        Ok((corpus, report))
    }

    pub fn validate(&self) -> Result<()> {
        if self.users.len() < 2 {
            return Err(Error::InvalidCorpus(format!(
                "need at least 2 users, found {}",
                self.users.len()
            )));
        }
        if self.index.len() != self.users.len() {
            return Err(Error::InvalidCorpus("user index out of sync".into()));
        }
        for (i, u) in self.users.iter().enumerate() {
            if u.description_raw.trim().is_empty() {
                return Err(Error::InvalidCorpus(format!("user `{}` has no description", u.user_id)));
            }
            if u.mentions.iter().any(|&m| m >= self.users.len() || m == i) {
                return Err(Error::InvalidCorpus(format!("user `{}` has a bad mention", u.user_id)));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn user_index(&self, user_id: &str) -> Option<usize> {
        self.index.get(user_id).copied()
    }

    pub fn type_name(&self, t: UserTypeId) -> &str {
        &self.type_names[t.index()]
    }

    pub fn type_id(&self, name: &str) -> Option<UserTypeId> {
        self.type_names.iter().position(|t| t == name).map(UserTypeId)
    }

    /// Rebuilds the id index, e.g. after deserializing.
    pub fn reindex(&mut self) {
        self.index = self
            .users
            .iter()
            .enumerate()
            .map(|(i, u)| (u.user_id.clone(), i))
            .collect();
    }

    pub fn to_raw(&self) -> Vec<RawUser> {
        self.users
            .iter()
            .map(|u| RawUser {
                user_id: u.user_id.clone(),
                description: Some(u.description_raw.clone()),
                tweets: u.tweets_raw.clone(),
                mentions: u.mentions.iter().map(|&m| self.users[m].user_id.clone()).collect(),
                gold_label: u.gold_label.map(|t| self.type_name(t).to_string()),
            })
            .collect()
    }

    pub fn write_jsonl(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        for r in self.to_raw() {
            serde_json::to_writer(&mut w, &r)?;
            w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

pub fn default_type_names() -> [String; 2] {
    DEFAULT_TYPE_NAMES.map(String::from)
}

/// Reads a JSONL corpus with the default type names and stopwords.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<(Corpus, LoadReport)> {
    load_corpus_with(path, default_type_names(), Stopwords::builtin())
}

pub fn load_corpus_with(
    path: impl AsRef<Path>,
    type_names: [String; 2],
    stopwords: &Stopwords,
) -> Result<(Corpus, LoadReport)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut raw = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: RawUser = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        raw.push(rec);
    }
    Corpus::from_raw(raw, type_names, stopwords)
}
