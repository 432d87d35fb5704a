//! Synthetic corpora with planted user types.
//!
//! Each user gets a gold type uniformly at random. Tweet tokens come from
//! the type's own vocabulary with probability `separation` and from a
//! shared vocabulary otherwise. A `desc_keyword_coverage` fraction of users
//! get a description keyword that `rules/synthetic.json` maps to their type;
//! everyone else gets filler words only. Mentions connect same-type users
//! with probability `homophily`.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{default_type_names, Corpus, RawUser, Stopwords};
use crate::encoder::VocabEmbeddings;
use crate::seed::rng_for;
use crate::{Error, Result};

/// Description keywords the synthetic rule file maps to the first type.
pub const PRACTITIONER_KEYWORDS: [&str; 3] = ["practicing", "enthusiast", "devotee"];
/// Description keywords the synthetic rule file maps to the second type.
pub const PROMOTIONAL_KEYWORDS: [&str; 3] = ["shopnow", "discounts", "subscribe"];

const TYPE_PREFIX: [&str; 2] = ["pw", "qw"];
const SHARED_PREFIX: &str = "sw";
const FILLER_PREFIX: &str = "bio";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthParams {
    pub n_users: usize,
    pub vocab_size_per_type: usize,
    pub shared_vocab_size: usize,
    /// Probability a tweet token comes from the user's type vocabulary.
    pub separation: f64,
    /// Fraction of users whose description carries a rule keyword.
    pub desc_keyword_coverage: f64,
    /// Probability a mention links two users of the same type.
    pub homophily: f64,
    pub tweets_per_user: usize,
    pub tokens_per_tweet: usize,
    pub mentions_per_user: usize,
    /// Fraction of keyword-carrying users whose keyword names the wrong
    /// type. Exactly `round(keyword_noise * covered)` users are flipped.
    pub keyword_noise: f64,
    pub filler_vocab_size: usize,
    pub filler_per_description: usize,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            n_users: 200,
            vocab_size_per_type: 40,
            shared_vocab_size: 80,
            separation: 0.9,
            desc_keyword_coverage: 0.3,
            homophily: 0.9,
            tweets_per_user: 4,
            tokens_per_tweet: 6,
            mentions_per_user: 2,
            keyword_noise: 0.0,
            filler_vocab_size: 30,
            filler_per_description: 4,
            seed: 0,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        let probs = [
            ("separation", self.separation),
            ("desc_keyword_coverage", self.desc_keyword_coverage),
            ("homophily", self.homophily),
            ("keyword_noise", self.keyword_noise),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParams(format!("{name} = {p} is not in [0, 1]")));
            }
        }
        let counts = [
            ("n_users", self.n_users),
            ("vocab_size_per_type", self.vocab_size_per_type),
            ("shared_vocab_size", self.shared_vocab_size),
            ("tweets_per_user", self.tweets_per_user),
            ("tokens_per_tweet", self.tokens_per_tweet),
            ("filler_vocab_size", self.filler_vocab_size),
        ];
        for (name, c) in counts {
            if c == 0 {
                return Err(Error::InvalidParams(format!("{name} must be positive")));
            }
        }
        if self.n_users < 2 {
            return Err(Error::InvalidParams("n_users must be at least 2".into()));
        }
        Ok(())
    }

    /// Every token the generator can emit, in a fixed order.
    pub fn vocabulary(&self) -> Vec<String> {
        let mut v = Vec::new();
        for prefix in TYPE_PREFIX {
            v.extend((0..self.vocab_size_per_type).map(|i| format!("{prefix}{i}")));
        }
        v.extend((0..self.shared_vocab_size).map(|i| format!("{SHARED_PREFIX}{i}")));
        v.extend((0..self.filler_vocab_size).map(|i| format!("{FILLER_PREFIX}{i}")));
        v.extend(PRACTITIONER_KEYWORDS.iter().map(|s| s.to_string()));
        v.extend(PROMOTIONAL_KEYWORDS.iter().map(|s| s.to_string()));
        v
    }
}

pub fn generate_synthetic(params: &SynthParams) -> Result<Corpus> {
    params.validate()?;
    let mut rng = rng_for(params.seed, "synth/corpus");
    let n = params.n_users;

    let gold: Vec<usize> = (0..n).map(|_| rng.gen_range(0..2)).collect();

    let n_covered = ((params.desc_keyword_coverage * n as f64).round() as usize).min(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let covered = &order[..n_covered];
    let n_flipped = ((params.keyword_noise * n_covered as f64).round() as usize).min(n_covered);
    let mut keyword_type: Vec<Option<usize>> = vec![None; n];
    for (rank, &u) in covered.iter().enumerate() {
        keyword_type[u] = Some(if rank < n_flipped { 1 - gold[u] } else { gold[u] });
    }

    let by_type: [Vec<usize>; 2] = [
        (0..n).filter(|&u| gold[u] == 0).collect(),
        (0..n).filter(|&u| gold[u] == 1).collect(),
    ];

    let mut raw = Vec::with_capacity(n);
    for u in 0..n {
        let mut desc: Vec<String> = (0..params.filler_per_description)
            .map(|_| format!("{FILLER_PREFIX}{}", rng.gen_range(0..params.filler_vocab_size)))
            .collect();
        if let Some(t) = keyword_type[u] {
            let words = if t == 0 {
                &PRACTITIONER_KEYWORDS
            } else {
                &PROMOTIONAL_KEYWORDS
            };
            let pos = rng.gen_range(0..=desc.len());
            desc.insert(pos, words[rng.gen_range(0..words.len())].to_string());
        }
        if desc.is_empty() {
            desc.push(format!("{FILLER_PREFIX}0"));
        }

        let tweets = (0..params.tweets_per_user)
            .map(|_| {
                (0..params.tokens_per_tweet)
                    .map(|_| {
                        if rng.gen_bool(params.separation) {
                            let i = rng.gen_range(0..params.vocab_size_per_type);
                            format!("{}{i}", TYPE_PREFIX[gold[u]])
                        } else {
                            format!("{SHARED_PREFIX}{}", rng.gen_range(0..params.shared_vocab_size))
                        }
                    })
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();

        let mut mentions: Vec<String> = Vec::new();
        for _ in 0..params.mentions_per_user {
            let t = if rng.gen_bool(params.homophily) {
                gold[u]
            } else {
                1 - gold[u]
            };
            let pool = &by_type[t];
            if pool.is_empty() || (pool.len() == 1 && pool[0] == u) {
                continue;
            }
            let v = loop {
                let v = pool[rng.gen_range(0..pool.len())];
                if v != u {
                    break v;
                }
            };
            let id = user_id(v);
            if !mentions.contains(&id) {
                mentions.push(id);
            }
        }

        raw.push(RawUser {
            user_id: user_id(u),
            description: Some(desc.join(" ")),
            tweets,
            mentions,
            gold_label: Some(default_type_names()[gold[u]].clone()),
        });
    }

    let (corpus, _) = Corpus::from_raw(raw, default_type_names(), Stopwords::builtin())?;
    Ok(corpus)
}

fn user_id(i: usize) -> String {
    format!("u{i:05}")
}

/// Random word vectors for the synthetic vocabulary, uniform in [-1, 1].
pub fn synthetic_word_vectors(params: &SynthParams, dim: usize) -> Result<VocabEmbeddings> {
    if dim == 0 {
        return Err(Error::InvalidParams("word vector dim must be positive".into()));
    }
    let mut rng = rng_for(params.seed, "synth/word-vectors");
    let vocab = params.vocabulary();
    let rows: Vec<Vec<f64>> = vocab
        .iter()
        .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect())
        .collect();
    VocabEmbeddings::from_rows(vocab, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let p = SynthParams {
            n_users: 10,
            seed: 7,
            ..Default::default()
        };
        let a = generate_synthetic(&p).unwrap();
        let b = generate_synthetic(&p).unwrap();
        assert_eq!(serde_json::to_string(&a.to_raw()).unwrap(), serde_json::to_string(&b.to_raw()).unwrap());
        let c = generate_synthetic(&SynthParams { seed: 8, ..p }).unwrap();
        assert_ne!(a.to_raw(), c.to_raw());
    }

    #[test]
    fn full_coverage_every_description_has_keyword() {
        let p = SynthParams {
            n_users: 50,
            desc_keyword_coverage: 1.0,
            ..Default::default()
        };
        let c = generate_synthetic(&p).unwrap();
        for u in &c.users {
            let want: &[&str] = if u.gold_label.unwrap().0 == 0 {
                &PRACTITIONER_KEYWORDS
            } else {
                &PROMOTIONAL_KEYWORDS
            };
            assert!(u.description.iter().any(|t| want.contains(&t)), "{:?}", u.description);
        }
    }

    #[test]
    fn full_homophily_links_same_type() {
        let p = SynthParams {
            n_users: 60,
            homophily: 1.0,
            mentions_per_user: 3,
            seed: 3,
            ..Default::default()
        };
        let c = generate_synthetic(&p).unwrap();
        let mut edges = 0;
        for u in &c.users {
            for &m in &u.mentions {
                edges += 1;
                assert_eq!(u.gold_label, c.users[m].gold_label);
            }
        }
        assert!(edges > 60);
    }

    #[test]
    fn zero_vocab_is_rejected() {
        let p = SynthParams {
            vocab_size_per_type: 0,
            ..Default::default()
        };
        assert!(matches!(generate_synthetic(&p), Err(Error::InvalidParams(_))));
        let p = SynthParams {
            shared_vocab_size: 0,
            ..Default::default()
        };
        assert!(generate_synthetic(&p).is_err());
    }

    #[test]
    fn bad_probability_is_rejected() {
        let p = SynthParams {
            homophily: 1.5,
            ..Default::default()
        };
        assert!(generate_synthetic(&p).is_err());
    }

    #[test]
    fn vocabulary_survives_preprocessing() {
        let p = SynthParams::default();
        for w in p.vocabulary() {
            let t = super::super::preprocess_text(&w, Stopwords::builtin());
            assert_eq!(t.tokens, vec![w]);
        }
    }

    #[test]
    fn word_vectors_cover_vocabulary() {
        let p = SynthParams::default();
        let wv = synthetic_word_vectors(&p, 8).unwrap();
        assert_eq!(wv.len(), p.vocabulary().len());
        assert_eq!(wv.dim(), 8);
    }
}
