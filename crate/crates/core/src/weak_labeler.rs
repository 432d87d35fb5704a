//! Keyword rules over profile descriptions.
//!
//! A rule fires when at least one `trigger_any` keyword is present, at least
//! one `require_any` keyword is present (or the list is empty), and no
//! `exclude_any` keyword is present. Keywords are whole tokens. A keyword
//! that tokenizes to several tokens (`pro-meat`) needs all of them.
//! Descriptions that fire rules for both labels are left unlabeled.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{preprocess_text, Corpus, Stopwords, TokenSeq};
use crate::eval::metrics;
use crate::{Error, Result, UserTypeId};

pub const YOGA_RULES_JSON: &str = include_str!("../rules/yoga.json");
pub const KETO_RULES_JSON: &str = include_str!("../rules/keto.json");
pub const SYNTHETIC_RULES_JSON: &str = include_str!("../rules/synthetic.json");

/// One or more tokens that must all appear.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Keyword(pub Vec<String>);

impl Keyword {
    fn parse(raw: &str) -> Result<Keyword> {
        let tokens = preprocess_text(raw, &Stopwords::empty()).tokens;
        if tokens.is_empty() {
            return Err(Error::InvalidRules(format!("keyword `{raw}` has no tokens")));
        }
        Ok(Keyword(tokens))
    }

    fn matches(&self, present: &HashSet<&str>) -> bool {
        self.0.iter().all(|t| present.contains(t.as_str()))
    }

    pub fn to_text(&self) -> String {
        self.0.join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    /// Index into [`RuleSet::labels`].
    pub label: usize,
    pub trigger_any: Vec<Keyword>,
    pub require_any: Vec<Keyword>,
    pub exclude_any: Vec<Keyword>,
}

impl Rule {
    fn fires(&self, present: &HashSet<&str>) -> bool {
        self.trigger_any.iter().any(|k| k.matches(present))
            && (self.require_any.is_empty() || self.require_any.iter().any(|k| k.matches(present)))
            && !self.exclude_any.iter().any(|k| k.matches(present))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSet {
    pub labels: Vec<String>,
    pub rules: Vec<Rule>,
    pub notes: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
    pub labels: Vec<String>,
    pub rules: Vec<RuleEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleEntry {
    pub label: String,
    pub trigger_any: Vec<String>,
    #[serde(default)]
    pub require_any: Vec<String>,
    #[serde(default)]
    pub exclude_any: Vec<String>,
}

impl RuleSet {
    pub fn from_file(file: RuleFile) -> Result<RuleSet> {
        let labels: Vec<String> = file.labels.iter().map(|l| l.to_lowercase()).collect();
        if labels.len() != 2 || labels[0] == labels[1] {
            return Err(Error::InvalidRules(format!(
                "expected two distinct labels, got {:?}",
                file.labels
            )));
        }
        let parse_all = |words: &[String]| words.iter().map(|w| Keyword::parse(w)).collect::<Result<Vec<_>>>();
        let mut rules = Vec::with_capacity(file.rules.len());
        for (i, entry) in file.rules.iter().enumerate() {
            let name = entry.label.to_lowercase();
            let label = labels
                .iter()
                .position(|l| *l == name)
                .ok_or_else(|| Error::UnknownLabel(entry.label.clone()))?;
            if entry.trigger_any.is_empty() {
                return Err(Error::InvalidRules(format!("rule {i} has an empty trigger_any")));
            }
            rules.push(Rule {
                label,
                trigger_any: parse_all(&entry.trigger_any)?,
                require_any: parse_all(&entry.require_any)?,
                exclude_any: parse_all(&entry.exclude_any)?,
            });
        }
        for (i, l) in labels.iter().enumerate() {
            if !rules.iter().any(|r| r.label == i) {
                return Err(Error::InvalidRules(format!("label `{l}` has no rule")));
            }
        }
        Ok(RuleSet {
            labels,
            rules,
            notes: file.notes,
        })
    }

    pub fn to_file(&self) -> RuleFile {
        let texts = |ks: &[Keyword]| ks.iter().map(Keyword::to_text).collect();
        RuleFile {
            notes: self.notes.clone(),
            labels: self.labels.clone(),
            rules: self
                .rules
                .iter()
                .map(|r| RuleEntry {
                    label: self.labels[r.label].clone(),
                    trigger_any: texts(&r.trigger_any),
                    require_any: texts(&r.require_any),
                    exclude_any: texts(&r.exclude_any),
                })
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<RuleSet> {
        RuleSet::from_file(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn yoga() -> RuleSet {
        RuleSet::from_json(YOGA_RULES_JSON).expect("bundled yoga rules are valid")
    }

    pub fn keto() -> RuleSet {
        RuleSet::from_json(KETO_RULES_JSON).expect("bundled keto rules are valid")
    }

    pub fn synthetic() -> RuleSet {
        RuleSet::from_json(SYNTHETIC_RULES_JSON).expect("bundled synthetic rules are valid")
    }

    /// A shipped rule set by name: `yoga`, `keto` or `synthetic`.
    pub fn builtin(name: &str) -> Option<RuleSet> {
        match name {
            "yoga" => Some(RuleSet::yoga()),
            "keto" => Some(RuleSet::keto()),
            "synthetic" => Some(RuleSet::synthetic()),
            _ => None,
        }
    }

    /// All keywords appearing anywhere in the rule set.
    pub fn keywords(&self) -> impl Iterator<Item = &Keyword> {
        self.rules
            .iter()
            .flat_map(|r| r.trigger_any.iter().chain(&r.require_any).chain(&r.exclude_any))
    }
}

/// Reads a rule file. A path of the form `builtin:<name>` selects a
/// shipped rule set instead.
pub fn load_rules(path: impl AsRef<Path>) -> Result<RuleSet> {
    let path = path.as_ref();
    if let Some(name) = path.to_str().and_then(|p| p.strip_prefix(crate::config::BUILTIN_PREFIX)) {
        return RuleSet::builtin(name).ok_or_else(|| Error::InvalidRules(format!("no shipped rule set named `{name}`")));
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: RuleFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })?;
    RuleSet::from_file(file)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleOutcome {
    NoMatch,
    /// `label` indexes [`RuleSet::labels`]; `rule_id` is the first firing rule.
    Match { label: usize, rule_id: usize },
    Conflict,
}

pub fn apply_rules(rules: &RuleSet, description: &TokenSeq) -> RuleOutcome {
    let present: HashSet<&str> = description.iter().collect();
    let mut first: [Option<usize>; 2] = [None, None];
    for (id, rule) in rules.rules.iter().enumerate() {
        if first[rule.label].is_none() && rule.fires(&present) {
            first[rule.label] = Some(id);
        }
    }
    match first {
        [Some(_), Some(_)] => RuleOutcome::Conflict,
        [Some(rule_id), None] => RuleOutcome::Match { label: 0, rule_id },
        [None, Some(rule_id)] => RuleOutcome::Match { label: 1, rule_id },
        [None, None] => RuleOutcome::NoMatch,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakLabel {
    pub label: UserTypeId,
    pub rule_id: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WeakLabeling {
    pub labels: BTreeMap<String, WeakLabel>,
    pub conflicted: Vec<String>,
    pub n_users: usize,
}

impl WeakLabeling {
    pub fn get(&self, user_id: &str) -> Option<UserTypeId> {
        self.labels.get(user_id).map(|w| w.label)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn conflict_count(&self) -> usize {
        self.conflicted.len()
    }

    pub fn unlabeled_count(&self) -> usize {
        self.n_users - self.labels.len() - self.conflicted.len()
    }

    pub fn coverage(&self) -> f64 {
        ratio(self.labels.len(), self.n_users)
    }

    pub fn conflict_fraction(&self) -> f64 {
        ratio(self.conflicted.len(), self.n_users)
    }

    pub fn unlabeled_fraction(&self) -> f64 {
        ratio(self.unlabeled_count(), self.n_users)
    }

    /// One JSON object per labeled user: `{"user_id", "label", "rule_id"}`.
    pub fn write_jsonl(&self, corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
        use std::io::Write;
        let path = path.as_ref();
        let mut out = String::new();
        for (id, w) in &self.labels {
            let line = serde_json::json!({
                "user_id": id,
                "label": corpus.type_name(w.label),
                "rule_id": w.rule_id,
            });
            out.push_str(&line.to_string());
            out.push('\n');
        }
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
    }

    /// Reads the format written by [`WeakLabeling::write_jsonl`].
    pub fn read_jsonl(corpus: &Corpus, path: impl AsRef<Path>) -> Result<WeakLabeling> {
        #[derive(Deserialize)]
        struct Line {
            user_id: String,
            label: String,
            #[serde(default)]
            rule_id: usize,
        }
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut labels = BTreeMap::new();
        for (i, l) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let line: Line = serde_json::from_str(l).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: e.to_string(),
            })?;
            if corpus.user_index(&line.user_id).is_none() {
                return Err(Error::UnknownUser(line.user_id));
            }
            let label = corpus
                .type_id(&line.label)
                .ok_or_else(|| Error::UnknownLabel(line.label.clone()))?;
            labels.insert(
                line.user_id,
                WeakLabel {
                    label,
                    rule_id: line.rule_id,
                },
            );
        }
        Ok(WeakLabeling {
            labels,
            conflicted: Vec::new(),
            n_users: corpus.len(),
        })
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Applies the rules to every user's description. Rule labels are matched
/// to the corpus type names by name.
pub fn label_corpus(rules: &RuleSet, corpus: &Corpus) -> Result<WeakLabeling> {
    let mut to_type = [UserTypeId(0); 2];
    for (i, name) in rules.labels.iter().enumerate() {
        to_type[i] = corpus
            .type_id(name)
            .ok_or_else(|| Error::UnknownLabel(name.clone()))?;
    }
    let mut out = WeakLabeling {
        n_users: corpus.len(),
        ..Default::default()
    };
    for user in &corpus.users {
        match apply_rules(rules, &user.description) {
            RuleOutcome::NoMatch => {}
            RuleOutcome::Conflict => out.conflicted.push(user.user_id.clone()),
            RuleOutcome::Match { label, rule_id } => {
                out.labels.insert(
                    user.user_id.clone(),
                    WeakLabel {
                        label: to_type[label],
                        rule_id,
                    },
                );
            }
        }
    }
    out.conflicted.sort();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub n_overlap: usize,
    pub accuracy: f64,
    pub macro_f1: f64,
}

/// Compares weak labels with gold labels on users that have both.
pub fn assess_quality(weak: &WeakLabeling, corpus: &Corpus) -> Result<QualityReport> {
    let (pred, gold): (Vec<UserTypeId>, Vec<UserTypeId>) = corpus
        .users
        .iter()
        .filter_map(|u| Some((weak.get(&u.user_id)?, u.gold_label?)))
        .unzip();
    if pred.is_empty() {
        return Err(Error::EmptyEvaluation(
            "no user has both a weak and a gold label".into(),
        ));
    }
    Ok(QualityReport {
        n_overlap: pred.len(),
        accuracy: metrics::accuracy(&pred, &gold)?,
        macro_f1: metrics::macro_f1(&pred, &gold)?,
    })
}
