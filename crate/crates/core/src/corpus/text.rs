//! Text normalization shared by descriptions, tweets and rule keywords.
//!
//! Steps, in order:
//! 1. lowercase the whole string;
//! 2. split on whitespace into chunks;
//! 3. drop chunks that are URLs (`http://`, `https://`, `www.`, `t.co/`)
//!    or that are entirely an emoticon (`:)`, `;-p`, `<3`, `xd`, ...);
//! 4. split the remaining chunks on every character that is not
//!    alphanumeric, treating emoji codepoints as separators;
//! 5. drop stopwords and emoticon-shaped leftovers (`xd`).
//!
//! The output only contains lowercase alphanumeric tokens, so running the
//! function again on the space-joined output is a no-op.

use std::collections::HashSet;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

const STOPWORDS_TXT: &str = include_str!("../../data/stopwords.txt");

/// Ordered, normalized tokens of one piece of text.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenSeq {
    pub tokens: Vec<String>,
}

impl TokenSeq {
    pub fn new(tokens: Vec<String>) -> Self {
        TokenSeq { tokens }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str)
    }

    pub fn joined(&self) -> String {
        self.tokens.join(" ")
    }
}

#[derive(Debug, Clone, Default)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    /// The stopword list bundled with the crate.
    pub fn builtin() -> &'static Stopwords {
        static BUILTIN: OnceLock<Stopwords> = OnceLock::new();
        BUILTIN.get_or_init(|| Stopwords::parse(STOPWORDS_TXT))
    }

    pub fn empty() -> Stopwords {
        Stopwords(HashSet::new())
    }

    /// One word per line; blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Stopwords {
        Stopwords(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<String> for Stopwords {
    fn from_iter<I: IntoIterator<Item = String>>(iter: I) -> Self {
        Stopwords(iter.into_iter().map(|s| s.to_lowercase()).collect())
    }
}

fn emoticon_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        // Western faces (eyes, optional nose, mouth), reversed faces,
        // hearts, "xd" laughter and a few kaomoji. Input is lowercased.
        Regex::new(
            r"^(?:[:;=8][-o*'^]?[()\[\]dpo/\\|*3}{@>$]+|[()\[\]dpo/\\|{}@]+[-o*'^]?[:;=8]|</?3+|x+d+|\^_*\^|-_+-|o_o|t_t|>_<)$",
        )
        .expect("emoticon pattern is valid")
    })
}

fn is_url(chunk: &str) -> bool {
    chunk.starts_with("http://")
        || chunk.starts_with("https://")
        || chunk.starts_with("www.")
        || chunk.contains("t.co/")
        || chunk.contains("://")
}

/// Codepoints in the Unicode emoji and pictograph blocks, plus the joiners
/// and selectors that glue emoji sequences together.
pub fn is_emoji(c: char) -> bool {
    matches!(c as u32,
        0x1F000..=0x1FAFF   // mahjong .. symbols & pictographs extended-A
        | 0x2300..=0x23FF   // misc technical (watch, hourglass, ...)
        | 0x2460..=0x24FF   // enclosed alphanumerics (Ⓜ)
        | 0x2600..=0x27BF   // misc symbols, dingbats
        | 0x2B00..=0x2BFF   // arrows, stars
        | 0x3030 | 0x303D | 0x3297 | 0x3299
        | 0x200D            // zero-width joiner
        | 0xFE00..=0xFE0F   // variation selectors
        | 0x20E3            // combining keycap
        | 0xE0020..=0xE007F // tag sequences (flags)
    )
}

pub fn preprocess_text(raw: &str, stopwords: &Stopwords) -> TokenSeq {
    let lowered = raw.to_lowercase();
    let emoticon = emoticon_re();
    let mut tokens = Vec::new();
    for chunk in lowered.split_whitespace() {
        if is_url(chunk) || emoticon.is_match(chunk) {
            continue;
        }
        for piece in chunk.split(|c: char| !c.is_alphanumeric() || is_emoji(c)) {
            if piece.is_empty() || stopwords.contains(piece) || emoticon.is_match(piece) {
                continue;
            }
            tokens.push(piece.to_string());
        }
    }
    TokenSeq { tokens }
}
