//! Antonymy and polarity filters over pair records.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pairs::PairRecord;
use crate::similarity::UnknownPolicy;

/// Negating prefixes recognised by the morphological antonym rule.
pub const ANTONYM_PREFIXES: [&str; 6] = ["il", "in", "un", "im", "dis", "non"];

fn prefixed(base: &str, derived: &str) -> bool {
    ANTONYM_PREFIXES.iter().any(|p| {
        derived
            .strip_prefix(p)
            .map(|rest| rest == base || rest.strip_prefix('-') == Some(base))
            .unwrap_or(false)
    })
}

/// True when one word is the other with a negating prefix, with or without a
/// hyphen (`possible`/`impossible`, `ecclesial`/`non-ecclesial`).
pub fn is_morphological_antonym(a: &str, b: &str) -> bool {
    a != b && !a.is_empty() && !b.is_empty() && (prefixed(a, b) || prefixed(b, a))
}

fn unordered(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

#[derive(Debug, Clone, Default)]
pub struct AntonymLexicon(HashSet<(String, String)>);

impl AntonymLexicon {
    pub fn new() -> Self {
        AntonymLexicon::default()
    }

    pub fn insert(&mut self, a: &str, b: &str) {
        self.0
            .insert(unordered(&a.to_lowercase(), &b.to_lowercase()));
    }

    pub fn contains(&self, a: &str, b: &str) -> bool {
        self.0.contains(&unordered(a, b))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Loads `word<TAB>word` lines. Blank lines and `#` comments are skipped.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lexicon = AntonymLexicon::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut words = line.split('\t').map(str::trim);
            match (words.next(), words.next(), words.next()) {
                (Some(a), Some(b), None) if !a.is_empty() && !b.is_empty() => lexicon.insert(a, b),
                _ => {
                    return Err(Error::parse(
                        path,
                        i as u64 + 1,
                        "expected two tab-separated words",
                    ))
                }
            }
        }
        Ok(lexicon)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Default)]
pub struct PolarityLexicon(HashMap<String, Polarity>);

impl PolarityLexicon {
    /// Builds a lexicon from two word lists. Words listed under both
    /// polarities are dropped; returns the lexicon and the dropped words.
    pub fn from_lists<P, N>(positive: P, negative: N) -> (Self, Vec<String>)
    where
        P: IntoIterator,
        P::Item: AsRef<str>,
        N: IntoIterator,
        N::Item: AsRef<str>,
    {
        let mut map = HashMap::new();
        let mut conflicts = HashSet::new();
        let lists = positive
            .into_iter()
            .map(|w| (w.as_ref().to_lowercase(), Polarity::Positive))
            .chain(
                negative
                    .into_iter()
                    .map(|w| (w.as_ref().to_lowercase(), Polarity::Negative)),
            );
        for (word, polarity) in lists {
            if let Some(previous) = map.insert(word.clone(), polarity) {
                if previous != polarity {
                    conflicts.insert(word);
                }
            }
        }
        for word in &conflicts {
            map.remove(word);
        }
        let mut conflicts: Vec<String> = conflicts.into_iter().collect();
        conflicts.sort();
        (PolarityLexicon(map), conflicts)
    }

    /// Loads the opinion-lexicon word-list pair: one word per line, lines
    /// starting with `;` are comments. Non-UTF-8 bytes are replaced.
    pub fn load(positive: impl AsRef<Path>, negative: impl AsRef<Path>) -> Result<Self> {
        let pos = read_word_list(positive.as_ref())?;
        let neg = read_word_list(negative.as_ref())?;
        let (lexicon, conflicts) = PolarityLexicon::from_lists(pos, neg);
        if !conflicts.is_empty() {
            log::warn!(
                "dropped {} words listed with both polarities: {}",
                conflicts.len(),
                conflicts.join(", ")
            );
        }
        Ok(lexicon)
    }

    pub fn get(&self, word: &str) -> Option<Polarity> {
        self.0.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn read_word_list(path: &Path) -> Result<Vec<String>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(String::from_utf8_lossy(&bytes)
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with(';'))
        .map(str::to_string)
        .collect())
}

pub fn is_antonym_pair(record: &PairRecord, lexicon: &AntonymLexicon) -> bool {
    is_morphological_antonym(&record.adj_a, &record.adj_b)
        || lexicon.contains(&record.adj_a, &record.adj_b)
}

pub fn antonym_filter(records: &[PairRecord], lexicon: &AntonymLexicon) -> Vec<PairRecord> {
    records
        .iter()
        .filter(|r| !is_antonym_pair(r, lexicon))
        .cloned()
        .collect()
}

/// Drops pairs whose words have opposite polarity. A pair with a word
/// missing from the lexicon follows `unknown`.
pub fn polarity_filter(
    records: &[PairRecord],
    lexicon: &PolarityLexicon,
    unknown: UnknownPolicy,
) -> Vec<PairRecord> {
    records
        .iter()
        .filter(|r| match (lexicon.get(&r.adj_a), lexicon.get(&r.adj_b)) {
            (Some(x), Some(y)) => x == y,
            _ => unknown == UnknownPolicy::Keep,
        })
        .cloned()
        .collect()
}

pub fn combined_filter(
    records: &[PairRecord],
    antonyms: &AntonymLexicon,
    polarity: &PolarityLexicon,
    unknown: UnknownPolicy,
) -> Vec<PairRecord> {
    polarity_filter(&antonym_filter(records, antonyms), polarity, unknown)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ApplyMode {
    Antonym,
    Polarity,
    Both,
}

impl FromStr for ApplyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "antonym" => Ok(ApplyMode::Antonym),
            "polarity" => Ok(ApplyMode::Polarity),
            "both" => Ok(ApplyMode::Both),
            other => Err(Error::Config(format!(
                "unknown filter mode {other:?} (expected antonym, polarity or both)"
            ))),
        }
    }
}

impl fmt::Display for ApplyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ApplyMode::Antonym => "antonym",
            ApplyMode::Polarity => "polarity",
            ApplyMode::Both => "both",
        })
    }
}
