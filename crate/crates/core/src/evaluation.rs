//! Scoring predicted orderings against subjectivity labels and arousal norms.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pairs::PairRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strength {
    Weak,
    Strong,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubjectivityOptions {
    /// When an entry has a `pos1` field, keep it only for `adj` or `anypos`.
    pub adjectives_only: bool,
}

impl Default for SubjectivityOptions {
    fn default() -> Self {
        SubjectivityOptions {
            adjectives_only: true,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SubjectivityLexicon(HashMap<String, Strength>);

impl SubjectivityLexicon {
    /// Builds a lexicon, dropping words that carry both labels. Returns the
    /// dropped words, sorted.
    pub fn from_entries<I, S>(entries: I) -> (Self, Vec<String>)
    where
        I: IntoIterator<Item = (S, Strength)>,
        S: AsRef<str>,
    {
        let mut map = HashMap::new();
        let mut conflicts = Vec::new();
        for (word, strength) in entries {
            let word = word.as_ref().to_lowercase();
            if let Some(prev) = map.insert(word.clone(), strength) {
                if prev != strength {
                    conflicts.push(word);
                }
            }
        }
        conflicts.sort();
        conflicts.dedup();
        for w in &conflicts {
            map.remove(w);
        }
        (SubjectivityLexicon(map), conflicts)
    }

    /// Parses the subjectivity-clues format: whitespace-separated `key=value`
    /// fields with required `type` (`weaksubj`/`strongsubj`) and `word1`.
    /// Lines missing either are skipped with a warning.
    pub fn parse(text: &str, opts: &SubjectivityOptions) -> (Self, Vec<String>) {
        let mut entries = Vec::new();
        let mut skipped = 0usize;
        for line in text.lines() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: HashMap<&str, &str> = line
                .split_whitespace()
                .filter_map(|f| f.split_once('='))
                .collect();
            let strength = match fields.get("type") {
                Some(&"weaksubj") => Strength::Weak,
                Some(&"strongsubj") => Strength::Strong,
                _ => {
                    skipped += 1;
                    continue;
                }
            };
            let Some(word) = fields.get("word1").filter(|w| !w.is_empty()) else {
                skipped += 1;
                continue;
            };
            if opts.adjectives_only {
                if let Some(pos) = fields.get("pos1") {
                    if *pos != "adj" && *pos != "anypos" {
                        continue;
                    }
                }
            }
            entries.push((word.to_string(), strength));
        }
        if skipped > 0 {
            log::warn!("skipped {skipped} subjectivity lines without type/word1");
        }
        SubjectivityLexicon::from_entries(entries)
    }

    pub fn load(path: impl AsRef<Path>, opts: &SubjectivityOptions) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let (lexicon, conflicts) =
            SubjectivityLexicon::parse(&String::from_utf8_lossy(&bytes), opts);
        if !conflicts.is_empty() {
            log::warn!(
                "{}: dropped {} words with conflicting labels",
                path.display(),
                conflicts.len()
            );
        }
        Ok(lexicon)
    }

    pub fn get(&self, word: &str) -> Option<Strength> {
        self.0.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormsColumns {
    pub word_column: String,
    pub value_column: String,
}

impl Default for NormsColumns {
    /// Column names of the widely distributed arousal/valence/dominance norms.
    fn default() -> Self {
        NormsColumns {
            word_column: "Word".into(),
            value_column: "A.Mean.Sum".into(),
        }
    }
}

/// Per-word ratings on the 1..=9 scale.
#[derive(Debug, Clone, Default)]
pub struct ArousalNorms(HashMap<String, f64>);

impl ArousalNorms {
    pub fn from_pairs<I, S>(pairs: I) -> std::result::Result<Self, String>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: AsRef<str>,
    {
        let mut map = HashMap::new();
        for (word, value) in pairs {
            let word = word.as_ref().trim().to_lowercase();
            if !(1.0..=9.0).contains(&value) {
                return Err(format!("value {value} for {word:?} outside [1, 9]"));
            }
            if map.insert(word.clone(), value).is_some() {
                return Err(format!("duplicate word {word:?}"));
            }
        }
        Ok(ArousalNorms(map))
    }

    pub fn load(path: impl AsRef<Path>, columns: &NormsColumns) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)
            .map_err(|e| csv_error(path, e))?;
        let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
        let find = |name: &str| {
            headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| Error::parse(path, 1, format!("missing column {name:?}")))
        };
        let word_col = find(&columns.word_column)?;
        let value_col = find(&columns.value_column)?;
        let mut map = HashMap::new();
        for (i, row) in reader.records().enumerate() {
            let line = i as u64 + 2;
            let row = row.map_err(|e| csv_error(path, e))?;
            let word = row.get(word_col).unwrap_or("").trim().to_lowercase();
            let raw = row.get(value_col).unwrap_or("").trim();
            if word.is_empty() {
                return Err(Error::parse(path, line, "empty word"));
            }
            let value: f64 = raw
                .parse()
                .map_err(|_| Error::parse(path, line, format!("bad value {raw:?}")))?;
            if !(1.0..=9.0).contains(&value) {
                return Err(Error::parse(
                    path,
                    line,
                    format!("value {value} outside [1, 9]"),
                ));
            }
            if map.insert(word.clone(), value).is_some() {
                return Err(Error::parse(path, line, format!("duplicate word {word:?}")));
            }
        }
        Ok(ArousalNorms(map))
    }

    pub fn get(&self, word: &str) -> Option<f64> {
        self.0.get(word).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        kind => Error::parse(path, line, format!("{kind:?}")),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub dataset: String,
    pub test_count: u64,
    pub correct_count: u64,
    /// Percentage correct; `None` for an empty test set.
    pub accuracy: Option<f64>,
}

impl EvaluationReport {
    pub fn new(dataset: &str, test_count: u64, correct_count: u64) -> Self {
        debug_assert!(correct_count <= test_count);
        EvaluationReport {
            dataset: dataset.to_string(),
            test_count,
            correct_count,
            accuracy: (test_count > 0).then(|| 100.0 * correct_count as f64 / test_count as f64),
        }
    }
}

impl fmt::Display for EvaluationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {}/{} correct",
            self.dataset, self.correct_count, self.test_count
        )?;
        match self.accuracy {
            Some(a) => write!(f, " ({a:.2}%)"),
            None => write!(f, " (no test items)"),
        }
    }
}

/// Counts ordered records whose two words carry different strength labels;
/// correct when the weak word is labelled weak.
pub fn eval_subjectivity(
    records: &[PairRecord],
    lexicon: &SubjectivityLexicon,
) -> EvaluationReport {
    let (mut test, mut correct) = (0, 0);
    for (weak, strong) in records.iter().filter_map(PairRecord::ordered) {
        if let (Some(w), Some(s)) = (lexicon.get(weak), lexicon.get(strong)) {
            if w != s {
                test += 1;
                if w == Strength::Weak {
                    correct += 1;
                }
            }
        }
    }
    EvaluationReport::new("subjectivity", test, correct)
}

fn arousal_contrast(x: f64, y: f64, min_gap: f64) -> bool {
    x != y && (x - y).abs() > min_gap
}

/// Counts ordered records whose words differ in arousal by more than
/// `min_gap`; correct when the weak word is less arousing.
pub fn eval_arousal(
    records: &[PairRecord],
    norms: &ArousalNorms,
    min_gap: f64,
) -> EvaluationReport {
    let (mut test, mut correct) = (0, 0);
    for (weak, strong) in records.iter().filter_map(PairRecord::ordered) {
        if let (Some(w), Some(s)) = (norms.get(weak), norms.get(strong)) {
            if arousal_contrast(w, s, min_gap) {
                test += 1;
                if w < s {
                    correct += 1;
                }
            }
        }
    }
    EvaluationReport::new("arousal", test, correct)
}

/// Pair types on which both datasets imply the same order, keyed by the
/// lexicographically ordered pair and mapping to the agreed weak word.
pub type AgreedSet = BTreeMap<(String, String), String>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    /// Pair types contrastive in both datasets.
    pub compared: u64,
    pub agreeing: u64,
    pub percentage: Option<f64>,
    #[serde(skip)]
    pub agreed: AgreedSet,
}

/// Compares the order implied by the subjectivity labels with the order
/// implied by the arousal norms, over the pair types among `records`.
///
/// Record direction plays no part; tied records are compared too.
pub fn dataset_agreement(
    records: &[PairRecord],
    lexicon: &SubjectivityLexicon,
    norms: &ArousalNorms,
    min_gap: f64,
) -> Agreement {
    let mut agreed = AgreedSet::new();
    let mut seen = std::collections::HashSet::new();
    let (mut compared, mut agreeing) = (0, 0);
    for r in records {
        if !seen.insert(r.key()) {
            continue;
        }
        let (a, b) = r.key();
        let (Some(sa), Some(sb)) = (lexicon.get(a), lexicon.get(b)) else {
            continue;
        };
        let (Some(na), Some(nb)) = (norms.get(a), norms.get(b)) else {
            continue;
        };
        if sa == sb || !arousal_contrast(na, nb, min_gap) {
            continue;
        }
        compared += 1;
        let subj_weak = if sa == Strength::Weak { a } else { b };
        let arousal_weak = if na < nb { a } else { b };
        if subj_weak == arousal_weak {
            agreeing += 1;
            agreed.insert((a.to_string(), b.to_string()), subj_weak.to_string());
        }
    }
    Agreement {
        compared,
        agreeing,
        percentage: (compared > 0).then(|| 100.0 * agreeing as f64 / compared as f64),
        agreed,
    }
}

/// Scores ordered records on the agreed subset.
pub fn eval_combined(records: &[PairRecord], agreed: &AgreedSet) -> EvaluationReport {
    let (mut test, mut correct) = (0, 0);
    for r in records {
        let Some((weak, _)) = r.ordered() else {
            continue;
        };
        if let Some(agreed_weak) = agreed.get(&(r.adj_a.clone(), r.adj_b.clone())) {
            test += 1;
            if agreed_weak == weak {
                correct += 1;
            }
        }
    }
    EvaluationReport::new("combined", test, correct)
}
