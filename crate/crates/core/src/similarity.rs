//! Resource-backed relatedness measures.
//!
//! Three resource kinds share one contract, [`Measure::judge`]:
//!
//! * a word vector table, similar when cosine >= tau;
//! * an attribute map, similar when the attribute sets intersect;
//! * thesaurus entries, similar when some entry holds both words.
//!
//! A pair with a word missing from the resource is [`Verdict::Unknown`].

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pairs::PairRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Similar,
    Dissimilar,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum UnknownPolicy {
    Keep,
    #[default]
    Drop,
}

impl FromStr for UnknownPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "keep" => Ok(UnknownPolicy::Keep),
            "drop" => Ok(UnknownPolicy::Drop),
            other => Err(Error::Config(format!(
                "unknown policy {other:?} (expected keep or drop)"
            ))),
        }
    }
}

impl fmt::Display for UnknownPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnknownPolicy::Keep => "keep",
            UnknownPolicy::Drop => "drop",
        })
    }
}

pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch(u.len(), v.len()));
    }
    let mut dot = 0.0;
    let mut uu = 0.0;
    let mut vv = 0.0;
    for (x, y) in u.iter().zip(v) {
        dot += x * y;
        uu += x * x;
        vv += y * y;
    }
    if uu == 0.0 || vv == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot / (uu.sqrt() * vv.sqrt())).clamp(-1.0, 1.0))
}

fn read_lines(path: &Path) -> Result<impl Iterator<Item = (u64, Result<String>)> + '_> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(BufReader::new(file)
        .lines()
        .enumerate()
        .map(move |(i, l)| (i as u64 + 1, l.map_err(|e| Error::io(path, e)))))
}

#[derive(Debug, Clone, Default)]
pub struct VectorTable {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
    rejected_zero: usize,
}

impl VectorTable {
    pub fn new(dim: usize) -> Self {
        VectorTable {
            dim,
            ..VectorTable::default()
        }
    }

    /// Inserts a vector. Zero vectors are rejected and counted; returns
    /// whether the vector was stored.
    pub fn insert(&mut self, word: &str, vector: Vec<f64>) -> Result<bool> {
        if vector.len() != self.dim || self.dim == 0 {
            return Err(Error::DimensionMismatch(self.dim, vector.len()));
        }
        if vector.iter().all(|&x| x == 0.0) {
            self.rejected_zero += 1;
            return Ok(false);
        }
        self.vectors.insert(word.to_lowercase(), vector);
        Ok(true)
    }

    /// Loads `word v1 ... vd` lines. A leading `count dim` header line, as
    /// written by word2vec-style tools, is skipped.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut table: Option<VectorTable> = None;
        for (line_no, line) in read_lines(path)? {
            let line = line?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if line_no == 1 && fields.len() == 2 && fields.iter().all(|f| f.parse::<u64>().is_ok())
            {
                continue;
            }
            if fields.len() < 2 {
                return Err(Error::parse(
                    path,
                    line_no,
                    "vector line needs a word and values",
                ));
            }
            let vector = fields[1..]
                .iter()
                .map(|f| f.parse::<f64>().ok().filter(|x| x.is_finite()))
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| Error::parse(path, line_no, "non-numeric vector component"))?;
            let table = table.get_or_insert_with(|| VectorTable::new(vector.len()));
            if vector.len() != table.dim {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("dimension {} differs from {}", vector.len(), table.dim),
                ));
            }
            if table.vectors.contains_key(&fields[0].to_lowercase()) {
                log::warn!(
                    "{}:{line_no}: duplicate word {:?} ignored",
                    path.display(),
                    fields[0]
                );
                continue;
            }
            table.insert(fields[0], vector)?;
        }
        let table = table.unwrap_or_default();
        if table.rejected_zero > 0 {
            log::warn!(
                "{}: rejected {} zero vectors",
                path.display(),
                table.rejected_zero
            );
        }
        Ok(table)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn rejected_zero(&self) -> usize {
        self.rejected_zero
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(word).map(Vec::as_slice)
    }

    pub fn similarity(&self, a: &str, b: &str) -> Option<f64> {
        let (u, v) = (self.get(a)?, self.get(b)?);
        // Stored vectors share a dimension and are nonzero.
        cosine(u, v).ok()
    }
}

#[derive(Debug, Clone, Default)]
pub struct AttributeMap(HashMap<String, BTreeSet<String>>);

impl AttributeMap {
    pub fn new() -> Self {
        AttributeMap::default()
    }

    pub fn insert<I, S>(&mut self, word: &str, attributes: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let attrs: BTreeSet<String> = attributes
            .into_iter()
            .map(Into::into)
            .filter(|a| !a.is_empty())
            .collect();
        if !attrs.is_empty() {
            self.0.entry(word.to_lowercase()).or_default().extend(attrs);
        }
    }

    /// Loads `word<TAB>attr1,attr2,...` lines; repeated words accumulate.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut map = AttributeMap::new();
        for (line_no, line) in read_lines(path)? {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (word, attrs) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(path, line_no, "expected word<TAB>attributes"))?;
            let word = word.trim();
            let attrs: Vec<&str> = attrs
                .split(',')
                .map(str::trim)
                .filter(|a| !a.is_empty())
                .collect();
            if word.is_empty() || attrs.is_empty() {
                return Err(Error::parse(path, line_no, "empty word or attribute list"));
            }
            map.insert(word, attrs);
        }
        Ok(map)
    }

    pub fn get(&self, word: &str) -> Option<&BTreeSet<String>> {
        self.0.get(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Default)]
pub struct ThesaurusEntries {
    entries: Vec<Vec<String>>,
    index: HashMap<String, Vec<u32>>,
}

impl ThesaurusEntries {
    pub fn new() -> Self {
        ThesaurusEntries::default()
    }

    /// Adds one entry. Entries with fewer than two distinct words carry no
    /// relation and are ignored; returns whether the entry was kept.
    pub fn push<I, S>(&mut self, words: I) -> bool
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let words: BTreeSet<String> = words
            .into_iter()
            .map(|w| w.as_ref().trim().to_lowercase())
            .filter(|w| !w.is_empty())
            .collect();
        if words.len() < 2 {
            return false;
        }
        let id = self.entries.len() as u32;
        for w in &words {
            self.index.entry(w.clone()).or_default().push(id);
        }
        self.entries.push(words.into_iter().collect());
        true
    }

    /// Loads one space-separated entry per line.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut entries = ThesaurusEntries::new();
        let mut short = 0usize;
        for (_, line) in read_lines(path)? {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            if !entries.push(line.split_whitespace()) {
                short += 1;
            }
        }
        if short > 0 {
            log::warn!(
                "{}: ignored {short} entries with fewer than two words",
                path.display()
            );
        }
        Ok(entries)
    }

    pub fn entries(&self) -> &[Vec<String>] {
        &self.entries
    }

    /// Ids of the entries containing `word`, ascending.
    pub fn entries_of(&self, word: &str) -> Option<&[u32]> {
        self.index.get(word).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn share_entry(&self, a: &str, b: &str) -> Option<bool> {
        let (x, y) = (self.entries_of(a)?, self.entries_of(b)?);
        let (mut i, mut j) = (0, 0);
        while i < x.len() && j < y.len() {
            match x[i].cmp(&y[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return Some(true),
            }
        }
        Some(false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureKind {
    Vector,
    Attribute,
    Thesaurus,
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vector" => Ok(MeasureKind::Vector),
            "attribute" => Ok(MeasureKind::Attribute),
            "thesaurus" => Ok(MeasureKind::Thesaurus),
            other => Err(Error::Config(format!(
                "unknown measure {other:?} (expected vector, attribute or thesaurus)"
            ))),
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeasureKind::Vector => "vector",
            MeasureKind::Attribute => "attribute",
            MeasureKind::Thesaurus => "thesaurus",
        })
    }
}

/// A loaded similarity resource. Immutable after construction.
#[derive(Debug, Clone)]
pub enum Measure {
    Vector { table: VectorTable, tau: f64 },
    Attribute(AttributeMap),
    Thesaurus(ThesaurusEntries),
}

impl Measure {
    pub fn load(kind: MeasureKind, path: impl AsRef<Path>, tau: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&tau) {
            return Err(Error::Config(format!("tau {tau} outside [-1, 1]")));
        }
        Ok(match kind {
            MeasureKind::Vector => Measure::Vector {
                table: VectorTable::load(path)?,
                tau,
            },
            MeasureKind::Attribute => Measure::Attribute(AttributeMap::load(path)?),
            MeasureKind::Thesaurus => Measure::Thesaurus(ThesaurusEntries::load(path)?),
        })
    }

    pub fn kind(&self) -> MeasureKind {
        match self {
            Measure::Vector { .. } => MeasureKind::Vector,
            Measure::Attribute(_) => MeasureKind::Attribute,
            Measure::Thesaurus(_) => MeasureKind::Thesaurus,
        }
    }

    pub fn judge(&self, a: &str, b: &str) -> Verdict {
        let similar = match self {
            Measure::Vector { table, tau } => table.similarity(a, b).map(|c| c >= *tau),
            Measure::Attribute(map) => match (map.get(a), map.get(b)) {
                (Some(x), Some(y)) => Some(!x.is_disjoint(y)),
                _ => None,
            },
            Measure::Thesaurus(entries) => entries.share_entry(a, b),
        };
        match similar {
            Some(true) => Verdict::Similar,
            Some(false) => Verdict::Dissimilar,
            None => Verdict::Unknown,
        }
    }
}

/// Keeps records judged similar; unknown pairs follow `unknown`.
pub fn filter_by_similarity(
    records: &[PairRecord],
    measure: &Measure,
    unknown: UnknownPolicy,
) -> Vec<PairRecord> {
    records
        .iter()
        .filter(|r| match measure.judge(&r.adj_a, &r.adj_b) {
            Verdict::Similar => true,
            Verdict::Dissimilar => false,
            Verdict::Unknown => unknown == UnknownPolicy::Keep,
        })
        .cloned()
        .collect()
}
