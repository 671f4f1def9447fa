//! Aggregation of pattern matches into per-pair evidence and scale direction.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pattern::{PatternId, PatternMatch};

/// Which member of the stored (lexicographically ordered) pair is weaker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    AWeak,
    BWeak,
}

impl Direction {
    fn index(self) -> usize {
        match self {
            Direction::AWeak => 0,
            Direction::BWeak => 1,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Direction::AWeak => Direction::BWeak,
            Direction::BWeak => Direction::AWeak,
        }
    }
}

/// Occurrence counts per pattern and direction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct DirectionCounts([[u64; 2]; 6]);

impl DirectionCounts {
    pub fn get(&self, pattern: PatternId, direction: Direction) -> u64 {
        self.0[pattern.index()][direction.index()]
    }

    pub fn add(&mut self, pattern: PatternId, direction: Direction, n: u64) {
        self.0[pattern.index()][direction.index()] += n;
    }

    pub fn merge(&mut self, other: &DirectionCounts) {
        for (mine, theirs) in self.0.iter_mut().zip(other.0.iter()) {
            mine[0] += theirs[0];
            mine[1] += theirs[1];
        }
    }

    pub fn total(&self, direction: Direction) -> u64 {
        self.0.iter().map(|c| c[direction.index()]).sum()
    }

    pub fn grand_total(&self) -> u64 {
        self.total(Direction::AWeak) + self.total(Direction::BWeak)
    }

    /// Number of distinct patterns with any occurrence.
    pub fn pattern_type_count(&self) -> usize {
        self.0.iter().filter(|c| c[0] + c[1] > 0).count()
    }

    /// The same evidence with every occurrence's direction reversed.
    pub fn flipped(&self) -> Self {
        let mut out = *self;
        for c in out.0.iter_mut() {
            c.swap(0, 1);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Resolution {
    Ordered(Direction),
    /// Equal directional totals; the pair carries no order.
    Tie,
    /// Majority share under the configured `min_direction_ratio`.
    BelowRatio,
}

impl Resolution {
    fn flag(self) -> u8 {
        match self {
            Resolution::Ordered(_) => 0,
            Resolution::Tie => 1,
            Resolution::BelowRatio => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ResolveOptions {
    /// When set, a pair is only ordered if the majority direction holds at
    /// least this share of its occurrences. Disabled by default.
    pub min_direction_ratio: Option<f64>,
}

/// Resolves direction by pooled majority across all patterns.
pub fn resolve(counts: &DirectionCounts, opts: &ResolveOptions) -> Resolution {
    let a = counts.total(Direction::AWeak);
    let b = counts.total(Direction::BWeak);
    if a == b {
        return Resolution::Tie;
    }
    let (direction, majority) = if a > b {
        (Direction::AWeak, a)
    } else {
        (Direction::BWeak, b)
    };
    if let Some(ratio) = opts.min_direction_ratio {
        if (majority as f64) < ratio * (a + b) as f64 {
            return Resolution::BelowRatio;
        }
    }
    Resolution::Ordered(direction)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PairRecord {
    /// Lexicographically smaller member.
    pub adj_a: String,
    pub adj_b: String,
    pub counts: DirectionCounts,
    pub resolution: Resolution,
}

impl PairRecord {
    pub fn new(
        adj_a: String,
        adj_b: String,
        counts: DirectionCounts,
        opts: &ResolveOptions,
    ) -> Self {
        debug_assert!(adj_a < adj_b);
        let resolution = resolve(&counts, opts);
        PairRecord {
            adj_a,
            adj_b,
            counts,
            resolution,
        }
    }

    pub fn pattern_type_count(&self) -> usize {
        self.counts.pattern_type_count()
    }

    pub fn is_ordered(&self) -> bool {
        matches!(self.resolution, Resolution::Ordered(_))
    }

    /// `(weak, strong)` for ordered records.
    pub fn ordered(&self) -> Option<(&str, &str)> {
        match self.resolution {
            Resolution::Ordered(Direction::AWeak) => Some((&self.adj_a, &self.adj_b)),
            Resolution::Ordered(Direction::BWeak) => Some((&self.adj_b, &self.adj_a)),
            _ => None,
        }
    }

    pub fn key(&self) -> (&str, &str) {
        (&self.adj_a, &self.adj_b)
    }

    /// The record with every occurrence's direction swapped, re-resolved.
    pub fn reversed(&self, opts: &ResolveOptions) -> Self {
        PairRecord::new(
            self.adj_a.clone(),
            self.adj_b.clone(),
            self.counts.flipped(),
            opts,
        )
    }
}

/// Mergeable count map keyed by unordered pair.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairCounts(BTreeMap<(String, String), DirectionCounts>);

impl PairCounts {
    pub fn new() -> Self {
        PairCounts::default()
    }

    pub fn add(&mut self, pattern: PatternId, weak: &str, strong: &str) {
        self.add_n(pattern, weak, strong, 1);
    }

    pub fn add_n(&mut self, pattern: PatternId, weak: &str, strong: &str, n: u64) {
        if weak == strong {
            return;
        }
        let (key, direction) = if weak < strong {
            ((weak, strong), Direction::AWeak)
        } else {
            ((strong, weak), Direction::BWeak)
        };
        self.0
            .entry((key.0.to_string(), key.1.to_string()))
            .or_default()
            .add(pattern, direction, n);
    }

    pub fn add_match(&mut self, m: &PatternMatch) {
        self.add(m.pattern, &m.weak, &m.strong);
    }

    pub fn merge(&mut self, other: PairCounts) {
        for (key, counts) in other.0 {
            self.0.entry(key).or_default().merge(&counts);
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Resolves every pair; output is sorted by pair.
    pub fn resolve(self, opts: &ResolveOptions) -> Vec<PairRecord> {
        self.0
            .into_iter()
            .map(|((a, b), counts)| PairRecord::new(a, b, counts, opts))
            .collect()
    }
}

impl<'a> FromIterator<&'a PatternMatch> for PairCounts {
    fn from_iter<T: IntoIterator<Item = &'a PatternMatch>>(iter: T) -> Self {
        let mut counts = PairCounts::new();
        for m in iter {
            counts.add_match(m);
        }
        counts
    }
}

pub fn aggregate<'a>(
    matches: impl IntoIterator<Item = &'a PatternMatch>,
    opts: &ResolveOptions,
) -> Vec<PairRecord> {
    matches.into_iter().collect::<PairCounts>().resolve(opts)
}

/// Number of pairs by how many distinct patterns they occur in.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternTypeHistogram {
    /// `by_type_count[n - 1]` is the number of pairs seen in `n` patterns.
    pub by_type_count: [u64; 6],
    pub total: u64,
    pub ties: u64,
    pub below_ratio: u64,
}

impl PatternTypeHistogram {
    pub fn get(&self, n: usize) -> u64 {
        self.by_type_count[n - 1]
    }

    pub fn total_ordered(&self) -> u64 {
        self.total - self.ties - self.below_ratio
    }
}

pub fn pattern_type_histogram<'a>(
    records: impl IntoIterator<Item = &'a PairRecord>,
) -> PatternTypeHistogram {
    let mut h = PatternTypeHistogram::default();
    for r in records {
        let n = r.pattern_type_count();
        if (1..=6).contains(&n) {
            h.by_type_count[n - 1] += 1;
        }
        h.total += 1;
        match r.resolution {
            Resolution::Tie => h.ties += 1,
            Resolution::BelowRatio => h.below_ratio += 1,
            Resolution::Ordered(_) => {}
        }
    }
    h
}

impl fmt::Display for PatternTypeHistogram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<10}", "Patterns")?;
        for n in 1..=6 {
            write!(f, "{n:>10}")?;
        }
        writeln!(f)?;
        write!(f, "{:<10}", "Pairs")?;
        for n in 1..=6 {
            write!(f, "{:>10}", self.get(n))?;
        }
        writeln!(f)?;
        writeln!(f, "total pairs:          {}", self.total)?;
        writeln!(f, "ordered (no ties):    {}", self.total_ordered())?;
        writeln!(f, "discarded ties:       {}", self.ties)?;
        if self.below_ratio > 0 {
            writeln!(f, "below direction ratio: {}", self.below_ratio)?;
        }
        Ok(())
    }
}

fn header() -> String {
    let mut cols = vec![
        "weak".to_string(),
        "strong".to_string(),
        "tie_flag".to_string(),
        "pattern_type_count".to_string(),
    ];
    for p in PatternId::ALL {
        let name = p.as_str().to_lowercase();
        cols.push(format!("{name}_fwd"));
        cols.push(format!("{name}_rev"));
    }
    cols.join("\t")
}

/// Writes records as TSV, sorted by pair.
///
/// `weak`/`strong` hold the resolved order (or the stored order for unordered
/// records). Per pattern, `_fwd` counts occurrences in the written order and
/// `_rev` the opposite.
pub fn write_pairs<W: Write>(records: &[PairRecord], mut out: W) -> std::io::Result<()> {
    let mut sorted: Vec<&PairRecord> = records.iter().collect();
    sorted.sort_by(|x, y| x.key().cmp(&y.key()));
    writeln!(out, "{}", header())?;
    for r in sorted {
        let forward = match r.resolution {
            Resolution::Ordered(d) => d,
            _ => Direction::AWeak,
        };
        let (weak, strong) = match forward {
            Direction::AWeak => (&r.adj_a, &r.adj_b),
            Direction::BWeak => (&r.adj_b, &r.adj_a),
        };
        write!(
            out,
            "{weak}\t{strong}\t{}\t{}",
            r.resolution.flag(),
            r.pattern_type_count()
        )?;
        for p in PatternId::ALL {
            write!(
                out,
                "\t{}\t{}",
                r.counts.get(p, forward),
                r.counts.get(p, forward.flip())
            )?;
        }
        writeln!(out)?;
    }
    out.flush()
}

pub fn write_pairs_file(records: &[PairRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_pairs(records, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

pub fn read_pairs<R: BufRead>(reader: R, name: &Path) -> Result<Vec<PairRecord>> {
    let mut lines = reader.lines();
    let expected = header();
    match lines.next() {
        Some(Ok(h)) if h.trim_end_matches('\r') == expected => {}
        Some(Ok(_)) => return Err(Error::parse(name, 1, "unexpected header")),
        Some(Err(e)) => return Err(Error::io(name, e)),
        None => return Err(Error::parse(name, 1, "missing header")),
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let line_no = i as u64 + 2;
        let line = line.map_err(|e| Error::io(name, e))?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        records.push(parse_pair_line(line).map_err(|msg| Error::parse(name, line_no, msg))?);
    }
    Ok(records)
}

pub fn read_pairs_file(path: impl AsRef<Path>) -> Result<Vec<PairRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_pairs(BufReader::new(file), path)
}

fn parse_pair_line(line: &str) -> std::result::Result<PairRecord, String> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 16 {
        return Err(format!("expected 16 columns, found {}", cols.len()));
    }
    let (weak, strong) = (cols[0], cols[1]);
    if weak.is_empty() || strong.is_empty() || weak == strong {
        return Err("weak and strong must be distinct non-empty words".into());
    }
    let num = |s: &str| s.parse::<u64>().map_err(|_| format!("not a count: {s:?}"));
    let flag = num(cols[2])?;
    let type_count = num(cols[3])?;

    let forward = if weak < strong {
        Direction::AWeak
    } else {
        Direction::BWeak
    };
    let mut counts = DirectionCounts::default();
    for (k, p) in PatternId::ALL.into_iter().enumerate() {
        counts.add(p, forward, num(cols[4 + 2 * k])?);
        counts.add(p, forward.flip(), num(cols[5 + 2 * k])?);
    }
    if counts.pattern_type_count() as u64 != type_count {
        return Err("pattern_type_count disagrees with counts".into());
    }
    if type_count == 0 {
        return Err("record has no occurrences".into());
    }
    let fwd_total = counts.total(forward);
    let rev_total = counts.total(forward.flip());
    let resolution = match flag {
        0 if fwd_total > rev_total => Resolution::Ordered(forward),
        0 => return Err("weak column is not the majority direction".into()),
        1 if fwd_total == rev_total => Resolution::Tie,
        1 => return Err("tie flag set on unequal counts".into()),
        2 if fwd_total != rev_total => Resolution::BelowRatio,
        _ => return Err(format!("invalid tie_flag {flag}")),
    };
    let (adj_a, adj_b) = if weak < strong {
        (weak, strong)
    } else {
        (strong, weak)
    };
    Ok(PairRecord {
        adj_a: adj_a.to_string(),
        adj_b: adj_b.to_string(),
        counts,
        resolution,
    })
}
