//! `matches.tsv`: one extracted pattern occurrence per line.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::pairs::PairCounts;
use crate::pattern::{PatternId, PatternMatch};

pub const HEADER: &str = "pattern_id\tweak\tstrong\tfile\toffset";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchRow {
    pub pattern: PatternId,
    pub weak: String,
    pub strong: String,
    pub file: String,
    pub offset: u64,
}

pub struct MatchWriter<W: Write> {
    out: W,
    written: u64,
}

impl<W: Write> MatchWriter<W> {
    pub fn new(mut out: W) -> std::io::Result<Self> {
        writeln!(out, "{HEADER}")?;
        Ok(MatchWriter { out, written: 0 })
    }

    pub fn write(&mut self, m: &PatternMatch, file: &str) -> std::io::Result<()> {
        self.written += 1;
        writeln!(
            self.out,
            "{}\t{}\t{}\t{}\t{}",
            m.pattern, m.weak, m.strong, file, m.sentence_offset
        )
    }

    pub fn written(&self) -> u64 {
        self.written
    }

    pub fn finish(mut self) -> std::io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

fn parse_row(line: &str) -> std::result::Result<MatchRow, String> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 5 {
        return Err(format!("expected 5 columns, found {}", cols.len()));
    }
    let pattern = cols[0].parse::<PatternId>().map_err(|e| e.to_string())?;
    if cols[1].is_empty() || cols[2].is_empty() {
        return Err("empty adjective".into());
    }
    let offset = cols[4]
        .parse::<u64>()
        .map_err(|_| format!("bad offset {:?}", cols[4]))?;
    Ok(MatchRow {
        pattern,
        weak: cols[1].to_string(),
        strong: cols[2].to_string(),
        file: cols[3].to_string(),
        offset,
    })
}

/// Streams rows of a matches file to `f`.
pub fn for_each_row<R: BufRead>(reader: R, name: &Path, mut f: impl FnMut(MatchRow)) -> Result<()> {
    let mut lines = reader.lines();
    match lines.next() {
        Some(Ok(h)) if h.trim_end_matches('\r') == HEADER => {}
        Some(Ok(_)) => return Err(Error::parse(name, 1, "unexpected header")),
        Some(Err(e)) => return Err(Error::io(name, e)),
        None => return Err(Error::parse(name, 1, "missing header")),
    }
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(name, e))?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let row = parse_row(line).map_err(|msg| Error::parse(name, i as u64 + 2, msg))?;
        f(row);
    }
    Ok(())
}

pub fn read_matches_file(path: impl AsRef<Path>) -> Result<Vec<MatchRow>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for_each_row(BufReader::new(file), path, |r| rows.push(r))?;
    Ok(rows)
}

/// Aggregates a matches file into a count map without holding its rows.
pub fn count_matches_file(path: impl AsRef<Path>) -> Result<PairCounts> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut counts = PairCounts::new();
    for_each_row(BufReader::new(file), path, |r| {
        counts.add(r.pattern, &r.weak, &r.strong)
    })?;
    Ok(counts)
}
