//! Streaming readers for POS-tagged corpora.
//!
//! Two on-disk layouts are supported:
//!
//! * `underscore`: one sentence per line, whitespace-separated `word_TAG`
//!   tokens. The tag is split off at the *last* underscore so words such as
//!   `well_known_JJ` keep their inner underscores.
//! * `tsv`: one `word<TAB>tag` token per line, sentences separated by blank
//!   lines.
//!
//! Readers hold one line buffer and one sentence at a time, so memory use is
//! bounded by the longest sentence rather than by the file size. Malformed
//! lines are skipped and counted instead of aborting the run.

use std::collections::BTreeSet;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Seek, SeekFrom};
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A lowercased surface form paired with its part-of-speech tag.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TaggedToken {
    pub surface: String,
    pub tag: String,
}

impl TaggedToken {
    /// Builds a token, lowercasing the surface form. Returns `None` when
    /// either part is empty or the surface contains whitespace.
    pub fn new(surface: &str, tag: &str) -> Option<Self> {
        if surface.is_empty()
            || tag.is_empty()
            || surface.chars().any(char::is_whitespace)
            || tag.chars().any(char::is_whitespace)
        {
            return None;
        }
        Some(TaggedToken {
            surface: surface.to_lowercase(),
            tag: tag.to_string(),
        })
    }

    /// Parses a `word_TAG` token, splitting at the last underscore.
    pub fn parse_underscore(raw: &str) -> Option<Self> {
        let (surface, tag) = raw.rsplit_once('_')?;
        TaggedToken::new(surface, tag)
    }
}

impl fmt::Display for TaggedToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.surface, self.tag)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Sentence {
    pub tokens: Vec<TaggedToken>,
    /// Byte offset of the sentence's first line in its file.
    pub source_offset: u64,
}

impl Sentence {
    /// Parses one line of the `underscore` format. Blank lines yield an empty
    /// sentence; `Err` carries the first offending token.
    pub fn parse_underscore_line(line: &str, source_offset: u64) -> Result<Self, String> {
        let tokens = line
            .split_whitespace()
            .map(|raw| {
                TaggedToken::parse_underscore(raw)
                    .ok_or_else(|| format!("malformed token {raw:?} (expected word_TAG)"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Sentence {
            tokens,
            source_offset,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    #[default]
    Underscore,
    Tsv,
}

impl CorpusFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            CorpusFormat::Underscore => "underscore",
            CorpusFormat::Tsv => "tsv",
        }
    }
}

impl fmt::Display for CorpusFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "underscore" => Ok(CorpusFormat::Underscore),
            "tsv" => Ok(CorpusFormat::Tsv),
            other => Err(Error::Config(format!(
                "unknown corpus format {other:?} (expected underscore or tsv)"
            ))),
        }
    }
}

/// The set of tags that count as adjectives. Never empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjectiveTags(BTreeSet<String>);

impl AdjectiveTags {
    pub fn new<I, S>(tags: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set: BTreeSet<String> = tags
            .into_iter()
            .map(Into::into)
            .map(|t| t.trim().to_string())
            .filter(|t| !t.is_empty())
            .collect();
        if set.is_empty() {
            return Err(Error::Config("adjective tag set is empty".into()));
        }
        Ok(AdjectiveTags(set))
    }

    pub fn contains(&self, tag: &str) -> bool {
        self.0.contains(tag)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

impl Default for AdjectiveTags {
    fn default() -> Self {
        AdjectiveTags(["JJ", "JJR", "JJS"].iter().map(|s| s.to_string()).collect())
    }
}

impl FromStr for AdjectiveTags {
    type Err = Error;

    /// Parses the comma-separated `adjective_tags` config value.
    fn from_str(s: &str) -> Result<Self> {
        AdjectiveTags::new(s.split(','))
    }
}

impl fmt::Display for AdjectiveTags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let joined: Vec<&str> = self.iter().collect();
        f.write_str(&joined.join(","))
    }
}

pub fn is_adjective(token: &TaggedToken, tags: &AdjectiveTags) -> bool {
    tags.contains(&token.tag)
}

/// Line accounting for one reader.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadStats {
    pub lines: u64,
    pub sentences: u64,
    pub blank_lines: u64,
    pub malformed_lines: u64,
}

impl ReadStats {
    pub fn merge(&mut self, other: &ReadStats) {
        self.lines += other.lines;
        self.sentences += other.sentences;
        self.blank_lines += other.blank_lines;
        self.malformed_lines += other.malformed_lines;
    }

    pub fn skipped_lines(&self) -> u64 {
        self.blank_lines + self.malformed_lines
    }
}

/// Streams sentences out of any buffered reader.
///
/// Offsets are absolute: a reader over a byte range of a file starts counting
/// at the range start. Line numbers in warnings are relative to where the
/// reader started.
pub struct CorpusReader<R> {
    reader: R,
    format: CorpusFormat,
    name: PathBuf,
    buf: Vec<u8>,
    offset: u64,
    end: Option<u64>,
    line_no: u64,
    stats: ReadStats,
    done: bool,
}

impl<R: BufRead> CorpusReader<R> {
    pub fn new(reader: R, format: CorpusFormat) -> Self {
        CorpusReader::with_name(reader, format, "<stream>")
    }

    pub fn with_name(reader: R, format: CorpusFormat, name: impl Into<PathBuf>) -> Self {
        CorpusReader {
            reader,
            format,
            name: name.into(),
            buf: Vec::new(),
            offset: 0,
            end: None,
            line_no: 0,
            stats: ReadStats::default(),
            done: false,
        }
    }

    pub fn stats(&self) -> ReadStats {
        self.stats
    }

    pub fn name(&self) -> &Path {
        &self.name
    }

    /// Reads the next raw line into `buf`; returns its start offset, or
    /// `None` at end of input.
    fn next_line(&mut self) -> Result<Option<u64>> {
        if let Some(end) = self.end {
            if self.offset >= end {
                return Ok(None);
            }
        }
        self.buf.clear();
        let n = self
            .reader
            .read_until(b'\n', &mut self.buf)
            .map_err(|e| Error::io(&self.name, e))?;
        if n == 0 {
            return Ok(None);
        }
        let start = self.offset;
        self.offset += n as u64;
        self.line_no += 1;
        self.stats.lines += 1;
        while matches!(self.buf.last(), Some(b'\n' | b'\r')) {
            self.buf.pop();
        }
        Ok(Some(start))
    }

    fn malformed(&mut self, start: u64, message: &str) {
        self.stats.malformed_lines += 1;
        log::warn!(
            "{}:{} (byte {}): skipping line: {}",
            self.name.display(),
            self.line_no,
            start,
            message
        );
    }

    fn next_underscore(&mut self) -> Result<Option<Sentence>> {
        loop {
            let Some(start) = self.next_line()? else {
                return Ok(None);
            };
            let line = match std::str::from_utf8(&self.buf) {
                Ok(line) => line,
                Err(_) => {
                    self.malformed(start, "invalid UTF-8");
                    continue;
                }
            };
            if line.trim().is_empty() {
                self.stats.blank_lines += 1;
                continue;
            }
            match Sentence::parse_underscore_line(line, start) {
                Ok(sentence) => {
                    self.stats.sentences += 1;
                    return Ok(Some(sentence));
                }
                Err(message) => self.malformed(start, &message),
            }
        }
    }

    /// Like `next_line`, but ignores the range end inside a sentence: a
    /// byte-range reader may only stop between sentences.
    fn next_tsv_line(&mut self, in_sentence: bool) -> Result<Option<u64>> {
        if !in_sentence {
            return self.next_line();
        }
        let end = self.end.take();
        let line = self.next_line();
        self.end = end;
        line
    }

    fn next_tsv(&mut self) -> Result<Option<Sentence>> {
        let mut sentence: Option<Sentence> = None;
        while let Some(start) = self.next_tsv_line(sentence.is_some())? {
            let line = match std::str::from_utf8(&self.buf) {
                Ok(line) => line,
                Err(_) => {
                    self.malformed(start, "invalid UTF-8");
                    continue;
                }
            };
            if line.trim().is_empty() {
                self.stats.blank_lines += 1;
                if sentence.is_some() {
                    break;
                }
                continue;
            }
            let token = line
                .split_once('\t')
                .and_then(|(word, tag)| TaggedToken::new(word.trim(), tag.trim()));
            match token {
                Some(token) => sentence
                    .get_or_insert_with(|| Sentence {
                        tokens: Vec::new(),
                        source_offset: start,
                    })
                    .tokens
                    .push(token),
                None => self.malformed(start, "malformed token line (expected word<TAB>tag)"),
            }
        }
        if sentence.is_some() {
            self.stats.sentences += 1;
        }
        Ok(sentence)
    }
}

impl<R: BufRead> Iterator for CorpusReader<R> {
    type Item = Result<Sentence>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let next = match self.format {
            CorpusFormat::Underscore => self.next_underscore(),
            CorpusFormat::Tsv => self.next_tsv(),
        };
        match next {
            Ok(Some(sentence)) => Some(Ok(sentence)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

pub type FileCorpusReader = CorpusReader<BufReader<File>>;

pub fn open_corpus(path: impl AsRef<Path>, format: CorpusFormat) -> Result<FileCorpusReader> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(CorpusReader::with_name(
        BufReader::with_capacity(1 << 16, file),
        format,
        path,
    ))
}

/// Opens a reader over `range`, which must start on a sentence boundary
/// (as produced by [`shard_ranges`]).
pub fn open_corpus_range(
    path: impl AsRef<Path>,
    format: CorpusFormat,
    range: Range<u64>,
) -> Result<FileCorpusReader> {
    let path = path.as_ref();
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    file.seek(SeekFrom::Start(range.start))
        .map_err(|e| Error::io(path, e))?;
    let mut reader = CorpusReader::with_name(BufReader::with_capacity(1 << 16, file), format, path);
    reader.offset = range.start;
    reader.end = Some(range.end);
    Ok(reader)
}

/// Splits a corpus file into at most `k` contiguous byte ranges that start
/// and end on sentence boundaries. Reading the ranges in order yields exactly
/// the sentences of a whole-file read.
pub fn shard_ranges(
    path: impl AsRef<Path>,
    format: CorpusFormat,
    k: usize,
) -> Result<Vec<Range<u64>>> {
    let path = path.as_ref();
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let len = file.metadata().map_err(|e| Error::io(path, e))?.len();
    let k = k.max(1) as u64;
    let mut cuts = vec![0u64];
    for i in 1..k {
        let candidate = len * i / k;
        let last = *cuts.last().unwrap();
        if candidate <= last || candidate == 0 {
            continue;
        }
        let cut = next_boundary(&mut file, format, candidate).map_err(|e| Error::io(path, e))?;
        if cut > last && cut < len {
            cuts.push(cut);
        }
    }
    cuts.push(len);
    Ok(cuts.windows(2).map(|w| w[0]..w[1]).collect())
}

fn next_boundary(file: &mut File, format: CorpusFormat, candidate: u64) -> io::Result<u64> {
    file.seek(SeekFrom::Start(candidate - 1))?;
    let mut reader = BufReader::new(file.by_ref());
    let mut line = Vec::new();
    // Finish the line containing byte `candidate - 1`.
    let mut pos = candidate - 1 + reader.read_until(b'\n', &mut line)? as u64;
    if format == CorpusFormat::Underscore {
        return Ok(pos);
    }
    loop {
        line.clear();
        let n = reader.read_until(b'\n', &mut line)?;
        if n == 0 {
            return Ok(pos);
        }
        pos += n as u64;
        if line.iter().all(u8::is_ascii_whitespace) {
            return Ok(pos);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn read_all(text: &str, format: CorpusFormat) -> (Vec<Sentence>, ReadStats) {
        let mut reader = CorpusReader::new(Cursor::new(text.as_bytes().to_vec()), format);
        let sentences = reader.by_ref().collect::<Result<Vec<_>>>().unwrap();
        (sentences, reader.stats())
    }

    #[test]
    fn tokenizes_underscore_line() {
        let (sentences, stats) = read_all(
            "the_DT water_NN is_VBZ warm_JJ if_IN not_RB hot_JJ ._.\n",
            CorpusFormat::Underscore,
        );
        assert_eq!(sentences.len(), 1);
        assert_eq!(sentences[0].tokens.len(), 8);
        assert_eq!(sentences[0].tokens[7], TaggedToken::new(".", ".").unwrap());
        assert_eq!(stats.malformed_lines, 0);
    }

    #[test]
    fn empty_input_is_empty_stream() {
        let (sentences, stats) = read_all("", CorpusFormat::Underscore);
        assert!(sentences.is_empty());
        assert_eq!(stats, ReadStats::default());
    }

    #[test]
    fn splits_at_last_underscore_and_lowercases() {
        let t = TaggedToken::parse_underscore("Well_Known_JJ").unwrap();
        assert_eq!(t.surface, "well_known");
        assert_eq!(t.tag, "JJ");
        assert!(TaggedToken::parse_underscore("nounderscore").is_none());
        assert!(TaggedToken::parse_underscore("word_").is_none());
        assert!(TaggedToken::parse_underscore("_NN").is_none());
    }

    #[test]
    fn malformed_lines_are_skipped_and_counted() {
        let text = "good_JJ day_NN\nbroken line_NN\n\r\nhot_JJ\n\n";
        let (sentences, stats) = read_all(text, CorpusFormat::Underscore);
        assert_eq!(sentences.len(), 2);
        assert_eq!(stats.lines, 5);
        assert_eq!(stats.malformed_lines, 1);
        assert_eq!(stats.blank_lines, 2);
        assert_eq!(stats.skipped_lines() + stats.sentences, stats.lines);
        assert_eq!(sentences[1].source_offset, 32);
    }

    #[test]
    fn invalid_utf8_is_malformed() {
        let mut bytes = b"ok_JJ\n".to_vec();
        bytes.extend_from_slice(&[0xff, b'_', b'N', b'N', b'\n']);
        let mut reader = CorpusReader::new(Cursor::new(bytes), CorpusFormat::Underscore);
        assert_eq!(reader.by_ref().count(), 1);
        assert_eq!(reader.stats().malformed_lines, 1);
    }

    #[test]
    fn reads_tsv_sentences() {
        let text = "Warm\tJJ\nif\tIN\nnot\tRB\nhot\tJJ\n\n\nbad line\nsecond\tNN\n";
        let (sentences, stats) = read_all(text, CorpusFormat::Tsv);
        assert_eq!(sentences.len(), 2);
        assert_eq!(sentences[0].tokens.len(), 4);
        assert_eq!(sentences[0].tokens[0].surface, "warm");
        assert_eq!(sentences[1].tokens.len(), 1);
        assert_eq!(sentences[1].source_offset, 39);
        assert_eq!(stats.malformed_lines, 1);
        assert_eq!(stats.blank_lines, 2);
    }

    #[test]
    fn adjective_membership() {
        let tags = AdjectiveTags::default();
        assert!(is_adjective(
            &TaggedToken::new("warm", "JJ").unwrap(),
            &tags
        ));
        assert!(!is_adjective(
            &TaggedToken::new("warm", "NN").unwrap(),
            &tags
        ));
        let jj: AdjectiveTags = "JJ".parse().unwrap();
        assert!(!is_adjective(
            &TaggedToken::new("warmer", "JJR").unwrap(),
            &jj
        ));
        assert!(" , ".parse::<AdjectiveTags>().is_err());
    }

    #[test]
    fn shard_ranges_cover_file_on_boundaries() {
        use std::io::Write;
        for format in [CorpusFormat::Underscore, CorpusFormat::Tsv] {
            let mut file = tempfile::NamedTempFile::new().unwrap();
            for i in 0..200 {
                match format {
                    CorpusFormat::Underscore => writeln!(file, "w{i}_NN x_JJ").unwrap(),
                    CorpusFormat::Tsv => write!(file, "w{i}\tNN\nx\tJJ\n\n").unwrap(),
                }
            }
            file.flush().unwrap();
            let whole: Vec<Sentence> = open_corpus(file.path(), format)
                .unwrap()
                .collect::<Result<_>>()
                .unwrap();
            for k in [1, 2, 3, 7, 16, 500] {
                let ranges = shard_ranges(file.path(), format, k).unwrap();
                assert!(ranges.len() <= k);
                let mut pieces = Vec::new();
                for r in ranges {
                    let reader = open_corpus_range(file.path(), format, r).unwrap();
                    pieces.extend(reader.map(|s| s.unwrap()));
                }
                assert_eq!(pieces, whole, "format {format} k {k}");
            }
        }
    }
}
