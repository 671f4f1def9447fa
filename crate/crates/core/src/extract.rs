//! Corpus-level extraction across files and worker shards.
//!
//! Each file is cut into sentence-aligned byte ranges and the ranges are
//! matched in parallel. Results are replayed in file and offset order, so the
//! output never depends on the number of workers.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::corpus::{open_corpus, open_corpus_range, shard_ranges, CorpusFormat, ReadStats};
use crate::error::{Error, Result};
use crate::pairs::PairCounts;
use crate::pattern::{for_each_match, MatchOptions, PatternMatch};

#[derive(Debug, Clone)]
pub struct Shard {
    pub file_index: usize,
    pub path: PathBuf,
    pub range: std::ops::Range<u64>,
}

/// Plans shards for `jobs` workers: every file is split into up to `jobs`
/// ranges.
pub fn plan_shards(paths: &[PathBuf], format: CorpusFormat, jobs: usize) -> Result<Vec<Shard>> {
    let mut shards = Vec::new();
    for (file_index, path) in paths.iter().enumerate() {
        for range in shard_ranges(path, format, jobs.max(1))? {
            shards.push(Shard {
                file_index,
                path: path.clone(),
                range,
            });
        }
    }
    Ok(shards)
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} workers: {e}")))
}

fn run_shard(
    shard: &Shard,
    format: CorpusFormat,
    opts: &MatchOptions,
    mut sink: impl FnMut(PatternMatch),
) -> Result<ReadStats> {
    let mut reader = open_corpus_range(&shard.path, format, shard.range.clone())?;
    for sentence in reader.by_ref() {
        for_each_match(&sentence?, opts, &mut sink);
    }
    Ok(reader.stats())
}

/// Extracts every match from `paths`, calling `sink(file_index, match)` in
/// file order and, within a file, in sentence order.
///
/// With one job the corpus is streamed and nothing is buffered. With more,
/// each shard's matches are buffered until its turn to be replayed.
pub fn extract_files(
    paths: &[PathBuf],
    format: CorpusFormat,
    opts: &MatchOptions,
    jobs: usize,
    mut sink: impl FnMut(usize, &PatternMatch),
) -> Result<ReadStats> {
    let mut stats = ReadStats::default();
    if jobs <= 1 {
        for (i, path) in paths.iter().enumerate() {
            let mut reader = open_corpus(path, format)?;
            for sentence in reader.by_ref() {
                for_each_match(&sentence?, opts, |m| sink(i, &m));
            }
            stats.merge(&reader.stats());
        }
        return Ok(stats);
    }
    let shards = plan_shards(paths, format, jobs)?;
    let results: Vec<Result<(Vec<PatternMatch>, ReadStats)>> = pool(jobs)?.install(|| {
        shards
            .par_iter()
            .map(|shard| {
                let mut matches = Vec::new();
                let stats = run_shard(shard, format, opts, |m| matches.push(m))?;
                Ok((matches, stats))
            })
            .collect()
    });
    for (shard, result) in shards.iter().zip(results) {
        let (matches, shard_stats) = result?;
        for m in &matches {
            sink(shard.file_index, m);
        }
        stats.merge(&shard_stats);
    }
    Ok(stats)
}

/// Counts matches per pair with one count map per shard, merged at the end.
pub fn count_files(
    paths: &[PathBuf],
    format: CorpusFormat,
    opts: &MatchOptions,
    jobs: usize,
) -> Result<(PairCounts, ReadStats)> {
    let shards = plan_shards(paths, format, jobs)?;
    let partials: Vec<Result<(PairCounts, ReadStats)>> = pool(jobs)?.install(|| {
        shards
            .par_iter()
            .map(|shard| {
                let mut counts = PairCounts::new();
                let stats = run_shard(shard, format, opts, |m| counts.add_match(&m))?;
                Ok((counts, stats))
            })
            .collect()
    });
    let mut counts = PairCounts::new();
    let mut stats = ReadStats::default();
    for partial in partials {
        let (c, s) = partial?;
        counts.merge(c);
        stats.merge(&s);
    }
    Ok((counts, stats))
}

/// Label used for a corpus file in match output.
pub fn file_label(path: &Path) -> String {
    path.to_string_lossy().into_owned()
}
