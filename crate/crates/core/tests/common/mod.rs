//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use scalemate::pairs::{Direction, DirectionCounts, PairRecord, ResolveOptions};
use scalemate::pattern::PatternId;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(rel)
}

pub fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_scalemate"))
}

/// A record seen `weak_first` times in `weak → strong` order and `reverse`
/// times the other way, all through IF_NOT.
pub fn record(weak: &str, strong: &str, weak_first: u64, reverse: u64) -> PairRecord {
    let (a, b, forward) = if weak < strong {
        (weak, strong, Direction::AWeak)
    } else {
        (strong, weak, Direction::BWeak)
    };
    let mut counts = DirectionCounts::default();
    counts.add(PatternId::IfNot, forward, weak_first);
    counts.add(PatternId::IfNot, forward.flip(), reverse);
    PairRecord::new(
        a.to_string(),
        b.to_string(),
        counts,
        &ResolveOptions::default(),
    )
}

/// An ordered record `weak → strong`.
pub fn ordered(weak: &str, strong: &str) -> PairRecord {
    record(weak, strong, 1, 0)
}
