//! Deterministic synthetic corpora with planted pattern occurrences.
//!
//! Noise sentences are drawn from a vocabulary that contains none of the
//! templates' fixed words, so the planted sentences are the only places a
//! template can match. The returned manifest lists every expected match.

use std::io::{self, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::pattern::{PatternId, Slot};

const NOUNS: &[&str] = &[
    "water", "day", "room", "price", "film", "result", "city", "market", "team", "idea", "plan",
    "report", "student", "road", "weather", "house",
];
const VERBS: &[&str] = &[
    "is", "was", "seems", "became", "looks", "remained", "felt", "got",
];
const DETERMINERS: &[&str] = &["the", "a", "this", "that", "every", "some"];
const NOISE_ADJECTIVES: &[&str] = &[
    "big", "small", "old", "new", "red", "quiet", "loud", "cheap", "slow", "fast", "dark",
    "bright", "local", "global", "simple",
];
const ADVERBS: &[&str] = &["very", "quite", "really", "often", "always", "rather"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plant {
    pub pattern: PatternId,
    pub weak: String,
    pub strong: String,
    pub count: usize,
}

impl Plant {
    pub fn new(pattern: PatternId, weak: &str, strong: &str, count: usize) -> Self {
        Plant {
            pattern,
            weak: weak.to_string(),
            strong: strong.to_string(),
            count,
        }
    }
}

impl std::str::FromStr for Plant {
    type Err = String;

    /// Parses `PATTERN:weak:strong:count`.
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 4 {
            return Err(format!("expected PATTERN:weak:strong:count, got {s:?}"));
        }
        let pattern = parts[0].parse::<PatternId>().map_err(|e| e.to_string())?;
        let count = parts[3]
            .parse()
            .map_err(|_| format!("bad count {:?}", parts[3]))?;
        let ok =
            |w: &str| !w.is_empty() && !w.contains(char::is_whitespace) && w == w.to_lowercase();
        if !ok(parts[1]) || !ok(parts[2]) || parts[1] == parts[2] {
            return Err(format!(
                "plant words must be distinct lowercase words: {s:?}"
            ));
        }
        Ok(Plant::new(pattern, parts[1], parts[2], count))
    }
}

#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub plants: Vec<Plant>,
    pub noise_sentences: usize,
    pub seed: u64,
    /// Occasionally put a comma token inside planted templates.
    pub punctuation: bool,
}

/// One planted occurrence as the extractor should report it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ManifestEntry {
    pub pattern: PatternId,
    pub weak: String,
    pub strong: String,
    pub offset: u64,
    pub token_index: usize,
}

pub const MANIFEST_HEADER: &str = "pattern_id\tweak\tstrong\toffset\ttoken_index";

pub fn write_manifest<W: Write>(entries: &[ManifestEntry], mut out: W) -> io::Result<()> {
    writeln!(out, "{MANIFEST_HEADER}")?;
    for e in entries {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            e.pattern, e.weak, e.strong, e.offset, e.token_index
        )?;
    }
    out.flush()
}

fn pick<'a>(rng: &mut ChaCha8Rng, words: &[&'a str]) -> &'a str {
    words[rng.random_range(0..words.len())]
}

fn noise_token(rng: &mut ChaCha8Rng) -> (&'static str, &'static str) {
    match rng.random_range(0..5) {
        0 => (pick(rng, NOUNS), "NN"),
        1 => (pick(rng, VERBS), "VBZ"),
        2 => (pick(rng, DETERMINERS), "DT"),
        3 => (pick(rng, NOISE_ADJECTIVES), "JJ"),
        _ => (pick(rng, ADVERBS), "RB"),
    }
}

fn write_noise(rng: &mut ChaCha8Rng, n: usize, line: &mut String) {
    for _ in 0..n {
        let (w, t) = noise_token(rng);
        if !line.is_empty() {
            line.push(' ');
        }
        line.push_str(w);
        line.push('_');
        line.push_str(t);
    }
}

fn fixed_word_tag(word: &str) -> &'static str {
    match word {
        "if" | "between" | "from" | "at" => "IN",
        "not" | "perhaps" => "RB",
        "and" | "but" | "or" => "CC",
        "to" => "TO",
        "least" => "JJS",
        _ => "XX",
    }
}

/// Writes one sentence per line. Returns the manifest in file order.
pub fn synth_corpus<W: Write>(spec: &SynthSpec, mut out: W) -> io::Result<Vec<ManifestEntry>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    // usize::MAX marks a noise sentence; otherwise the plant index.
    let mut order: Vec<usize> = Vec::with_capacity(spec.noise_sentences);
    order.resize(spec.noise_sentences, usize::MAX);
    for (i, plant) in spec.plants.iter().enumerate() {
        order.extend(std::iter::repeat_n(i, plant.count));
    }
    order.shuffle(&mut rng);

    let mut manifest = Vec::new();
    let mut offset = 0u64;
    let mut line = String::new();
    for slot in order {
        line.clear();
        if slot == usize::MAX {
            let n = rng.random_range(3..14);
            write_noise(&mut rng, n, &mut line);
        } else {
            let plant = &spec.plants[slot];
            let prefix = rng.random_range(0..4);
            write_noise(&mut rng, prefix, &mut line);
            let (adj1, adj2) = if plant.pattern.is_strong_first() {
                (&plant.strong, &plant.weak)
            } else {
                (&plant.weak, &plant.strong)
            };
            let comma = spec.punctuation && rng.random_bool(0.3);
            for (k, s) in plant.pattern.template().iter().enumerate() {
                let token = match s {
                    Slot::Adj1 => format!("{adj1}_JJ"),
                    Slot::Adj2 => format!("{adj2}_JJ"),
                    Slot::Word(w) => format!("{w}_{}", fixed_word_tag(w)),
                };
                if !line.is_empty() {
                    line.push(' ');
                }
                line.push_str(&token);
                if comma && k == 0 && *s == Slot::Adj1 {
                    line.push_str(" ,_,");
                }
            }
            let suffix = rng.random_range(0..4);
            write_noise(&mut rng, suffix, &mut line);
            manifest.push(ManifestEntry {
                pattern: plant.pattern,
                weak: plant.weak.clone(),
                strong: plant.strong.clone(),
                offset,
                token_index: prefix,
            });
        }
        line.push_str(" ._.\n");
        out.write_all(line.as_bytes())?;
        offset += line.len() as u64;
    }
    out.flush()?;
    Ok(manifest)
}

/// Streams roughly `target_bytes` of noise with a planted match every
/// `plant_every` sentences, without holding the corpus in memory. Returns
/// the number of planted matches.
pub fn synth_large<W: Write>(
    target_bytes: u64,
    plant_every: usize,
    seed: u64,
    mut out: W,
) -> io::Result<u64> {
    const PAIRS: &[(&str, &str)] = &[
        ("warm", "hot"),
        ("good", "excellent"),
        ("cool", "cold"),
        ("possible", "likely"),
        ("difficult", "impossible"),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut written = 0u64;
    let mut planted = 0u64;
    let mut line = String::new();
    let mut n = 0usize;
    while written < target_bytes {
        line.clear();
        n += 1;
        let n_noise = rng.random_range(3..14);
        write_noise(&mut rng, n_noise, &mut line);
        if plant_every > 0 && n.is_multiple_of(plant_every) {
            let (weak, strong) = PAIRS[rng.random_range(0..PAIRS.len())];
            let pattern = PatternId::ALL[rng.random_range(0..6)];
            let (a1, a2) = if pattern.is_strong_first() {
                (strong, weak)
            } else {
                (weak, strong)
            };
            for s in pattern.template() {
                line.push(' ');
                match s {
                    Slot::Adj1 => line.push_str(&format!("{a1}_JJ")),
                    Slot::Adj2 => line.push_str(&format!("{a2}_JJ")),
                    Slot::Word(w) => line.push_str(&format!("{w}_{}", fixed_word_tag(w))),
                }
            }
            planted += 1;
        }
        line.push_str(" ._.\n");
        out.write_all(line.as_bytes())?;
        written += line.len() as u64;
    }
    out.flush()?;
    Ok(planted)
}
