//! The six scalemate templates and the sentence matcher.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{is_adjective, AdjectiveTags, Sentence, TaggedToken};
use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PatternId {
    IfNot,
    AndPerhaps,
    ButNot,
    BetweenAnd,
    FromTo,
    OrAtLeast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Adj1,
    Adj2,
    Word(&'static str),
}

use Slot::{Adj1, Adj2, Word};

impl PatternId {
    /// Match priority order when several templates start at the same token.
    pub const ALL: [PatternId; 6] = [
        PatternId::IfNot,
        PatternId::AndPerhaps,
        PatternId::ButNot,
        PatternId::BetweenAnd,
        PatternId::FromTo,
        PatternId::OrAtLeast,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PatternId::IfNot => "IF_NOT",
            PatternId::AndPerhaps => "AND_PERHAPS",
            PatternId::ButNot => "BUT_NOT",
            PatternId::BetweenAnd => "BETWEEN_AND",
            PatternId::FromTo => "FROM_TO",
            PatternId::OrAtLeast => "OR_AT_LEAST",
        }
    }

    pub fn template(self) -> &'static [Slot] {
        match self {
            PatternId::IfNot => &[Adj1, Word("if"), Word("not"), Adj2],
            PatternId::AndPerhaps => &[Adj1, Word("and"), Word("perhaps"), Adj2],
            PatternId::ButNot => &[Adj1, Word("but"), Word("not"), Adj2],
            PatternId::BetweenAnd => &[Word("between"), Adj1, Word("and"), Adj2],
            PatternId::FromTo => &[Word("from"), Adj1, Word("to"), Adj2],
            PatternId::OrAtLeast => &[Adj1, Word("or"), Word("at"), Word("least"), Adj2],
        }
    }

    /// True for the one template whose first adjective is the stronger one.
    pub fn is_strong_first(self) -> bool {
        self == PatternId::OrAtLeast
    }
}

impl fmt::Display for PatternId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PatternId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        PatternId::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown pattern id {s:?}")))
    }
}

/// One template occurrence, adjectives already in scale order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PatternMatch {
    pub pattern: PatternId,
    pub weak: String,
    pub strong: String,
    pub sentence_offset: u64,
    /// Index of the first template token in the unstripped sentence.
    pub token_index: usize,
}

#[derive(Debug, Clone)]
pub struct MatchOptions {
    pub adjective_tags: AdjectiveTags,
    /// Drop punctuation-tagged tokens before matching.
    pub strip_punct: bool,
}

impl Default for MatchOptions {
    fn default() -> Self {
        MatchOptions {
            adjective_tags: AdjectiveTags::default(),
            strip_punct: true,
        }
    }
}

const BRACKET_TAGS: [&str; 9] = [
    "-LRB-", "-RRB-", "-LCB-", "-RCB-", "-LSB-", "-RSB-", "HYPH", "NFP", "PUNCT",
];

/// Punctuation tags: Penn bracket/hyphen tags, UD `PUNCT`, and any tag with no
/// alphanumeric character except the symbol tags `$` and `#`.
pub fn is_punct_tag(tag: &str) -> bool {
    if BRACKET_TAGS.contains(&tag) {
        return true;
    }
    tag != "$" && tag != "#" && !tag.chars().any(char::is_alphanumeric)
}

fn slot_fill<'a>(
    template: &[Slot],
    tokens: &'a [TaggedToken],
    view: &[usize],
    tags: &AdjectiveTags,
) -> Option<(&'a str, &'a str)> {
    if view.len() < template.len() {
        return None;
    }
    let mut adj1 = None;
    let mut adj2 = None;
    for (slot, &i) in template.iter().zip(view) {
        let token = &tokens[i];
        match slot {
            Word(w) => {
                if token.surface != *w {
                    return None;
                }
            }
            Adj1 | Adj2 => {
                if !is_adjective(token, tags) {
                    return None;
                }
                if *slot == Adj1 {
                    adj1 = Some(token.surface.as_str());
                } else {
                    adj2 = Some(token.surface.as_str());
                }
            }
        }
    }
    Some((adj1?, adj2?))
}

/// Finds every non-overlapping template occurrence, scanning left to right.
///
/// At each position the templates are tried in [`PatternId::ALL`] order; a
/// hit resumes the scan after its last token. Hits whose two adjectives are
/// the same word consume their tokens but are not emitted.
pub fn match_sentence(sentence: &Sentence, opts: &MatchOptions) -> Vec<PatternMatch> {
    let mut out = Vec::new();
    for_each_match(sentence, opts, |m| out.push(m));
    out
}

pub fn for_each_match(
    sentence: &Sentence,
    opts: &MatchOptions,
    mut emit: impl FnMut(PatternMatch),
) {
    let tokens = &sentence.tokens;
    let view: Vec<usize> = if opts.strip_punct {
        (0..tokens.len())
            .filter(|&i| !is_punct_tag(&tokens[i].tag))
            .collect()
    } else {
        (0..tokens.len()).collect()
    };

    let mut pos = 0;
    'scan: while pos < view.len() {
        for pattern in PatternId::ALL {
            let template = pattern.template();
            let Some((adj1, adj2)) =
                slot_fill(template, tokens, &view[pos..], &opts.adjective_tags)
            else {
                continue;
            };
            if adj1 != adj2 {
                let (weak, strong) = if pattern.is_strong_first() {
                    (adj2, adj1)
                } else {
                    (adj1, adj2)
                };
                emit(PatternMatch {
                    pattern,
                    weak: weak.to_string(),
                    strong: strong.to_string(),
                    sentence_offset: sentence.source_offset,
                    token_index: view[pos],
                });
            }
            pos += template.len();
            continue 'scan;
        }
        pos += 1;
    }
}

/// Runs the matcher over a sentence stream, stopping at the first I/O error.
pub fn extract<I>(sentences: I, opts: &MatchOptions) -> crate::Result<Vec<PatternMatch>>
where
    I: IntoIterator<Item = crate::Result<Sentence>>,
{
    let mut out = Vec::new();
    for sentence in sentences {
        for_each_match(&sentence?, opts, |m| out.push(m));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sentence(text: &str) -> Sentence {
        Sentence::parse_underscore_line(text, 0).unwrap()
    }

    fn pairs(text: &str) -> Vec<(PatternId, String, String)> {
        match_sentence(&sentence(text), &MatchOptions::default())
            .into_iter()
            .map(|m| (m.pattern, m.weak, m.strong))
            .collect()
    }

    fn p(id: PatternId, w: &str, s: &str) -> (PatternId, String, String) {
        (id, w.to_string(), s.to_string())
    }

    #[test]
    fn if_not_keeps_surface_order() {
        assert_eq!(
            pairs("warm_JJ if_IN not_RB hot_JJ"),
            vec![p(PatternId::IfNot, "warm", "hot")]
        );
    }

    #[test]
    fn or_at_least_reverses() {
        assert_eq!(
            pairs("good_JJ or_CC at_IN least_JJS decent_JJ"),
            vec![p(PatternId::OrAtLeast, "decent", "good")]
        );
    }

    #[test]
    fn slot_must_be_adjective() {
        assert!(pairs("warm_NN if_IN not_RB hot_JJ").is_empty());
        assert!(pairs("").is_empty());
    }

    #[test]
    fn comma_variant_needs_strip_punct() {
        let s = sentence("warm_JJ ,_, if_IN not_RB hot_JJ ._.");
        let on = match_sentence(&s, &MatchOptions::default());
        assert_eq!(on.len(), 1);
        assert_eq!(on[0].token_index, 0);
        let off = MatchOptions {
            strip_punct: false,
            ..MatchOptions::default()
        };
        assert!(match_sentence(&s, &off).is_empty());
    }

    #[test]
    fn token_index_counts_stripped_tokens() {
        let s = sentence("``_`` ,_, from_IN cold_JJ to_TO hot_JJ");
        let m = match_sentence(&s, &MatchOptions::default());
        assert_eq!(m[0].token_index, 2);
    }

    #[test]
    fn self_pairs_consume_but_are_dropped() {
        // The self-pair occupies tokens 0..4, so the `hot if not warm` inside
        // it is never tried.
        assert!(pairs("hot_JJ if_IN not_RB hot_JJ").is_empty());
        assert_eq!(
            pairs("hot_JJ if_IN not_RB hot_JJ if_IN not_RB scorching_JJ"),
            vec![]
        );
    }

    #[test]
    fn matches_resume_after_previous_hit() {
        assert_eq!(
            pairs("warm_JJ if_IN not_RB hot_JJ but_CC not_RB scorching_JJ"),
            vec![p(PatternId::IfNot, "warm", "hot")]
        );
        assert_eq!(
            pairs("from_IN good_JJ to_TO great_JJ and_CC between_IN bad_JJ and_CC awful_JJ"),
            vec![
                p(PatternId::FromTo, "good", "great"),
                p(PatternId::BetweenAnd, "bad", "awful")
            ]
        );
    }

    #[test]
    fn fixed_words_ignore_tags_and_case() {
        assert_eq!(
            pairs("Possible_JJ AND_NN Perhaps_JJ Likely_JJ"),
            vec![p(PatternId::AndPerhaps, "possible", "likely")]
        );
    }

    #[test]
    fn punct_tags() {
        for t in [",", ".", ":", "``", "''", "-LRB-", "HYPH", "PUNCT"] {
            assert!(is_punct_tag(t), "{t}");
        }
        for t in ["$", "#", "JJ", "NN", "PRP$"] {
            assert!(!is_punct_tag(t), "{t}");
        }
    }

    #[test]
    fn pattern_ids_round_trip() {
        for id in PatternId::ALL {
            assert_eq!(id.as_str().parse::<PatternId>().unwrap(), id);
            assert_eq!(PatternId::ALL[id.index()], id);
        }
        assert!("IF".parse::<PatternId>().is_err());
    }
}
