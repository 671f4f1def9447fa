//! Pipeline configuration, read from a TOML file.
//!
//! Relative paths are resolved against the directory holding the config
//! file. Command-line flags override file values.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{AdjectiveTags, CorpusFormat};
use crate::error::{Error, Result};
use crate::evaluation::{NormsColumns, SubjectivityOptions};
use crate::pairs::ResolveOptions;
use crate::pattern::MatchOptions;
use crate::similarity::{MeasureKind, UnknownPolicy};

pub const CONFIG_ENV: &str = "SCALEMATE_CONFIG";

fn default_true() -> bool {
    true
}

fn default_jobs() -> usize {
    1
}

fn default_tags() -> String {
    AdjectiveTags::default().to_string()
}

fn default_word_column() -> String {
    NormsColumns::default().word_column
}

fn default_value_column() -> String {
    NormsColumns::default().value_column
}

fn default_polarity_unknown() -> UnknownPolicy {
    UnknownPolicy::Keep
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusConfig {
    pub paths: Vec<PathBuf>,
    #[serde(default)]
    pub format: CorpusFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureConfig {
    /// Row label in the report, e.g. `roget` or `lsa`.
    pub name: String,
    pub kind: MeasureKind,
    pub resource: PathBuf,
    #[serde(default)]
    pub tau: f64,
    #[serde(default)]
    pub unknown: UnknownPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    pub antonyms: Option<PathBuf>,
    pub polarity_pos: Option<PathBuf>,
    pub polarity_neg: Option<PathBuf>,
    #[serde(default = "default_polarity_unknown")]
    pub polarity_unknown: UnknownPolicy,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            antonyms: None,
            polarity_pos: None,
            polarity_neg: None,
            polarity_unknown: UnknownPolicy::Keep,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationConfig {
    pub subjectivity: Option<PathBuf>,
    pub norms: Option<PathBuf>,
    #[serde(default = "default_word_column")]
    pub word_column: String,
    #[serde(default = "default_value_column")]
    pub value_column: String,
    #[serde(default)]
    pub min_arousal_gap: f64,
    #[serde(default = "default_true")]
    pub adjectives_only: bool,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        EvaluationConfig {
            subjectivity: None,
            norms: None,
            word_column: default_word_column(),
            value_column: default_value_column(),
            min_arousal_gap: 0.0,
            adjectives_only: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpus: CorpusConfig,
    #[serde(default = "default_tags")]
    pub adjective_tags: String,
    #[serde(default = "default_true")]
    pub strip_punct: bool,
    #[serde(default)]
    pub min_direction_ratio: Option<f64>,
    #[serde(default)]
    pub measures: Vec<MeasureConfig>,
    #[serde(default)]
    pub filters: FilterConfig,
    #[serde(default)]
    pub evaluation: EvaluationConfig,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
    pub output_dir: Option<PathBuf>,
    /// Directory relative paths were resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file and resolves its relative paths.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config = PipelineConfig::parse(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Ok(config.resolved_against(base))
    }

    pub fn resolved_against(mut self, base: &Path) -> Self {
        self.base_dir = Some(base.to_path_buf());
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        self.corpus.paths.iter_mut().for_each(fix);
        for m in &mut self.measures {
            fix(&mut m.resource);
        }
        let f = &mut self.filters;
        for p in [&mut f.antonyms, &mut f.polarity_pos, &mut f.polarity_neg] {
            p.as_mut().map(fix);
        }
        let e = &mut self.evaluation;
        for p in [&mut e.subjectivity, &mut e.norms] {
            p.as_mut().map(fix);
        }
        if let Some(out) = self.output_dir.as_mut() {
            fix(out);
        }
        self
    }

    /// `path` relative to the config directory when it lies inside it.
    pub fn display_path(&self, path: &Path) -> PathBuf {
        self.base_dir
            .as_deref()
            .and_then(|base| path.strip_prefix(base).ok())
            .filter(|rel| !rel.as_os_str().is_empty())
            .unwrap_or(path)
            .to_path_buf()
    }

    /// This config with every path shown relative to the config directory.
    pub fn portable(&self) -> Self {
        let mut c = self.clone();
        let show = |p: &mut PathBuf| *p = self.display_path(p);
        c.corpus.paths.iter_mut().for_each(show);
        for m in &mut c.measures {
            show(&mut m.resource);
        }
        let f = &mut c.filters;
        for p in [&mut f.antonyms, &mut f.polarity_pos, &mut f.polarity_neg] {
            p.as_mut().map(show);
        }
        let e = &mut c.evaluation;
        for p in [&mut e.subjectivity, &mut e.norms] {
            p.as_mut().map(show);
        }
        c
    }

    pub fn match_options(&self) -> Result<MatchOptions> {
        Ok(MatchOptions {
            adjective_tags: self.adjective_tags.parse()?,
            strip_punct: self.strip_punct,
        })
    }

    pub fn resolve_options(&self) -> ResolveOptions {
        ResolveOptions {
            min_direction_ratio: self.min_direction_ratio,
        }
    }

    pub fn norms_columns(&self) -> NormsColumns {
        NormsColumns {
            word_column: self.evaluation.word_column.clone(),
            value_column: self.evaluation.value_column.clone(),
        }
    }

    pub fn subjectivity_options(&self) -> SubjectivityOptions {
        SubjectivityOptions {
            adjectives_only: self.evaluation.adjectives_only,
        }
    }

    /// Checks value ranges and that every referenced file exists.
    pub fn validate(&self) -> Result<()> {
        if self.corpus.paths.is_empty() {
            return Err(Error::Config("no corpus paths given".into()));
        }
        self.match_options()?;
        if self.jobs == 0 {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        if let Some(r) = self.min_direction_ratio {
            if !(0.5..=1.0).contains(&r) {
                return Err(Error::Config(format!(
                    "min_direction_ratio {r} outside [0.5, 1]"
                )));
            }
        }
        if self.evaluation.min_arousal_gap < 0.0 || !self.evaluation.min_arousal_gap.is_finite() {
            return Err(Error::Config("min_arousal_gap must be >= 0".into()));
        }
        let mut names = std::collections::HashSet::new();
        for m in &self.measures {
            if !(-1.0..=1.0).contains(&m.tau) {
                return Err(Error::Config(format!(
                    "measure {}: tau {} outside [-1, 1]",
                    m.name, m.tau
                )));
            }
            if m.name.is_empty()
                || m.name == "raw"
                || !m
                    .name
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
            {
                return Err(Error::Config(format!(
                    "measure name {:?} must be a non-empty [A-Za-z0-9_-] label other than \"raw\"",
                    m.name
                )));
            }
            if !names.insert(&m.name) {
                return Err(Error::Config(format!(
                    "duplicate measure name {:?}",
                    m.name
                )));
            }
        }
        let f = &self.filters;
        if f.polarity_pos.is_some() != f.polarity_neg.is_some() {
            return Err(Error::Config(
                "polarity_pos and polarity_neg must be given together".into(),
            ));
        }
        let mut files: Vec<&PathBuf> = self.corpus.paths.iter().collect();
        files.extend(self.measures.iter().map(|m| &m.resource));
        files.extend(
            [
                &f.antonyms,
                &f.polarity_pos,
                &f.polarity_neg,
                &self.evaluation.subjectivity,
                &self.evaluation.norms,
            ]
            .into_iter()
            .flatten(),
        );
        for file in files {
            if !file.is_file() {
                return Err(Error::Config(format!("missing file {}", file.display())));
            }
        }
        Ok(())
    }
}
