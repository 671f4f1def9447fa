//! End-to-end run: extract, aggregate, filter, evaluate, report.
//!
//! Every output is first written to a staging directory inside the output
//! directory and only moved into place once all stages have succeeded.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::config::PipelineConfig;
use crate::corpus::ReadStats;
use crate::error::Error;
use crate::evaluation::{
    dataset_agreement, eval_arousal, eval_combined, eval_subjectivity, Agreement, ArousalNorms,
    EvaluationReport, SubjectivityLexicon,
};
use crate::extract::{extract_files, file_label};
use crate::filters::{
    antonym_filter, combined_filter, polarity_filter, AntonymLexicon, PolarityLexicon,
};
use crate::matchfile::MatchWriter;
use crate::pairs::{
    pattern_type_histogram, write_pairs, PairCounts, PairRecord, PatternTypeHistogram,
};
use crate::pattern::PatternId;
use crate::similarity::{filter_by_similarity, Measure};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Validate,
    Load,
    Extract,
    Aggregate,
    Filter,
    Evaluate,
    Write,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Validate => "validate",
            Stage::Load => "load",
            Stage::Extract => "extract",
            Stage::Aggregate => "aggregate",
            Stage::Filter => "filter",
            Stage::Evaluate => "evaluate",
            Stage::Write => "write",
        })
    }
}

#[derive(Debug, Error)]
#[error("{stage} stage failed: {source}")]
pub struct PipelineError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

trait StageExt<T> {
    fn stage(self, stage: Stage) -> Result<T, PipelineError>;
}

impl<T> StageExt<T> for crate::Result<T> {
    fn stage(self, stage: Stage) -> Result<T, PipelineError> {
        self.map_err(|source| PipelineError { stage, source })
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CorpusSummary {
    pub files: usize,
    #[serde(flatten)]
    pub stats: ReadStats,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct MatchSummary {
    pub total: u64,
    pub by_pattern: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct HistogramSummary {
    /// Pairs by number of distinct patterns they occur in, keys "1".."6".
    pub pairs_by_pattern_types: BTreeMap<String, u64>,
    pub total_pairs: u64,
    pub total_pairs_without_ties: u64,
    pub ties: u64,
    pub below_ratio: u64,
}

impl From<&PatternTypeHistogram> for HistogramSummary {
    fn from(h: &PatternTypeHistogram) -> Self {
        HistogramSummary {
            pairs_by_pattern_types: (1..=6).map(|n| (n.to_string(), h.get(n))).collect(),
            total_pairs: h.total,
            total_pairs_without_ties: h.total_ordered(),
            ties: h.ties,
            below_ratio: h.below_ratio,
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ReportRow {
    pub method: String,
    pub filter: String,
    pub pairs: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subjectivity: Option<EvaluationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arousal: Option<EvaluationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub combined: Option<EvaluationReport>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Report {
    pub schema_version: u32,
    /// The configuration with paths relative to the config file, minus
    /// settings that cannot change results (`jobs`, `output_dir`).
    pub config: serde_json::Value,
    pub corpus: CorpusSummary,
    pub matches: MatchSummary,
    pub histogram: HistogramSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agreement: Option<Agreement>,
    pub rows: Vec<ReportRow>,
}

struct Resources {
    measures: Vec<(String, Measure, crate::similarity::UnknownPolicy)>,
    antonyms: AntonymLexicon,
    polarity: Option<PolarityLexicon>,
    subjectivity: Option<SubjectivityLexicon>,
    norms: Option<ArousalNorms>,
}

fn load_resources(config: &PipelineConfig) -> crate::Result<Resources> {
    let measures = config
        .measures
        .iter()
        .map(|m| {
            Ok((
                m.name.clone(),
                Measure::load(m.kind, &m.resource, m.tau)?,
                m.unknown,
            ))
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let f = &config.filters;
    let antonyms = match &f.antonyms {
        Some(p) => AntonymLexicon::load(p)?,
        None => AntonymLexicon::new(),
    };
    let polarity = match (&f.polarity_pos, &f.polarity_neg) {
        (Some(pos), Some(neg)) => Some(PolarityLexicon::load(pos, neg)?),
        _ => None,
    };
    let e = &config.evaluation;
    let subjectivity = e
        .subjectivity
        .as_ref()
        .map(|p| SubjectivityLexicon::load(p, &config.subjectivity_options()))
        .transpose()?;
    let norms = e
        .norms
        .as_ref()
        .map(|p| ArousalNorms::load(p, &config.norms_columns()))
        .transpose()?;
    Ok(Resources {
        measures,
        antonyms,
        polarity,
        subjectivity,
        norms,
    })
}

/// Files staged for promotion, relative to the output directory.
struct Staging {
    dir: tempfile::TempDir,
    files: Vec<PathBuf>,
}

impl Staging {
    fn new(out: &Path) -> crate::Result<Self> {
        fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
        let dir = tempfile::Builder::new()
            .prefix(".staging-")
            .tempdir_in(out)
            .map_err(|e| Error::io(out, e))?;
        Ok(Staging {
            dir,
            files: Vec::new(),
        })
    }

    fn create(&mut self, rel: &str) -> crate::Result<BufWriter<File>> {
        let path = self.dir.path().join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        self.files.push(PathBuf::from(rel));
        Ok(BufWriter::new(file))
    }

    fn write_pairs(&mut self, rel: &str, records: &[PairRecord]) -> crate::Result<()> {
        let w = self.create(rel)?;
        write_pairs(records, w).map_err(|e| Error::io(rel, e))
    }

    fn promote(self, out: &Path) -> crate::Result<()> {
        for rel in &self.files {
            let target = out.join(rel);
            if let Some(parent) = target.parent() {
                fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            fs::rename(self.dir.path().join(rel), &target).map_err(|e| Error::io(&target, e))?;
        }
        Ok(())
    }
}

fn evaluate_row(
    method: &str,
    filter: &str,
    records: &[PairRecord],
    res: &Resources,
    agreement: Option<&Agreement>,
    min_gap: f64,
) -> ReportRow {
    ReportRow {
        method: method.to_string(),
        filter: filter.to_string(),
        pairs: records.len(),
        subjectivity: res
            .subjectivity
            .as_ref()
            .map(|l| eval_subjectivity(records, l)),
        arousal: res
            .norms
            .as_ref()
            .map(|n| eval_arousal(records, n, min_gap)),
        combined: agreement.map(|a| eval_combined(records, &a.agreed)),
    }
}

/// Runs every stage and writes `matches.tsv`, `pairs.tsv`,
/// `filtered/<method>-<filter>.tsv` and `report.json` into `output_dir`.
pub fn run_pipeline(config: &PipelineConfig, output_dir: &Path) -> Result<Report, PipelineError> {
    config.validate().stage(Stage::Validate)?;
    let match_opts = config.match_options().stage(Stage::Validate)?;
    let resources = load_resources(config).stage(Stage::Load)?;
    let mut staging = Staging::new(output_dir).stage(Stage::Write)?;

    let labels: Vec<String> = config
        .corpus
        .paths
        .iter()
        .map(|p| file_label(&config.display_path(p)))
        .collect();
    let mut counts = PairCounts::new();
    let mut by_pattern = [0u64; 6];
    let mut writer = MatchWriter::new(staging.create("matches.tsv").stage(Stage::Write)?)
        .map_err(|e| Error::io("matches.tsv", e))
        .stage(Stage::Write)?;
    let mut write_error = None;
    let stats = extract_files(
        &config.corpus.paths,
        config.corpus.format,
        &match_opts,
        config.jobs,
        |file, m| {
            counts.add_match(m);
            by_pattern[m.pattern.index()] += 1;
            if write_error.is_none() {
                if let Err(e) = writer.write(m, &labels[file]) {
                    write_error = Some(e);
                }
            }
        },
    )
    .stage(Stage::Extract)?;
    if let Some(e) = write_error {
        return Err(Error::io("matches.tsv", e)).stage(Stage::Write);
    }
    let total_matches = writer.written();
    writer
        .finish()
        .map_err(|e| Error::io("matches.tsv", e))
        .stage(Stage::Write)?;

    let raw = counts.resolve(&config.resolve_options());
    let histogram = pattern_type_histogram(&raw);
    staging
        .write_pairs("pairs.tsv", &raw)
        .stage(Stage::Aggregate)?;

    let agreement = match (&resources.subjectivity, &resources.norms) {
        (Some(lex), Some(norms)) => Some(dataset_agreement(
            &raw,
            lex,
            norms,
            config.evaluation.min_arousal_gap,
        )),
        _ => None,
    };

    let mut methods: Vec<(String, Vec<PairRecord>)> = vec![("raw".to_string(), raw.clone())];
    for (name, measure, unknown) in &resources.measures {
        methods.push((name.clone(), filter_by_similarity(&raw, measure, *unknown)));
    }

    let min_gap = config.evaluation.min_arousal_gap;
    let polarity_unknown = config.filters.polarity_unknown;
    let mut rows = Vec::new();
    for (method, records) in &methods {
        let mut variants: Vec<(&str, Vec<PairRecord>)> = vec![
            ("none", records.clone()),
            ("antonyms", antonym_filter(records, &resources.antonyms)),
        ];
        if let Some(pol) = &resources.polarity {
            variants.push(("polarity", polarity_filter(records, pol, polarity_unknown)));
            variants.push((
                "combined",
                combined_filter(records, &resources.antonyms, pol, polarity_unknown),
            ));
        }
        for (filter, kept) in variants {
            if !(method == "raw" && filter == "none") {
                staging
                    .write_pairs(&format!("filtered/{method}-{filter}.tsv"), &kept)
                    .stage(Stage::Filter)?;
            }
            rows.push(evaluate_row(
                method,
                filter,
                &kept,
                &resources,
                agreement.as_ref(),
                min_gap,
            ));
        }
    }

    let mut echo = serde_json::to_value(config.portable())
        .map_err(|e| Error::Config(e.to_string()))
        .stage(Stage::Evaluate)?;
    if let Some(obj) = echo.as_object_mut() {
        obj.remove("jobs");
        obj.remove("output_dir");
    }
    let report = Report {
        schema_version: SCHEMA_VERSION,
        config: echo,
        corpus: CorpusSummary {
            files: config.corpus.paths.len(),
            stats,
        },
        matches: MatchSummary {
            total: total_matches,
            by_pattern: PatternId::ALL
                .iter()
                .map(|p| (p.as_str().to_string(), by_pattern[p.index()]))
                .collect(),
        },
        histogram: HistogramSummary::from(&histogram),
        agreement,
        rows,
    };

    let mut w = staging.create("report.json").stage(Stage::Write)?;
    serde_json::to_writer_pretty(&mut w, &report)
        .map_err(|e| Error::io("report.json", e.into()))
        .and_then(|_| {
            writeln!(w)
                .and_then(|_| w.flush())
                .map_err(|e| Error::io("report.json", e))
        })
        .stage(Stage::Write)?;
    drop(w);
    staging.promote(output_dir).stage(Stage::Write)?;
    Ok(report)
}

/// Renders the rows as a plain-text table, one line per method/filter.
pub fn format_table(report: &Report) -> String {
    let cell = |r: &Option<EvaluationReport>| match r {
        Some(EvaluationReport {
            test_count,
            accuracy: Some(a),
            ..
        }) => format!("{test_count:>7} {a:>7.2}"),
        Some(r) => format!("{:>7} {:>7}", r.test_count, "-"),
        None => format!("{:>7} {:>7}", "-", "-"),
    };
    let mut out = format!(
        "{:<12} {:<10} {:>8} {:>15} {:>15} {:>15}\n",
        "method", "filter", "pairs", "subj test/acc", "arousal", "combined"
    );
    for row in &report.rows {
        out.push_str(&format!(
            "{:<12} {:<10} {:>8} {:>15} {:>15} {:>15}\n",
            row.method,
            row.filter,
            row.pairs,
            cell(&row.subjectivity),
            cell(&row.arousal),
            cell(&row.combined)
        ));
    }
    out
}
