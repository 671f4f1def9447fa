use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use scalemate::config::{PipelineConfig, CONFIG_ENV};
use scalemate::corpus::{AdjectiveTags, CorpusFormat};
use scalemate::evaluation::{
    dataset_agreement, eval_arousal, eval_combined, eval_subjectivity, Agreement, ArousalNorms,
    EvaluationReport, NormsColumns, SubjectivityLexicon, SubjectivityOptions,
};
use scalemate::extract::{extract_files, file_label};
use scalemate::filters::{
    antonym_filter, polarity_filter, AntonymLexicon, ApplyMode, PolarityLexicon,
};
use scalemate::matchfile::{count_matches_file, MatchWriter};
use scalemate::pairs::{
    pattern_type_histogram, read_pairs_file, write_pairs, PairCounts, ResolveOptions,
};
use scalemate::pattern::MatchOptions;
use scalemate::pipeline::{format_table, run_pipeline, SCHEMA_VERSION};
use scalemate::similarity::{filter_by_similarity, Measure, MeasureKind, UnknownPolicy};
use scalemate::synth::{synth_corpus, write_manifest, Plant, SynthSpec};

#[derive(Parser)]
#[command(
    name = "scalemate",
    version,
    about = "Mine and evaluate ordered scalar adjective pairs"
)]
struct Cli {
    /// Pipeline config file; supplies defaults that flags override.
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Underscore,
    Tsv,
}

impl From<FormatArg> for CorpusFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Underscore => CorpusFormat::Underscore,
            FormatArg::Tsv => CorpusFormat::Tsv,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Keep,
    Drop,
}

impl From<PolicyArg> for UnknownPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Keep => UnknownPolicy::Keep,
            PolicyArg::Drop => UnknownPolicy::Drop,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureArg {
    Vector,
    Attribute,
    Thesaurus,
}

impl From<MeasureArg> for MeasureKind {
    fn from(m: MeasureArg) -> Self {
        match m {
            MeasureArg::Vector => MeasureKind::Vector,
            MeasureArg::Attribute => MeasureKind::Attribute,
            MeasureArg::Thesaurus => MeasureKind::Thesaurus,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ApplyArg {
    Antonym,
    Polarity,
    Both,
}

impl From<ApplyArg> for ApplyMode {
    fn from(a: ApplyArg) -> Self {
        match a {
            ApplyArg::Antonym => ApplyMode::Antonym,
            ApplyArg::Polarity => ApplyMode::Polarity,
            ApplyArg::Both => ApplyMode::Both,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Subj,
    Arousal,
    Agreement,
    Combined,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Match the six patterns over tagged corpora and write matches.tsv.
    Extract {
        #[arg(long, num_args = 1.., required = true)]
        corpus: Vec<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated adjective tags (default JJ,JJR,JJS).
        #[arg(long)]
        adjective_tags: Option<String>,
        /// Keep punctuation tokens when matching templates.
        #[arg(long)]
        no_strip_punct: bool,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Pool matches into one record per adjective pair.
    Aggregate {
        #[arg(long, num_args = 1.., required = true)]
        matches: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Order a pair only if its majority direction has at least this share.
        #[arg(long)]
        min_direction_ratio: Option<f64>,
    },
    /// Print the pattern-type histogram of a pairs file.
    Stats {
        #[arg(long)]
        pairs: PathBuf,
    },
    /// Filter a pairs file by similarity, antonymy and polarity.
    Filter {
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, requires = "resource")]
        measure: Option<MeasureArg>,
        #[arg(long, requires = "measure")]
        resource: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        tau: f64,
        #[arg(long, value_enum, default_value = "drop")]
        unknown: PolicyArg,
        #[arg(long)]
        antonyms: Option<PathBuf>,
        #[arg(long, requires = "polarity_neg")]
        polarity_pos: Option<PathBuf>,
        #[arg(long, requires = "polarity_pos")]
        polarity_neg: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "keep")]
        polarity_unknown: PolicyArg,
        /// Which lexical filters to run; defaults to those with resources given.
        #[arg(long, value_enum)]
        apply: Option<ApplyArg>,
    },
    /// Score pair orderings against a subjectivity lexicon and arousal norms.
    Evaluate {
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        subj: Option<PathBuf>,
        #[arg(long)]
        norms: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "all")]
        mode: ModeArg,
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        word_column: Option<String>,
        #[arg(long)]
        value_column: Option<String>,
        #[arg(long)]
        min_arousal_gap: Option<f64>,
        /// Keep subjectivity entries of every part of speech.
        #[arg(long)]
        all_pos: bool,
    },
    /// Run every stage from a config file and write a report bundle.
    Pipeline {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Write a synthetic corpus with planted pattern occurrences.
    Synth {
        /// PATTERN:weak:strong:count, e.g. IF_NOT:warm:hot:3
        #[arg(long)]
        plant: Vec<Plant>,
        #[arg(long, default_value_t = 100)]
        noise: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Put comma tokens inside some planted templates.
        #[arg(long)]
        punct: bool,
        #[arg(long)]
        out: PathBuf,
        /// Where to write the expected-match manifest.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
}

/// Writes through a temp file in the target directory, renamed on success.
fn write_atomic(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temp file in {}", dir.display()))?;
    let mut w = BufWriter::new(tmp.reopen()?);
    f(&mut w)?;
    w.flush()?;
    drop(w);
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn load_config(path: Option<&Path>) -> Result<Option<PipelineConfig>> {
    path.map(|p| PipelineConfig::load(p).with_context(|| format!("loading config {}", p.display())))
        .transpose()
}

#[derive(Serialize)]
struct EvaluateReport {
    schema_version: u32,
    config: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    subjectivity: Option<EvaluationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    arousal: Option<EvaluationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    agreement: Option<Agreement>,
    #[serde(skip_serializing_if = "Option::is_none")]
    combined: Option<EvaluationReport>,
}

fn run(cli: Cli) -> Result<()> {
    let config = match &cli.command {
        Command::Synth { .. } | Command::Stats { .. } | Command::Filter { .. } => None,
        _ => load_config(cli.config.as_deref())?,
    };
    match cli.command {
        Command::Extract {
            corpus,
            format,
            out,
            adjective_tags,
            no_strip_punct,
            jobs,
        } => {
            let format = format
                .map(CorpusFormat::from)
                .or(config.as_ref().map(|c| c.corpus.format))
                .unwrap_or_default();
            let tags: AdjectiveTags = adjective_tags
                .or(config.as_ref().map(|c| c.adjective_tags.clone()))
                .map(|t| t.parse())
                .transpose()?
                .unwrap_or_default();
            let strip_punct = !no_strip_punct && config.as_ref().is_none_or(|c| c.strip_punct);
            let jobs = jobs.or(config.as_ref().map(|c| c.jobs)).unwrap_or(1);
            let opts = MatchOptions {
                adjective_tags: tags,
                strip_punct,
            };
            let labels: Vec<String> = corpus.iter().map(|p| file_label(p)).collect();
            write_atomic(&out, |w| {
                let mut writer = MatchWriter::new(w)?;
                let mut err = None;
                let stats = extract_files(&corpus, format, &opts, jobs, |file, m| {
                    if err.is_none() {
                        err = writer.write(m, &labels[file]).err();
                    }
                })?;
                if let Some(e) = err {
                    return Err(e.into());
                }
                eprintln!(
                    "{} sentences, {} matches, {} malformed lines skipped",
                    stats.sentences,
                    writer.written(),
                    stats.malformed_lines
                );
                writer.finish()?;
                Ok(())
            })
        }
        Command::Aggregate {
            matches,
            out,
            min_direction_ratio,
        } => {
            let ratio = min_direction_ratio.or(config.as_ref().and_then(|c| c.min_direction_ratio));
            if let Some(r) = ratio {
                if !(0.5..=1.0).contains(&r) {
                    bail!("min-direction-ratio {r} outside [0.5, 1]");
                }
            }
            let mut counts = PairCounts::new();
            for path in &matches {
                counts.merge(count_matches_file(path)?);
            }
            let records = counts.resolve(&ResolveOptions {
                min_direction_ratio: ratio,
            });
            eprintln!("{} pairs", records.len());
            write_atomic(&out, |w| Ok(write_pairs(&records, w)?))
        }
        Command::Stats { pairs } => {
            let records = read_pairs_file(&pairs)?;
            print!("{}", pattern_type_histogram(&records));
            Ok(())
        }
        Command::Filter {
            pairs,
            out,
            measure,
            resource,
            tau,
            unknown,
            antonyms,
            polarity_pos,
            polarity_neg,
            polarity_unknown,
            apply,
        } => {
            let mut records = read_pairs_file(&pairs)?;
            let before = records.len();
            if let (Some(kind), Some(resource)) = (measure, resource) {
                let measure = Measure::load(kind.into(), &resource, tau)?;
                records = filter_by_similarity(&records, &measure, unknown.into());
            }
            let polarity = match (&polarity_pos, &polarity_neg) {
                (Some(p), Some(n)) => Some(PolarityLexicon::load(p, n)?),
                _ => None,
            };
            let mode =
                apply
                    .map(ApplyMode::from)
                    .or(match (antonyms.is_some(), polarity.is_some()) {
                        (true, true) => Some(ApplyMode::Both),
                        (true, false) => Some(ApplyMode::Antonym),
                        (false, true) => Some(ApplyMode::Polarity),
                        (false, false) => None,
                    });
            if let Some(mode) = mode {
                if mode != ApplyMode::Polarity {
                    let lexicon = match &antonyms {
                        Some(p) => AntonymLexicon::load(p)?,
                        None => AntonymLexicon::new(),
                    };
                    records = antonym_filter(&records, &lexicon);
                }
                if mode != ApplyMode::Antonym {
                    let Some(pol) = &polarity else {
                        bail!("--apply {mode} needs --polarity-pos and --polarity-neg");
                    };
                    records = polarity_filter(&records, pol, polarity_unknown.into());
                }
            }
            eprintln!("kept {} of {before} pairs", records.len());
            write_atomic(&out, |w| Ok(write_pairs(&records, w)?))
        }
        Command::Evaluate {
            pairs,
            subj,
            norms,
            mode,
            report,
            word_column,
            value_column,
            min_arousal_gap,
            all_pos,
        } => {
            let eval_cfg = config.as_ref().map(|c| &c.evaluation);
            let subj = subj.or(eval_cfg.and_then(|e| e.subjectivity.clone()));
            let norms_path = norms.or(eval_cfg.and_then(|e| e.norms.clone()));
            let defaults = NormsColumns::default();
            let columns = NormsColumns {
                word_column: word_column
                    .or(eval_cfg.map(|e| e.word_column.clone()))
                    .unwrap_or(defaults.word_column),
                value_column: value_column
                    .or(eval_cfg.map(|e| e.value_column.clone()))
                    .unwrap_or(defaults.value_column),
            };
            let gap = min_arousal_gap
                .or(eval_cfg.map(|e| e.min_arousal_gap))
                .unwrap_or(0.0);
            if gap < 0.0 {
                bail!("min-arousal-gap must be >= 0");
            }
            let subj_opts = SubjectivityOptions {
                adjectives_only: !all_pos && eval_cfg.is_none_or(|e| e.adjectives_only),
            };
            let needs_subj = mode != ModeArg::Arousal;
            let needs_norms = mode != ModeArg::Subj;
            let lexicon = match (&subj, needs_subj) {
                (Some(p), true) => Some(SubjectivityLexicon::load(p, &subj_opts)?),
                (None, true) if mode != ModeArg::All => bail!("--subj is required for this mode"),
                _ => None,
            };
            let norms = match (&norms_path, needs_norms) {
                (Some(p), true) => Some(ArousalNorms::load(p, &columns)?),
                (None, true) if mode != ModeArg::All => bail!("--norms is required for this mode"),
                _ => None,
            };
            let records = read_pairs_file(&pairs)?;
            let wants = |m: ModeArg| mode == m || mode == ModeArg::All;
            let subjectivity = lexicon
                .as_ref()
                .filter(|_| wants(ModeArg::Subj))
                .map(|l| eval_subjectivity(&records, l));
            let arousal = norms
                .as_ref()
                .filter(|_| wants(ModeArg::Arousal))
                .map(|n| eval_arousal(&records, n, gap));
            let agreement = match (&lexicon, &norms) {
                (Some(l), Some(n)) => Some(dataset_agreement(&records, l, n, gap)),
                _ => None,
            };
            let combined = agreement
                .as_ref()
                .filter(|_| wants(ModeArg::Combined))
                .map(|a| eval_combined(&records, &a.agreed));
            for r in [&subjectivity, &arousal, &combined].into_iter().flatten() {
                println!("{r}");
            }
            if let Some(a) = &agreement {
                match a.percentage {
                    Some(p) => println!("agreement: {}/{} ({p:.2}%)", a.agreeing, a.compared),
                    None => println!("agreement: no contrastive pairs in both datasets"),
                }
            }
            let out = EvaluateReport {
                schema_version: SCHEMA_VERSION,
                config: serde_json::json!({
                    "pairs": pairs,
                    "subj": subj,
                    "norms": norms_path,
                    "mode": mode.to_possible_value().map(|v| v.get_name().to_string()),
                    "word_column": columns.word_column,
                    "value_column": columns.value_column,
                    "min_arousal_gap": gap,
                    "adjectives_only": subj_opts.adjectives_only,
                }),
                subjectivity,
                arousal,
                agreement: agreement
                    .filter(|_| wants(ModeArg::Agreement) || wants(ModeArg::Combined)),
                combined,
            };
            write_atomic(&report, |w| {
                serde_json::to_writer_pretty(&mut *w, &out)?;
                writeln!(w)?;
                Ok(())
            })
        }
        Command::Pipeline { out, jobs } => {
            let Some(mut config) = config else {
                bail!("pipeline needs --config or {CONFIG_ENV}");
            };
            if let Some(jobs) = jobs {
                config.jobs = jobs;
            }
            let out_dir = out
                .or(config.output_dir.clone())
                .context("no output directory: pass --out or set output_dir")?;
            let report = run_pipeline(&config, &out_dir)?;
            print!("{}", format_table(&report));
            Ok(())
        }
        Command::Synth {
            plant,
            noise,
            seed,
            punct,
            out,
            manifest,
        } => {
            let spec = SynthSpec {
                plants: plant,
                noise_sentences: noise,
                seed,
                punctuation: punct,
            };
            let mut entries = Vec::new();
            write_atomic(&out, |w| {
                entries = synth_corpus(&spec, w)?;
                Ok(())
            })?;
            if let Some(path) = manifest {
                write_atomic(&path, |w| Ok(write_manifest(&entries, w)?))?;
            }
            eprintln!("planted {} matches", entries.len());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
