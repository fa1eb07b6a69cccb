//! Subcommands of the `lowbow` binary, callable without going through a
//! process so they can be tested directly.
//!
//! Every command writes its data to `out` and its warnings to `diag`.

use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, ensure, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use lowbow::classify::{
    evaluate, summarize_sweep, write_grid_csv, write_reports_jsonl, write_sweep_csv, EvalProtocol,
};
use lowbow::corpus::{
    build_vocabulary, load_raw_corpus, read_vocabulary, tokenize, write_vocabulary, LabeledCorpus,
    RawDocument, SplitMode, TokenizerConfig, Vocabulary,
};
use lowbow::geometry::Metric;
use lowbow::kernels::{KernelFamily, KernelShape, DEFAULT_BETA_FLOOR};
use lowbow::lowbow::{
    curve_distance, curve_features_with, lowbow_curve, read_curves, write_curves_csv,
    write_curves_jsonl, LabeledCurve, LowbowParams, DEFAULT_SAMPLES, DEFAULT_SIGMA,
    DEFAULT_SMOOTHING,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Table shape for `eval` CSV output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Layout {
    /// Mean and spread of the lowbow error for each scale and train size.
    #[default]
    Sweep,
    /// Mean error per class (rows) and method × train size (columns).
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Random,
    #[default]
    Stratified,
}

impl From<Split> for SplitMode {
    fn from(s: Split) -> Self {
        match s {
            Split::Random => SplitMode::Random,
            Split::Stratified => SplitMode::Stratified,
        }
    }
}

/// A scalar or a list in the config file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> From<OneOrMany<T>> for Vec<T> {
    fn from(v: OneOrMany<T>) -> Self {
        match v {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(xs) => xs,
        }
    }
}

/// Settings as given on the command line or in a TOML config file. Unset
/// fields fall through: flags, then config, then defaults.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Overrides {
    #[serde(default, deserialize_with = "one_or_many")]
    pub sigma: Option<Vec<f64>>,
    pub smoothing_c: Option<f64>,
    pub samples: Option<usize>,
    pub kernel: Option<KernelFamily>,
    pub beta_floor: Option<f64>,
    pub metric: Option<Metric>,
    pub k: Option<usize>,
    pub seed: Option<u64>,
    #[serde(default, deserialize_with = "one_or_many")]
    pub train_sizes: Option<Vec<usize>>,
    pub repetitions: Option<usize>,
    pub min_count: Option<usize>,
    pub split: Option<Split>,
}

fn one_or_many<'de, D, T>(d: D) -> std::result::Result<Option<Vec<T>>, D::Error>
where
    D: serde::Deserializer<'de>,
    T: Deserialize<'de>,
{
    Ok(Some(OneOrMany::<T>::deserialize(d)?.into()))
}

impl Overrides {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Fields set in `self` win over those in `fallback`.
    pub fn or(self, fallback: Overrides) -> Overrides {
        Overrides {
            sigma: self.sigma.or(fallback.sigma),
            smoothing_c: self.smoothing_c.or(fallback.smoothing_c),
            samples: self.samples.or(fallback.samples),
            kernel: self.kernel.or(fallback.kernel),
            beta_floor: self.beta_floor.or(fallback.beta_floor),
            metric: self.metric.or(fallback.metric),
            k: self.k.or(fallback.k),
            seed: self.seed.or(fallback.seed),
            train_sizes: self.train_sizes.or(fallback.train_sizes),
            repetitions: self.repetitions.or(fallback.repetitions),
            min_count: self.min_count.or(fallback.min_count),
            split: self.split.or(fallback.split),
        }
    }

    pub fn resolve(self) -> Result<RunConfig> {
        let config = RunConfig {
            sigmas: self.sigma.unwrap_or_else(|| vec![DEFAULT_SIGMA]),
            c: self.smoothing_c.unwrap_or(DEFAULT_SMOOTHING),
            samples: self.samples.unwrap_or(DEFAULT_SAMPLES),
            kernel: self.kernel.unwrap_or_default(),
            beta_floor: self.beta_floor.unwrap_or(DEFAULT_BETA_FLOOR),
            metric: self.metric.unwrap_or_default(),
            k: self.k.unwrap_or(lowbow::classify::DEFAULT_K),
            seed: self.seed.unwrap_or(0),
            train_sizes: self.train_sizes.unwrap_or_else(|| vec![100]),
            repetitions: self.repetitions.unwrap_or(10),
            min_count: self.min_count.unwrap_or(1),
            split: self.split.unwrap_or_default(),
        };
        config.validate()?;
        Ok(config)
    }
}

/// Fully resolved settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sigmas: Vec<f64>,
    pub c: f64,
    pub samples: usize,
    pub kernel: KernelFamily,
    pub beta_floor: f64,
    pub metric: Metric,
    pub k: usize,
    pub seed: u64,
    pub train_sizes: Vec<usize>,
    pub repetitions: usize,
    pub min_count: usize,
    pub split: Split,
}

impl Default for RunConfig {
    fn default() -> Self {
        Overrides::default().resolve().expect("defaults are valid")
    }
}

impl RunConfig {
    fn validate(&self) -> Result<()> {
        ensure!(!self.sigmas.is_empty(), "at least one --sigma is needed");
        for &s in &self.sigmas {
            ensure!(s > 0.0, "sigma must be positive, got {s}");
        }
        ensure!(
            self.c >= 0.0 && self.c.is_finite(),
            "smoothing c must be finite and nonnegative, got {}",
            self.c
        );
        ensure!(
            self.samples >= 2,
            "samples must be at least 2, got {}",
            self.samples
        );
        ensure!(self.k >= 1, "k must be at least 1");
        ensure!(self.repetitions >= 1, "repetitions must be at least 1");
        ensure!(self.min_count >= 1, "min count must be at least 1");
        Ok(())
    }

    pub fn params(&self, sigma: f64) -> Result<LowbowParams> {
        Ok(LowbowParams::new(
            KernelShape::new(self.kernel, sigma, self.beta_floor)?,
            self.c,
        )?)
    }

    fn single_sigma(&self) -> Result<f64> {
        match self.sigmas.as_slice() {
            [s] => Ok(*s),
            many => bail!("this command takes one sigma, got {}", many.len()),
        }
    }

    pub fn protocol(&self) -> EvalProtocol {
        EvalProtocol {
            train_sizes: self.train_sizes.clone(),
            repetitions: self.repetitions,
            seed: self.seed,
            k: self.k,
            metric: self.metric,
            sigmas: self.sigmas.clone(),
            c: self.c,
            samples: self.samples,
            kernel: self.kernel,
            beta_floor: self.beta_floor,
            split: self.split.into(),
            ..EvalProtocol::default()
        }
    }
}

fn load_raw(path: &Path) -> Result<Vec<RawDocument>> {
    load_raw_corpus(path).with_context(|| format!("reading corpus {}", path.display()))
}

fn load_vocab(path: &Path) -> Result<Vocabulary> {
    let file =
        fs::File::open(path).with_context(|| format!("opening vocabulary {}", path.display()))?;
    read_vocabulary(BufReader::new(file))
        .with_context(|| format!("reading vocabulary {}", path.display()))
}

fn corpus_vocabulary(raw: &[RawDocument], min_count: usize) -> Result<Vocabulary> {
    let tokenizer = TokenizerConfig::default();
    let docs: Vec<Vec<String>> = raw.iter().map(|d| tokenize(&d.text, &tokenizer)).collect();
    Ok(build_vocabulary(&docs, min_count)?)
}

fn encode_corpus(
    raw: &[RawDocument],
    vocab: Vocabulary,
    diag: &mut dyn Write,
) -> Result<LabeledCorpus> {
    let (corpus, skipped) =
        LabeledCorpus::from_raw(raw, &TokenizerConfig::default(), Arc::new(vocab));
    for pos in skipped {
        writeln!(
            diag,
            "warning: document {pos} (label {:?}) has no in-vocabulary words; skipped",
            raw[pos].label
        )?;
    }
    Ok(corpus)
}

/// Writes the vocabulary of a corpus as `index<TAB>token` lines.
pub fn cmd_vocab(corpus: &Path, min_count: usize, out: &mut dyn Write) -> Result<()> {
    let vocab = corpus_vocabulary(&load_raw(corpus)?, min_count)?;
    write_vocabulary(&vocab, out)?;
    Ok(())
}

/// Embeds every document of a corpus as a curve. Documents are identified by
/// their position in the corpus.
pub fn cmd_embed(
    corpus: &Path,
    vocab: &Path,
    config: &RunConfig,
    format: Format,
    out: &mut dyn Write,
    diag: &mut dyn Write,
) -> Result<()> {
    let raw = load_raw(corpus)?;
    let vocab = load_vocab(vocab)?;
    let params = config.params(config.single_sigma()?)?;
    let v = vocab.size();
    let tokenizer = TokenizerConfig::default();
    let embedded: Vec<Option<LabeledCurve>> = raw
        .par_iter()
        .enumerate()
        .map(|(pos, doc)| {
            let Ok(seq) = lowbow::corpus::encode(&tokenize(&doc.text, &tokenizer), &vocab) else {
                return Ok(None);
            };
            Ok(Some(LabeledCurve {
                id: Some(pos.to_string()),
                label: Some(doc.label.clone()),
                curve: lowbow_curve(&seq, config.samples, &params, v)?,
            }))
        })
        .collect::<lowbow::Result<_>>()?;
    let mut curves = Vec::with_capacity(embedded.len());
    for (pos, c) in embedded.into_iter().enumerate() {
        match c {
            Some(c) => curves.push(c),
            None => writeln!(
                diag,
                "warning: document {pos} (label {:?}) has no in-vocabulary words; skipped",
                raw[pos].label
            )?,
        }
    }
    match format {
        Format::Csv => write_curves_csv(&curves, out)?,
        Format::Json => write_curves_jsonl(&curves, out)?,
    }
    Ok(())
}

fn load_curves(path: &Path) -> Result<Vec<LabeledCurve>> {
    let curves = read_curves(path).with_context(|| format!("reading curves {}", path.display()))?;
    ensure!(!curves.is_empty(), "{} holds no curves", path.display());
    Ok(curves)
}

/// Distances between corresponding curves of two files, one per line. A
/// file holding a single curve is compared against every curve of the other.
pub fn cmd_distance(a: &Path, b: &Path, metric: Metric, out: &mut dyn Write) -> Result<()> {
    let (left, right) = (load_curves(a)?, load_curves(b)?);
    let pairs: Vec<(&LabeledCurve, &LabeledCurve)> = match (left.len(), right.len()) {
        (n, m) if n == m => left.iter().zip(&right).collect(),
        (1, _) => right.iter().map(|r| (&left[0], r)).collect(),
        (_, 1) => left.iter().map(|l| (l, &right[0])).collect(),
        (n, m) => bail!("cannot pair {n} curves with {m} curves"),
    };
    for (i, (l, r)) in pairs.into_iter().enumerate() {
        let d = curve_distance(&l.curve, &r.curve, metric)
            .with_context(|| format!("curve pair {i}"))?;
        writeln!(out, "{d}")?;
    }
    Ok(())
}

#[derive(Serialize)]
struct FeatureRecord<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    id: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<&'a str>,
    #[serde(flatten)]
    features: lowbow::lowbow::CurveFeatures,
}

/// Geometric features of every curve in a file. CSV gives one summary row
/// per curve; JSON lines also carry tangents and curvatures.
pub fn cmd_features(
    curves: &Path,
    metric: Metric,
    format: Format,
    out: &mut dyn Write,
) -> Result<()> {
    let curves = load_curves(curves)?;
    if format == Format::Csv {
        writeln!(
            out,
            "id,label,samples,total_complexity,path_length,max_curvature"
        )?;
    }
    for (i, lc) in curves.iter().enumerate() {
        let features =
            curve_features_with(&lc.curve, metric).with_context(|| format!("curve {i}"))?;
        match format {
            Format::Csv => {
                let max_curvature = features.curvature_norms.iter().copied().fold(0.0, f64::max);
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    lc.id.as_deref().unwrap_or(&i.to_string()),
                    lc.label.as_deref().unwrap_or(""),
                    lc.curve.len(),
                    features.total_complexity,
                    features.path_length,
                    max_curvature
                )?;
            }
            Format::Json => {
                let record = FeatureRecord {
                    id: lc.id.as_deref(),
                    label: lc.label.as_deref(),
                    features,
                };
                serde_json::to_writer(&mut *out, &record)?;
                writeln!(out)?;
            }
        }
    }
    Ok(())
}

/// Options of `eval` beyond the shared settings.
#[derive(Debug, Clone, Default)]
pub struct EvalOptions {
    /// Vocabulary file; built from the corpus when absent.
    pub vocab: Option<PathBuf>,
    pub layout: Layout,
    pub format: Format,
    pub select_sigma: bool,
}

/// Runs the evaluation protocol and writes a sweep table, a per-class grid,
/// or (with JSON) every individual report.
pub fn cmd_eval(
    corpus: &Path,
    config: &RunConfig,
    options: &EvalOptions,
    out: &mut dyn Write,
    diag: &mut dyn Write,
) -> Result<()> {
    let raw = load_raw(corpus)?;
    let vocab = match &options.vocab {
        Some(path) => load_vocab(path)?,
        None => corpus_vocabulary(&raw, config.min_count)?,
    };
    let corpus = encode_corpus(&raw, vocab, diag)?;
    let wants_baselines = options.format == Format::Json || options.layout == Layout::Grid;
    let protocol = EvalProtocol {
        baselines: wants_baselines,
        select_sigma: options.select_sigma,
        ..config.protocol()
    };
    let reports = evaluate(&corpus, &protocol)?;
    match (options.format, options.layout) {
        (Format::Json, _) => write_reports_jsonl(&reports, out)?,
        (Format::Csv, Layout::Sweep) => write_sweep_csv(&summarize_sweep(&reports), out)?,
        (Format::Csv, Layout::Grid) => write_grid_csv(&reports, out)?,
    }
    Ok(())
}
