//! Repeated train/test evaluation over training-set sizes and kernel scales.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use super::{BowKnn, BowMeasure, FittedKnn};
use crate::corpus::{split_by_count, LabeledCorpus, SplitMode};
use crate::error::{invalid, Result};
use crate::geometry::{Metric, SimplexPoint};
use crate::kernels::{KernelFamily, KernelShape, DEFAULT_BETA_FLOOR};
use crate::lowbow::{
    global_bow, lowbow_curve, LowbowCurve, LowbowParams, DEFAULT_SAMPLES, DEFAULT_SMOOTHING,
};

/// Which classifier produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    /// Lowbow curves at a fixed scale.
    Lowbow,
    /// Lowbow at the scale chosen on a validation split of the training set.
    LowbowSelected,
    /// Lowbow with the constant kernel, i.e. Fisher distance between global
    /// histograms.
    BowFisher,
    TfCosine,
    BowEuclidean,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Lowbow => "lowbow",
            Method::LowbowSelected => "lowbow_selected",
            Method::BowFisher => "bow_fisher",
            Method::TfCosine => "tf_cosine",
            Method::BowEuclidean => "bow_euclidean",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Method {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalProtocol {
    pub train_sizes: Vec<usize>,
    pub repetitions: usize,
    pub seed: u64,
    pub k: usize,
    pub metric: Metric,
    pub sigmas: Vec<f64>,
    pub c: f64,
    pub samples: usize,
    pub kernel: KernelFamily,
    pub beta_floor: f64,
    pub split: SplitMode,
    /// Also run the bow-Fisher, tf-cosine and bow-Euclidean baselines.
    pub baselines: bool,
    /// Pick the best scale on a validation split of each training set.
    pub select_sigma: bool,
    /// Share of each training set held out for scale selection.
    pub validation_fraction: f64,
}

impl Default for EvalProtocol {
    fn default() -> Self {
        Self {
            train_sizes: vec![100],
            repetitions: 10,
            seed: 0,
            k: super::DEFAULT_K,
            metric: Metric::Fisher,
            sigmas: vec![crate::lowbow::DEFAULT_SIGMA],
            c: DEFAULT_SMOOTHING,
            samples: DEFAULT_SAMPLES,
            kernel: KernelFamily::TruncatedGaussian,
            beta_floor: DEFAULT_BETA_FLOOR,
            split: SplitMode::Stratified,
            baselines: true,
            select_sigma: false,
            validation_fraction: 0.25,
        }
    }
}

impl EvalProtocol {
    fn params(&self, sigma: f64) -> Result<LowbowParams> {
        LowbowParams::new(
            KernelShape::new(self.kernel, sigma, self.beta_floor)?,
            self.c,
        )
    }

    fn validate(&self, corpus: &LabeledCorpus) -> Result<()> {
        if self.train_sizes.is_empty() || self.sigmas.is_empty() {
            return Err(invalid(
                "protocol needs at least one train size and one scale",
            ));
        }
        if self.repetitions == 0 {
            return Err(invalid("protocol needs at least one repetition"));
        }
        if let Some(&n) = self.train_sizes.iter().find(|&&n| n >= corpus.len()) {
            return Err(invalid(format!(
                "train size {n} must be smaller than the corpus ({} documents)",
                corpus.len()
            )));
        }
        if self.select_sigma && !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0)
        {
            return Err(invalid(
                "validation fraction must lie strictly between 0 and 1",
            ));
        }
        for &sigma in &self.sigmas {
            self.params(sigma)?;
        }
        Ok(())
    }
}

/// Outcome of one classifier on one train/test split.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub method: Method,
    /// Kernel scale for lowbow methods.
    pub sigma: Option<f64>,
    pub train_size: usize,
    pub test_size: usize,
    pub repetition: usize,
    /// Seed of the train/test split.
    pub split_seed: u64,
    pub misclassified: usize,
    pub error_rate: f64,
    /// `confusion[actual][predicted]` counts.
    pub confusion: BTreeMap<String, BTreeMap<String, usize>>,
    pub c: f64,
    pub samples: usize,
    pub kernel: KernelFamily,
    pub metric: Metric,
    pub k: usize,
}

impl EvalReport {
    /// Error rate restricted to test items whose true label is `label`.
    pub fn class_error(&self, label: &str) -> Option<f64> {
        let row = self.confusion.get(label)?;
        let total: usize = row.values().sum();
        let wrong: usize = row
            .iter()
            .filter(|(p, _)| p.as_str() != label)
            .map(|(_, n)| n)
            .sum();
        (total > 0).then(|| wrong as f64 / total as f64)
    }
}

struct Outcome {
    misclassified: usize,
    confusion: BTreeMap<String, BTreeMap<String, usize>>,
}

fn score(truth: &[String], predicted: &[String]) -> Outcome {
    let mut confusion: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    let mut misclassified = 0;
    for (t, p) in truth.iter().zip(predicted) {
        *confusion
            .entry(t.clone())
            .or_default()
            .entry(p.clone())
            .or_insert(0) += 1;
        if t != p {
            misclassified += 1;
        }
    }
    Outcome {
        misclassified,
        confusion,
    }
}

// splitmix64 finalizer; derives independent split seeds from the run seed.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn split_seed(seed: u64, train_size: usize, repetition: usize) -> u64 {
    mix(mix(mix(seed) ^ train_size as u64) ^ repetition as u64)
}

fn embed(
    corpus: &LabeledCorpus,
    samples: usize,
    params: &LowbowParams,
) -> Result<Vec<LowbowCurve>> {
    let v = corpus.vocab_size();
    corpus
        .items
        .par_iter()
        .map(|d| lowbow_curve(&d.sequence, samples, params, v))
        .collect()
}

fn bows(corpus: &LabeledCorpus, c: f64) -> Result<Vec<SimplexPoint>> {
    let v = corpus.vocab_size();
    corpus
        .items
        .iter()
        .map(|d| global_bow(&d.sequence, c, v))
        .collect()
}

fn labels_of(corpus: &LabeledCorpus) -> Vec<String> {
    corpus.items.iter().map(|d| d.label.clone()).collect()
}

fn lowbow_predictions(
    train: &LabeledCorpus,
    test: &LabeledCorpus,
    protocol: &EvalProtocol,
    params: &LowbowParams,
) -> Result<Vec<String>> {
    let model = FittedKnn::fit(
        embed(train, protocol.samples, params)?,
        labels_of(train),
        protocol.k,
        protocol.metric,
    )?;
    model.classify_all(&embed(test, protocol.samples, params)?)
}

/// Runs the protocol for every training size, repetition and scale.
///
/// Splits depend only on `(seed, train size, repetition)`, so every scale and
/// every baseline sees the same train/test partitions. Reports come out
/// grouped by training size, then repetition, with lowbow scales in protocol
/// order followed by the selected-scale and baseline reports.
pub fn evaluate(corpus: &LabeledCorpus, protocol: &EvalProtocol) -> Result<Vec<EvalReport>> {
    protocol.validate(corpus)?;
    let jobs: Vec<(usize, usize)> = protocol
        .train_sizes
        .iter()
        .flat_map(|&n| (0..protocol.repetitions).map(move |r| (n, r)))
        .collect();
    let per_job = jobs
        .par_iter()
        .map(|&(n, r)| evaluate_split(corpus, protocol, n, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(per_job.into_iter().flatten().collect())
}

fn evaluate_split(
    corpus: &LabeledCorpus,
    protocol: &EvalProtocol,
    train_size: usize,
    repetition: usize,
) -> Result<Vec<EvalReport>> {
    let seed = split_seed(protocol.seed, train_size, repetition);
    let (train, test) = split_by_count(corpus, train_size, seed, protocol.split)?;
    let truth = labels_of(&test);
    let report = |method, sigma, outcome: Outcome| EvalReport {
        method,
        sigma,
        train_size,
        test_size: truth.len(),
        repetition,
        split_seed: seed,
        misclassified: outcome.misclassified,
        error_rate: outcome.misclassified as f64 / truth.len() as f64,
        confusion: outcome.confusion,
        c: protocol.c,
        samples: protocol.samples,
        kernel: protocol.kernel,
        metric: protocol.metric,
        k: protocol.k,
    };

    let mut reports = Vec::new();
    for &sigma in &protocol.sigmas {
        let predicted = lowbow_predictions(&train, &test, protocol, &protocol.params(sigma)?)?;
        reports.push(report(
            Method::Lowbow,
            Some(sigma),
            score(&truth, &predicted),
        ));
    }

    if protocol.select_sigma {
        let sigma = select_sigma(&train, protocol, seed)?;
        let chosen = reports
            .iter()
            .find(|r| r.sigma == Some(sigma))
            .expect("selected scale comes from the protocol grid");
        reports.push(EvalReport {
            method: Method::LowbowSelected,
            ..chosen.clone()
        });
    }

    if protocol.baselines {
        let flat = LowbowParams::new(KernelShape::constant(), protocol.c)?;
        let model = FittedKnn::fit(
            embed(&train, protocol.samples, &flat)?,
            labels_of(&train),
            protocol.k,
            Metric::Fisher,
        )?;
        let predicted = model.classify_all(&embed(&test, protocol.samples, &flat)?)?;
        reports.push(EvalReport {
            metric: Metric::Fisher,
            ..report(
                Method::BowFisher,
                Some(f64::INFINITY),
                score(&truth, &predicted),
            )
        });

        let (train_bow, test_bow) = (bows(&train, protocol.c)?, bows(&test, protocol.c)?);
        for (method, measure, metric) in [
            (Method::TfCosine, BowMeasure::Cosine, protocol.metric),
            (
                Method::BowEuclidean,
                BowMeasure::Euclidean,
                Metric::Euclidean,
            ),
        ] {
            let model = BowKnn::fit(train_bow.clone(), labels_of(&train), protocol.k, measure)?;
            let predicted = model.classify_all(&test_bow)?;
            reports.push(EvalReport {
                metric,
                ..report(method, None, score(&truth, &predicted))
            });
        }
    }
    Ok(reports)
}

/// Chooses the scale with the lowest error on a held-out part of `train`.
/// Ties go to the scale listed first.
fn select_sigma(train: &LabeledCorpus, protocol: &EvalProtocol, seed: u64) -> Result<f64> {
    let held_out = ((protocol.validation_fraction * train.len() as f64).round() as usize).max(1);
    let inner_size = train.len().saturating_sub(held_out);
    if inner_size < protocol.k {
        return Err(invalid(format!(
            "training set of {} is too small for scale selection with k = {}",
            train.len(),
            protocol.k
        )));
    }
    let (inner, validation) =
        split_by_count(train, inner_size, mix(seed ^ 0x5eed), protocol.split)?;
    let truth = labels_of(&validation);
    let mut best: Option<(usize, f64)> = None;
    for &sigma in &protocol.sigmas {
        let predicted =
            lowbow_predictions(&inner, &validation, protocol, &protocol.params(sigma)?)?;
        let errors = score(&truth, &predicted).misclassified;
        if best.is_none_or(|(e, _)| errors < e) {
            best = Some((errors, sigma));
        }
    }
    Ok(best.expect("protocol has at least one scale").1)
}

/// Mean and spread of the lowbow error rate for one scale and training size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub sigma: f64,
    pub train_size: usize,
    pub mean_error: f64,
    /// Sample standard deviation over repetitions (0 for a single one).
    pub std_error: f64,
    pub repetitions: usize,
}

/// Collapses fixed-scale lowbow reports into one row per
/// `(training size, scale)`, in the order the scales were listed.
pub fn summarize_sweep(reports: &[EvalReport]) -> Vec<SweepRow> {
    let mut rows: Vec<(usize, f64, Vec<f64>)> = Vec::new();
    for r in reports.iter().filter(|r| r.method == Method::Lowbow) {
        let sigma = r.sigma.expect("lowbow reports carry a scale");
        match rows
            .iter_mut()
            .find(|(n, s, _)| *n == r.train_size && s.to_bits() == sigma.to_bits())
        {
            Some(row) => row.2.push(r.error_rate),
            None => rows.push((r.train_size, sigma, vec![r.error_rate])),
        }
    }
    rows.into_iter()
        .map(|(train_size, sigma, errors)| {
            let n = errors.len() as f64;
            let mean = errors.iter().sum::<f64>() / n;
            let var = if errors.len() > 1 {
                errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            SweepRow {
                sigma,
                train_size,
                mean_error: mean,
                std_error: var.sqrt(),
                repetitions: errors.len(),
            }
        })
        .collect()
}

/// Error rate against kernel scale on shared splits. Duplicate scales give
/// identical rows.
pub fn sigma_sweep(
    corpus: &LabeledCorpus,
    sigmas: &[f64],
    protocol: &EvalProtocol,
) -> Result<Vec<SweepRow>> {
    if sigmas.len() < 2 {
        return Err(invalid("a sweep needs at least two scales"));
    }
    let protocol = EvalProtocol {
        sigmas: sigmas.to_vec(),
        baselines: false,
        select_sigma: false,
        ..protocol.clone()
    };
    let reports = evaluate(corpus, &protocol)?;
    // Duplicated scales are merged by summarize_sweep; expand them back.
    let summary = summarize_sweep(&reports);
    Ok(protocol
        .train_sizes
        .iter()
        .flat_map(|&n| {
            let summary = &summary;
            sigmas.iter().map(move |s| {
                let mut row = summary
                    .iter()
                    .find(|r| r.train_size == n && r.sigma.to_bits() == s.to_bits())
                    .expect("every scale was evaluated")
                    .clone();
                row.repetitions = protocol.repetitions;
                row
            })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn score_counts_mismatches() {
        let truth: Vec<String> = ["A", "A", "B", "B"].iter().map(|s| s.to_string()).collect();
        let right = score(&truth, &truth);
        assert_eq!(right.misclassified, 0);
        let flipped: Vec<String> = ["B", "B", "A", "A"].iter().map(|s| s.to_string()).collect();
        let wrong = score(&truth, &flipped);
        assert_eq!(wrong.misclassified, 4);
        assert_eq!(wrong.confusion["A"]["B"], 2);
        let total: usize = wrong.confusion.values().flat_map(|r| r.values()).sum();
        assert_eq!(total, 4);
    }

    #[test]
    fn split_seeds_differ() {
        assert_ne!(split_seed(1, 100, 0), split_seed(1, 100, 1));
        assert_ne!(split_seed(1, 100, 0), split_seed(1, 200, 0));
        assert_eq!(split_seed(3, 50, 2), split_seed(3, 50, 2));
    }

    #[test]
    fn sweep_summary_statistics() {
        let base = EvalReport {
            method: Method::Lowbow,
            sigma: Some(0.2),
            train_size: 10,
            test_size: 4,
            repetition: 0,
            split_seed: 0,
            misclassified: 1,
            error_rate: 0.25,
            confusion: BTreeMap::new(),
            c: 0.0,
            samples: 5,
            kernel: KernelFamily::TruncatedGaussian,
            metric: Metric::Fisher,
            k: 1,
        };
        let second = EvalReport {
            error_rate: 0.75,
            repetition: 1,
            ..base.clone()
        };
        let rows = summarize_sweep(&[base, second]);
        assert_eq!(rows.len(), 1);
        assert!((rows[0].mean_error - 0.5).abs() < 1e-15);
        assert!((rows[0].std_error - 0.5f64.sqrt() * 0.5).abs() < 1e-15);
    }
}
