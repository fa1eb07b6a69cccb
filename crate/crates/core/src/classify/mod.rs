//! Nearest-neighbor classification of lowbow curves, and the bag-of-words
//! baselines it is compared against.
//!
//! Neighbor selection and voting never depend on the order of the training
//! set. The `k` nearest neighbors are the first `k` in `(distance, label)`
//! order; among them the label with the most votes wins, ties going to the
//! label whose votes have the smaller summed distance and then to the
//! lexicographically smaller label.

mod eval;
mod report;

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::geometry::{euclidean_distance, fisher_distance, Metric, SimplexPoint};
use crate::lowbow::{curve_distance, LowbowCurve};

pub use eval::{
    evaluate, sigma_sweep, summarize_sweep, EvalProtocol, EvalReport, Method, SweepRow,
};
pub use report::{write_grid_csv, write_reports_jsonl, write_sweep_csv};

pub const DEFAULT_K: usize = 5;

/// Picks a label from `(distance, label)` pairs of every training item.
pub fn vote<'a, I>(neighbors: I, k: usize) -> Option<&'a str>
where
    I: IntoIterator<Item = (f64, &'a str)>,
{
    let mut all: Vec<(f64, &str)> = neighbors.into_iter().collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
    all.truncate(k);
    let mut tally: BTreeMap<&str, (usize, f64)> = BTreeMap::new();
    for (d, label) in all {
        let entry = tally.entry(label).or_insert((0, 0.0));
        entry.0 += 1;
        entry.1 += d;
    }
    // BTreeMap iterates labels in ascending order, so keeping the first best
    // candidate settles the final tie lexicographically.
    let mut best: Option<(&str, usize, f64)> = None;
    for (label, (count, summed)) in tally {
        let better = match best {
            None => true,
            Some((_, bc, bs)) => count > bc || (count == bc && summed < bs),
        };
        if better {
            best = Some((label, count, summed));
        }
    }
    best.map(|(label, _, _)| label)
}

fn check_training(len: usize, labels: usize, k: usize) -> Result<()> {
    if len != labels {
        return Err(invalid(format!("{len} training items but {labels} labels")));
    }
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    if len < k {
        return Err(invalid(format!("k = {k} exceeds the {len} training items")));
    }
    Ok(())
}

/// A k-nearest-neighbor classifier over lowbow curves.
#[derive(Debug, Clone)]
pub struct FittedKnn {
    curves: Vec<LowbowCurve>,
    labels: Vec<String>,
    k: usize,
    metric: Metric,
}

impl FittedKnn {
    pub fn fit(
        curves: Vec<LowbowCurve>,
        labels: Vec<String>,
        k: usize,
        metric: Metric,
    ) -> Result<Self> {
        check_training(curves.len(), labels.len(), k)?;
        let first = &curves[0];
        for c in &curves[1..] {
            if c.locations() != first.locations() {
                return Err(Error::GridMismatch);
            }
            if c.vocab_size() != first.vocab_size() {
                return Err(Error::DimensionMismatch {
                    left: first.vocab_size(),
                    right: c.vocab_size(),
                });
            }
        }
        Ok(Self {
            curves,
            labels,
            k,
            metric,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn classify(&self, query: &LowbowCurve) -> Result<String> {
        let distances = self
            .curves
            .iter()
            .map(|c| curve_distance(c, query, self.metric))
            .collect::<Result<Vec<_>>>()?;
        let label = vote(
            distances
                .into_iter()
                .zip(self.labels.iter().map(String::as_str)),
            self.k,
        )
        .expect("training set is nonempty");
        Ok(label.to_string())
    }

    pub fn classify_all(&self, queries: &[LowbowCurve]) -> Result<Vec<String>> {
        queries.par_iter().map(|q| self.classify(q)).collect()
    }
}

/// Classifies `query` with `model`.
pub fn knn_classify(model: &FittedKnn, query: &LowbowCurve) -> Result<String> {
    model.classify(query)
}

/// Dissimilarities between global histograms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BowMeasure {
    /// Fisher geodesic distance.
    Fisher,
    /// One minus the cosine similarity.
    Cosine,
    Euclidean,
}

/// `1 − ⟨a, b⟩ / (‖a‖ ‖b‖)` for arbitrary nonzero vectors.
pub fn cosine_dissimilarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(invalid("cosine dissimilarity of a zero vector"));
    }
    Ok((1.0 - dot / (na * nb)).max(0.0))
}

/// The bag-of-words baselines: tf-cosine dissimilarity or Euclidean
/// distance between two histograms.
pub fn bow_baselines(theta: &SimplexPoint, eta: &SimplexPoint, which: BowMeasure) -> Result<f64> {
    match which {
        BowMeasure::Fisher => fisher_distance(theta, eta),
        BowMeasure::Cosine => cosine_dissimilarity(theta.coords(), eta.coords()),
        BowMeasure::Euclidean => euclidean_distance(theta, eta),
    }
}

/// k-nearest-neighbor classifier over single histograms.
#[derive(Debug, Clone)]
pub struct BowKnn {
    points: Vec<SimplexPoint>,
    labels: Vec<String>,
    k: usize,
    measure: BowMeasure,
}

impl BowKnn {
    pub fn fit(
        points: Vec<SimplexPoint>,
        labels: Vec<String>,
        k: usize,
        measure: BowMeasure,
    ) -> Result<Self> {
        check_training(points.len(), labels.len(), k)?;
        Ok(Self {
            points,
            labels,
            k,
            measure,
        })
    }

    pub fn classify(&self, query: &SimplexPoint) -> Result<String> {
        let distances = self
            .points
            .iter()
            .map(|p| bow_baselines(p, query, self.measure))
            .collect::<Result<Vec<_>>>()?;
        let label = vote(
            distances
                .into_iter()
                .zip(self.labels.iter().map(String::as_str)),
            self.k,
        )
        .expect("training set is nonempty");
        Ok(label.to_string())
    }

    pub fn classify_all(&self, queries: &[SimplexPoint]) -> Result<Vec<String>> {
        queries.par_iter().map(|q| self.classify(q)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lowbow::{sample_locations, LowbowParams};

    fn constant(p: &[f64]) -> LowbowCurve {
        LowbowCurve::new(
            sample_locations(3).unwrap(),
            vec![SimplexPoint::new(p.to_vec()).unwrap(); 3],
            (&LowbowParams::default()).into(),
        )
        .unwrap()
    }

    fn labels(ls: &[&str]) -> Vec<String> {
        ls.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn majority_wins() {
        let picked = vote([(0.1, "A"), (0.2, "B"), (0.3, "A"), (0.9, "B")], 3);
        assert_eq!(picked, Some("A"));
    }

    #[test]
    fn tie_goes_to_closer_label_then_name() {
        assert_eq!(vote([(0.4, "A"), (0.1, "B")], 2), Some("B"));
        assert_eq!(vote([(0.1, "A"), (0.4, "B")], 2), Some("A"));
        assert_eq!(vote([(0.3, "B"), (0.3, "A")], 2), Some("A"));
        assert_eq!(vote(std::iter::empty(), 3), None);
    }

    #[test]
    fn exact_match_wins_with_k1() {
        let train = vec![
            constant(&[0.9, 0.1]),
            constant(&[0.1, 0.9]),
            constant(&[0.5, 0.5]),
        ];
        let model =
            FittedKnn::fit(train.clone(), labels(&["x", "y", "z"]), 1, Metric::Fisher).unwrap();
        for (c, want) in train.iter().zip(["x", "y", "z"]) {
            assert_eq!(knn_classify(&model, c).unwrap(), want);
        }
    }

    #[test]
    fn fit_validates_inputs() {
        let a = constant(&[0.9, 0.1]);
        assert!(FittedKnn::fit(vec![a.clone()], labels(&["x", "y"]), 1, Metric::Fisher).is_err());
        assert!(FittedKnn::fit(vec![a.clone()], labels(&["x"]), 2, Metric::Fisher).is_err());
        assert!(FittedKnn::fit(vec![a.clone()], labels(&["x"]), 0, Metric::Fisher).is_err());
        let wide = constant(&[0.2, 0.3, 0.5]);
        assert!(FittedKnn::fit(
            vec![a.clone(), wide.clone()],
            labels(&["x", "y"]),
            1,
            Metric::Fisher
        )
        .is_err());
        let model = FittedKnn::fit(vec![a], labels(&["x"]), 1, Metric::Fisher).unwrap();
        assert!(model.classify(&wide).is_err());
    }

    #[test]
    fn cosine_baseline_cases() {
        let p = SimplexPoint::new(vec![0.2, 0.8]).unwrap();
        assert!(bow_baselines(&p, &p, BowMeasure::Cosine).unwrap() < 1e-15);
        let e1 = SimplexPoint::new(vec![1.0, 0.0]).unwrap();
        let e2 = SimplexPoint::new(vec![0.0, 1.0]).unwrap();
        assert!((bow_baselines(&e1, &e2, BowMeasure::Cosine).unwrap() - 1.0).abs() < 1e-15);
        let a = [1.0, 2.0, 0.5];
        let b = [0.3, 0.1, 4.0];
        let scaled: Vec<f64> = a.iter().map(|x| x * 7.5).collect();
        let d1 = cosine_dissimilarity(&a, &b).unwrap();
        let d2 = cosine_dissimilarity(&scaled, &b).unwrap();
        assert!((d1 - d2).abs() < 1e-15);
        assert!(cosine_dissimilarity(&[0.0, 0.0], &b[..2]).is_err());
    }

    #[test]
    fn bow_knn_majority() {
        let pts: Vec<SimplexPoint> = [[0.9, 0.1], [0.8, 0.2], [0.2, 0.8]]
            .iter()
            .map(|p| SimplexPoint::new(p.to_vec()).unwrap())
            .collect();
        let model = BowKnn::fit(pts, labels(&["A", "A", "B"]), 3, BowMeasure::Euclidean).unwrap();
        let q = SimplexPoint::new(vec![0.1, 0.9]).unwrap();
        assert_eq!(model.classify(&q).unwrap(), "A");
    }
}
