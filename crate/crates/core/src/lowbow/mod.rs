//! The locally weighted bag of words representation.
//!
//! A word sequence `y = ⟨y₁, …, y_N⟩` is first spread into a matrix of local
//! histograms (the standard representation, one row per position, with an
//! additive smoothing coefficient `c`), then stretched over `[0, 1]` so that
//! position `i` covers the segment `((i−1)/N, i/N]`. Weighting this
//! piecewise-constant function by a kernel `K_{μ,σ}` and integrating over
//! `t` gives the local histogram `γ_μ(y)`. Sweeping `μ` over `[0, 1]` traces
//! a curve in the simplex.
//!
//! Because the stretched document is constant on each segment, the integral
//! reduces to a sum of kernel masses over segments:
//!
//! ```text
//! γ_μ(y)_j = c/(1 + c|V|) + 1/(1 + c|V|) · Σ_{i : y_i = j} ∫_{(i−1)/N}^{i/N} K_{μ,σ}(t) dt
//! ```
//!
//! which this module evaluates exactly, up to the accuracy of the kernel's
//! closed-form masses.

mod features;
mod io;
mod lipschitz;

use crate::corpus::WordSequence;
use crate::error::{invalid, Error, Result};
use crate::geometry::{Metric, SimplexPoint};
use crate::kernels::{KernelFamily, KernelShape};

pub use features::{curve_features, curve_features_with, tangent_field, CurveFeatures};
pub use io::{
    read_curves, read_curves_csv, read_curves_jsonl, write_curves_csv, write_curves_jsonl,
    LabeledCurve,
};
pub use lipschitz::{lipschitz_check, LipschitzReport, LIPSCHITZ_SLACK};

pub const DEFAULT_SMOOTHING: f64 = 0.005;
pub const DEFAULT_SIGMA: f64 = 0.2;
pub const DEFAULT_SAMPLES: usize = 5;

/// Kernel and smoothing coefficient shared by every point of a curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowbowParams {
    pub kernel: KernelShape,
    pub c: f64,
}

impl LowbowParams {
    pub fn new(kernel: KernelShape, c: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(invalid(format!(
                "smoothing coefficient must be finite and >= 0, got {c}"
            )));
        }
        Ok(Self { kernel, c })
    }

    pub fn gaussian(sigma: f64, c: f64) -> Result<Self> {
        Self::new(KernelShape::gaussian(sigma)?, c)
    }
}

impl Default for LowbowParams {
    fn default() -> Self {
        Self {
            kernel: KernelShape::gaussian(DEFAULT_SIGMA).expect("default scale is valid"),
            c: DEFAULT_SMOOTHING,
        }
    }
}

/// The smoothed position-by-word matrix of a word sequence. Row `i` is the
/// local histogram placing weight `(1+c)/(1+c|V|)` on `y_i` and `c/(1+c|V|)`
/// on every other word.
#[derive(Debug, Clone, Copy)]
pub struct StandardRepresentation<'a> {
    sequence: &'a WordSequence,
    c: f64,
    vocab_size: usize,
}

impl<'a> StandardRepresentation<'a> {
    pub fn new(sequence: &'a WordSequence, c: f64, vocab_size: usize) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(invalid(format!(
                "smoothing coefficient must be finite and >= 0, got {c}"
            )));
        }
        sequence.check_vocab(vocab_size)?;
        Ok(Self {
            sequence,
            c,
            vocab_size,
        })
    }

    /// Entry at 1-based position `i` and 1-based word `j`.
    pub fn value(&self, i: usize, j: usize) -> Result<f64> {
        if i == 0 || i > self.sequence.len() {
            return Err(invalid(format!(
                "position {i} outside 1..={}",
                self.sequence.len()
            )));
        }
        if j == 0 || j > self.vocab_size {
            return Err(invalid(format!("word {j} outside 1..={}", self.vocab_size)));
        }
        let denom = 1.0 + self.c * self.vocab_size as f64;
        Ok(if self.sequence.indices()[i - 1] == j {
            (1.0 + self.c) / denom
        } else {
            self.c / denom
        })
    }

    /// Value of the length-normalized document at `t ∈ [0, 1]`. Position
    /// `⌈tN⌉` is used, with `t = 0` mapped to the first word.
    pub fn at_time(&self, t: f64, j: usize) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(invalid(format!("time {t} outside [0, 1]")));
        }
        let n = self.sequence.len();
        let i = ((t * n as f64).ceil() as usize).clamp(1, n);
        self.value(i, j)
    }
}

/// Smoothed global histogram: coordinate `j` proportional to
/// `Σ_i (δ(y_i, j) + c)`.
pub fn global_bow(y: &WordSequence, c: f64, vocab_size: usize) -> Result<SimplexPoint> {
    StandardRepresentation::new(y, c, vocab_size)?;
    let n = y.len() as f64;
    let mut counts = vec![0.0; vocab_size];
    for &w in y.indices() {
        counts[w - 1] += 1.0;
    }
    let total = n * (1.0 + c * vocab_size as f64);
    Ok(SimplexPoint::new_unchecked(
        counts.into_iter().map(|k| (k + n * c) / total).collect(),
    ))
}

/// Local histogram `γ_μ(y)` at document location `μ`.
pub fn lowbow_at(
    y: &WordSequence,
    mu: f64,
    params: &LowbowParams,
    vocab_size: usize,
) -> Result<SimplexPoint> {
    let kernel = params.kernel.at(mu)?;
    if params.kernel.is_constant() {
        return global_bow(y, params.c, vocab_size);
    }
    StandardRepresentation::new(y, params.c, vocab_size)?;
    let mut local = vec![0.0; vocab_size];
    for (&w, m) in y.indices().iter().zip(kernel.segment_masses(y.len())) {
        local[w - 1] += m;
    }
    let denom = 1.0 + params.c * vocab_size as f64;
    Ok(SimplexPoint::new_unchecked(
        local.into_iter().map(|m| (params.c + m) / denom).collect(),
    ))
}

/// Where a curve came from. Serialized alongside the sampled points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Provenance {
    pub sigma: f64,
    pub c: f64,
    pub kernel: KernelFamily,
    pub beta_floor: f64,
}

impl From<&LowbowParams> for Provenance {
    fn from(p: &LowbowParams) -> Self {
        Self {
            sigma: p.kernel.sigma(),
            c: p.c,
            kernel: p.kernel.family(),
            beta_floor: p.kernel.beta_floor(),
        }
    }
}

/// A lowbow curve sampled at `l >= 2` increasing locations in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LowbowCurve {
    locations: Vec<f64>,
    points: Vec<SimplexPoint>,
    provenance: Provenance,
}

impl LowbowCurve {
    pub fn new(
        locations: Vec<f64>,
        points: Vec<SimplexPoint>,
        provenance: Provenance,
    ) -> Result<Self> {
        if locations.len() < 2 {
            return Err(invalid("a curve needs at least two sample locations"));
        }
        if locations.len() != points.len() {
            return Err(invalid(format!(
                "{} locations but {} points",
                locations.len(),
                points.len()
            )));
        }
        if locations.iter().any(|mu| !(0.0..=1.0).contains(mu)) {
            return Err(invalid("sample locations must lie in [0, 1]"));
        }
        if locations.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("sample locations must be strictly increasing"));
        }
        let dim = points[0].len();
        if let Some(p) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: p.len(),
            });
        }
        Ok(Self {
            locations,
            points,
            provenance,
        })
    }

    pub fn locations(&self) -> &[f64] {
        &self.locations
    }

    pub fn points(&self) -> &[SimplexPoint] {
        &self.points
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Number of samples `l`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of coordinates of each point, `|V|`.
    pub fn vocab_size(&self) -> usize {
        self.points[0].len()
    }
}

/// `l` equally spaced locations from 0 to 1 inclusive.
pub fn sample_locations(samples: usize) -> Result<Vec<f64>> {
    if samples < 2 {
        return Err(invalid(format!("need at least 2 samples, got {samples}")));
    }
    let last = (samples - 1) as f64;
    Ok((0..samples).map(|k| k as f64 / last).collect())
}

/// Samples `γ_μ(y)` at `l` equally spaced locations, endpoints included.
pub fn lowbow_curve(
    y: &WordSequence,
    samples: usize,
    params: &LowbowParams,
    vocab_size: usize,
) -> Result<LowbowCurve> {
    let locations = sample_locations(samples)?;
    let points = locations
        .iter()
        .map(|&mu| lowbow_at(y, mu, params, vocab_size))
        .collect::<Result<Vec<_>>>()?;
    LowbowCurve::new(locations, points, params.into())
}

/// Mean distance between corresponding points of two curves sampled on the
/// same grid.
pub fn curve_distance(a: &LowbowCurve, b: &LowbowCurve, metric: Metric) -> Result<f64> {
    if a.locations != b.locations {
        return Err(Error::GridMismatch);
    }
    if a.vocab_size() != b.vocab_size() {
        return Err(Error::DimensionMismatch {
            left: a.vocab_size(),
            right: b.vocab_size(),
        });
    }
    let mut total = 0.0;
    for (p, q) in a.points.iter().zip(&b.points) {
        total += metric.distance(p, q)?;
    }
    Ok(total / a.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(v: &[usize]) -> WordSequence {
        WordSequence::new(v.to_vec()).unwrap()
    }

    #[test]
    fn standard_representation_values() {
        let y = seq(&[1, 2]);
        let r = StandardRepresentation::new(&y, 0.0, 2).unwrap();
        assert_eq!(r.value(1, 1).unwrap(), 1.0);
        assert_eq!(r.value(1, 2).unwrap(), 0.0);
        let r = StandardRepresentation::new(&y, 1.0, 2).unwrap();
        assert!((r.value(1, 1).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.value(1, 2).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(r.value(0, 1).is_err());
        assert!(r.value(3, 1).is_err());
        assert!(r.value(1, 3).is_err());
    }

    #[test]
    fn at_time_maps_zero_to_first_word() {
        let y = seq(&[1, 2, 2]);
        let r = StandardRepresentation::new(&y, 0.0, 2).unwrap();
        assert_eq!(r.at_time(0.0, 1).unwrap(), 1.0);
        assert_eq!(r.at_time(1.0 / 3.0, 1).unwrap(), 1.0);
        assert_eq!(r.at_time(0.34, 2).unwrap(), 1.0);
        assert_eq!(r.at_time(1.0, 2).unwrap(), 1.0);
    }

    #[test]
    fn global_bow_examples() {
        let y = seq(&[1, 1, 2]);
        let p = global_bow(&y, 0.0, 2).unwrap();
        assert!((p.coords()[0] - 2.0 / 3.0).abs() < 1e-15);
        let p = global_bow(&y, 1.0, 2).unwrap();
        assert!((p.coords()[0] - 5.0 / 9.0).abs() < 1e-15);
        assert!((p.coords()[1] - 4.0 / 9.0).abs() < 1e-15);
        assert_eq!(
            global_bow(&seq(&[1]), 0.0, 3).unwrap().coords(),
            &[1.0, 0.0, 0.0]
        );
        assert!(global_bow(&seq(&[4]), 0.0, 3).is_err());
    }

    #[test]
    fn single_word_document_is_a_vertex() {
        for shape in [
            KernelShape::gaussian(0.01).unwrap(),
            KernelShape::beta(0.3, 1.01).unwrap(),
        ] {
            let params = LowbowParams::new(shape, 0.0).unwrap();
            for mu in [0.0, 0.4, 1.0] {
                let p = lowbow_at(&seq(&[1]), mu, &params, 3).unwrap();
                assert!((p.coords()[0] - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn sharp_kernel_picks_local_word() {
        // ∫₀^½ K_{0.25, 0.05} = 0.99999971334... by adaptive quadrature.
        let params = LowbowParams::gaussian(0.05, 0.0).unwrap();
        let p = lowbow_at(&seq(&[1, 2]), 0.25, &params, 2).unwrap();
        assert!(p.coords()[0] > 0.999);
        assert!((p.coords()[0] - 0.999_999_713_348_346).abs() < 1e-12);
    }

    #[test]
    fn lowbow_matches_quadrature_reference() {
        // y = ⟨1,1,2,3,1⟩, |V| = 3, c = 0.5, μ = 0.3, σ = 0.15, each segment
        // mass integrated with scipy.integrate.quad.
        let params = LowbowParams::gaussian(0.15, 0.5).unwrap();
        let p = lowbow_at(&seq(&[1, 1, 2, 3, 1]), 0.3, &params, 3).unwrap();
        let expected = [
            0.496_827_257_694_649_6,
            0.294_036_447_768_878_66,
            0.209_136_294_536_471_84,
        ];
        for (got, want) in p.coords().iter().zip(expected) {
            assert!((got - want).abs() < 1e-13, "{got} vs {want}");
        }
    }

    #[test]
    fn constant_kernel_reproduces_global_bow() {
        let y = seq(&[2, 1, 3, 3]);
        let params = LowbowParams::new(KernelShape::constant(), 0.1).unwrap();
        let bow = global_bow(&y, 0.1, 4).unwrap();
        for mu in [0.0, 0.5, 1.0] {
            assert_eq!(lowbow_at(&y, mu, &params, 4).unwrap(), bow);
        }
    }

    #[test]
    fn curve_sampling_grid() {
        let y = seq(&[1, 2, 1]);
        let curve = lowbow_curve(&y, 5, &LowbowParams::default(), 2).unwrap();
        assert_eq!(curve.locations(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(curve.len(), 5);
        assert!(lowbow_curve(&y, 1, &LowbowParams::default(), 2).is_err());
    }

    #[test]
    fn wide_kernel_curve_is_degenerate() {
        let y = seq(&[1, 3, 3, 2, 1, 1]);
        let params = LowbowParams::gaussian(1e6, 0.005).unwrap();
        let curve = lowbow_curve(&y, 5, &params, 3).unwrap();
        let first = &curve.points()[0];
        for p in curve.points() {
            for (a, b) in p.coords().iter().zip(first.coords()) {
                assert!((a - b).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn reversed_document_gives_mirrored_curve() {
        let params = LowbowParams::gaussian(0.1, 0.0).unwrap();
        let a = lowbow_curve(&seq(&[1, 2]), 7, &params, 2).unwrap();
        let b = lowbow_curve(&seq(&[2, 1]), 7, &params, 2).unwrap();
        for k in 0..7 {
            let p = a.points()[k].coords();
            let q = b.points()[6 - k].coords();
            assert!((p[0] - q[0]).abs() < 1e-12 && (p[1] - q[1]).abs() < 1e-12);
        }
        let swapped = lowbow_curve(&seq(&[2, 1]), 7, &params, 2).unwrap();
        for (p, q) in a.points().iter().zip(swapped.points()) {
            assert!((p.coords()[0] - q.coords()[1]).abs() < 1e-12);
        }
    }

    fn constant_curve(p: &SimplexPoint, l: usize) -> LowbowCurve {
        LowbowCurve::new(
            sample_locations(l).unwrap(),
            vec![p.clone(); l],
            (&LowbowParams::default()).into(),
        )
        .unwrap()
    }

    #[test]
    fn curve_distance_identity_and_constant_curves() {
        let y = seq(&[1, 2, 2, 1, 3]);
        let curve = lowbow_curve(&y, 5, &LowbowParams::default(), 3).unwrap();
        assert_eq!(curve_distance(&curve, &curve, Metric::Fisher).unwrap(), 0.0);

        let theta = SimplexPoint::new(vec![0.2, 0.3, 0.5]).unwrap();
        let eta = SimplexPoint::new(vec![0.6, 0.3, 0.1]).unwrap();
        for metric in [Metric::Fisher, Metric::Euclidean] {
            let d = curve_distance(&constant_curve(&theta, 4), &constant_curve(&eta, 4), metric)
                .unwrap();
            assert!((d - metric.distance(&theta, &eta).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn curve_distance_rejects_mismatch() {
        let theta = SimplexPoint::new(vec![0.5, 0.5]).unwrap();
        let wide = SimplexPoint::new(vec![0.2, 0.3, 0.5]).unwrap();
        let a = constant_curve(&theta, 4);
        assert!(matches!(
            curve_distance(&a, &constant_curve(&theta, 5), Metric::Fisher),
            Err(Error::GridMismatch)
        ));
        assert!(curve_distance(&a, &constant_curve(&wide, 4), Metric::Fisher).is_err());
    }

    #[test]
    fn curve_validation() {
        let p = SimplexPoint::new(vec![0.5, 0.5]).unwrap();
        let prov = (&LowbowParams::default()).into();
        assert!(LowbowCurve::new(vec![0.0], vec![p.clone()], prov).is_err());
        assert!(LowbowCurve::new(vec![0.5, 0.5], vec![p.clone(), p.clone()], prov).is_err());
        assert!(LowbowCurve::new(vec![0.0, 1.5], vec![p.clone(), p.clone()], prov).is_err());
        assert!(LowbowCurve::new(vec![0.0, 1.0], vec![p], prov).is_err());
    }
}
