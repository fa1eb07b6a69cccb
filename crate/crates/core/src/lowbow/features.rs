//! Finite-difference geometry of sampled curves: tangents, curvature and
//! arc length.

use serde::{Serialize, Serializer};

use super::LowbowCurve;
use crate::error::{invalid, Result};
use crate::geometry::{Metric, TangentVector};

/// Geometric summary of a sampled curve. Tangents and curvatures exist only
/// at interior samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveFeatures {
    /// Locations of the interior samples the tangents and curvatures refer to.
    pub locations: Vec<f64>,
    #[serde(serialize_with = "tangent_components")]
    pub tangents: Vec<TangentVector>,
    pub curvature_norms: Vec<f64>,
    pub total_complexity: f64,
    pub path_length: f64,
}

fn tangent_components<S: Serializer>(
    tangents: &[TangentVector],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(tangents.iter().map(TangentVector::components))
}

fn require_interior(curve: &LowbowCurve) -> Result<()> {
    if curve.len() < 3 {
        return Err(invalid(format!(
            "curve features need at least 3 samples, got {}",
            curve.len()
        )));
    }
    Ok(())
}

/// Central-difference velocity `(γ_{k+1} − γ_{k−1}) / (μ_{k+1} − μ_{k−1})`
/// at each interior sample, projected onto the zero-sum tangent space.
pub fn tangent_field(curve: &LowbowCurve) -> Result<Vec<TangentVector>> {
    require_interior(curve)?;
    let (mu, pts) = (curve.locations(), curve.points());
    (1..curve.len() - 1)
        .map(|k| {
            let span = mu[k + 1] - mu[k - 1];
            let mut v: Vec<f64> = pts[k + 1]
                .coords()
                .iter()
                .zip(pts[k - 1].coords())
                .map(|(a, b)| (a - b) / span)
                .collect();
            let drift = v.iter().sum::<f64>() / v.len() as f64;
            v.iter_mut().for_each(|x| *x -= drift);
            TangentVector::new(v, pts[k].clone())
        })
        .collect()
}

/// [`curve_features_with`] using Euclidean arc length.
pub fn curve_features(curve: &LowbowCurve) -> Result<CurveFeatures> {
    curve_features_with(curve, Metric::Euclidean)
}

/// Tangents, curvature norms and their integral, and arc length under
/// `metric`.
///
/// Curvature at an interior sample is the Euclidean norm of the
/// second-difference acceleration (the three-point formula, which reduces to
/// `(γ_{k+1} − 2γ_k + γ_{k−1}) / Δμ²` on a uniform grid). The total
/// complexity integrates these norms, each weighted by the half-width of its
/// surrounding interval.
pub fn curve_features_with(curve: &LowbowCurve, metric: Metric) -> Result<CurveFeatures> {
    let tangents = tangent_field(curve)?;
    let (mu, pts) = (curve.locations(), curve.points());
    let mut curvature_norms = Vec::with_capacity(curve.len() - 2);
    let mut total_complexity = 0.0;
    for k in 1..curve.len() - 1 {
        let (h_back, h_fwd) = (mu[k] - mu[k - 1], mu[k + 1] - mu[k]);
        let scale = 2.0 / (h_back + h_fwd);
        let norm = pts[k + 1]
            .coords()
            .iter()
            .zip(pts[k].coords())
            .zip(pts[k - 1].coords())
            .map(|((next, here), prev)| {
                let acc = scale * ((next - here) / h_fwd - (here - prev) / h_back);
                acc * acc
            })
            .sum::<f64>()
            .sqrt();
        total_complexity += norm * 0.5 * (h_back + h_fwd);
        curvature_norms.push(norm);
    }
    let mut path_length = 0.0;
    for pair in pts.windows(2) {
        path_length += metric.distance(&pair[0], &pair[1])?;
    }
    Ok(CurveFeatures {
        locations: mu[1..curve.len() - 1].to_vec(),
        tangents,
        curvature_norms,
        total_complexity,
        path_length,
    })
}
