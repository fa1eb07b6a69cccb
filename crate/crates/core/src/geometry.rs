//! Points of the multinomial simplex and the two geometries used on it.
//!
//! The Fisher information metric gives the simplex the geometry of the
//! positive orthant of a sphere: the map `θ ↦ √θ` sends histograms to unit
//! vectors, and the Fisher distance is the angle between those vectors. Its
//! range is `[0, π/2]`. The Euclidean alternative measures distances in the
//! ambient coordinates.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Allowed deviation of a point's coordinate sum from one.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Allowed deviation of a tangent vector's coordinate sum from zero.
pub const TANGENT_TOLERANCE: f64 = 1e-9;

/// A probability vector over `m + 1` items, possibly with zero entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SimplexPoint(Vec<f64>);

impl SimplexPoint {
    /// Validates nonnegative, finite coordinates summing to one.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(invalid("simplex point needs at least one coordinate"));
        }
        if coords.iter().any(|&x| !x.is_finite() || x < 0.0) {
            return Err(invalid(
                "simplex coordinates must be finite and nonnegative",
            ));
        }
        let sum: f64 = coords.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(invalid(format!("simplex coordinates sum to {sum}, not 1")));
        }
        Ok(Self(coords))
    }

    /// Normalizes nonnegative weights with a positive total.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) || weights.iter().any(|&w| w < 0.0) {
            return Err(invalid(
                "weights must be nonnegative with a positive finite sum",
            ));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(invalid("simplex point needs at least one coordinate"));
        }
        Ok(Self(vec![1.0 / len as f64; len]))
    }

    /// Skips validation. Callers guarantee the invariants.
    pub(crate) fn new_unchecked(coords: Vec<f64>) -> Self {
        debug_assert!((coords.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
        Self(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// Number of coordinates, `m + 1`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Manifold dimension `m`.
    pub fn dimension(&self) -> usize {
        self.0.len() - 1
    }

    pub fn is_interior(&self) -> bool {
        self.0.iter().all(|&x| x > 0.0)
    }

    /// Comma-separated coordinates in shortest round-trip notation.
    pub fn to_csv_row(&self) -> String {
        self.0
            .iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn from_csv_row(row: &str) -> Result<Self> {
        let coords = row
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad coordinate {s:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(coords)
    }
}

impl TryFrom<Vec<f64>> for SimplexPoint {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Self::new(coords)
    }
}

impl From<SimplexPoint> for Vec<f64> {
    fn from(p: SimplexPoint) -> Self {
        p.0
    }
}

/// A direction at a point of the simplex. Components sum to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    components: Vec<f64>,
    base: SimplexPoint,
}

impl TangentVector {
    pub fn new(components: Vec<f64>, base: SimplexPoint) -> Result<Self> {
        check_dims(components.len(), base.len())?;
        let sum: f64 = components.iter().sum();
        if sum.abs() > TANGENT_TOLERANCE {
            return Err(invalid(format!("tangent components sum to {sum}, not 0")));
        }
        Ok(Self { components, base })
    }

    pub fn zero(base: SimplexPoint) -> Self {
        Self {
            components: vec![0.0; base.len()],
            base,
        }
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn base(&self) -> &SimplexPoint {
        &self.base
    }

    pub fn euclidean_norm(&self) -> f64 {
        self.components.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

fn check_dims(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::DimensionMismatch { left, right });
    }
    Ok(())
}

/// Fisher inner product `Σ uᵢ vᵢ / θᵢ` of two tangent vectors at the same
/// interior point `θ`.
pub fn fisher_inner_product(u: &TangentVector, v: &TangentVector) -> Result<f64> {
    check_dims(u.components.len(), v.components.len())?;
    if u.base != v.base {
        return Err(invalid("tangent vectors live at different base points"));
    }
    if !u.base.is_interior() {
        return Err(Error::BoundaryPoint);
    }
    Ok(u.components
        .iter()
        .zip(&v.components)
        .zip(u.base.coords())
        .map(|((a, b), theta)| a * b / theta)
        .sum())
}

/// Fisher geodesic distance `acos(Σ √(θᵢ ηᵢ))`, in `[0, π/2]`.
///
/// Evaluated as the angle between `√θ` and `√η` through
/// `2·atan2(‖√θ − √η‖, ‖√θ + √η‖)`, which equals the arccosine form on the
/// simplex but stays accurate when the points are close, where `acos` near
/// one loses half the significant digits.
pub fn fisher_distance(theta: &SimplexPoint, eta: &SimplexPoint) -> Result<f64> {
    check_dims(theta.len(), eta.len())?;
    let (mut diff, mut sum) = (0.0, 0.0);
    for (a, b) in theta.coords().iter().zip(eta.coords()) {
        let (ra, rb) = (a.sqrt(), b.sqrt());
        diff += (ra - rb) * (ra - rb);
        sum += (ra + rb) * (ra + rb);
    }
    let d = 2.0 * diff.sqrt().atan2(sum.sqrt());
    Ok(d.clamp(0.0, std::f64::consts::FRAC_PI_2))
}

pub fn euclidean_distance(theta: &SimplexPoint, eta: &SimplexPoint) -> Result<f64> {
    check_dims(theta.len(), eta.len())?;
    Ok(theta
        .coords()
        .iter()
        .zip(eta.coords())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

/// Choice of simplex geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Fisher,
    Euclidean,
}

impl Metric {
    pub fn distance(self, theta: &SimplexPoint, eta: &SimplexPoint) -> Result<f64> {
        match self {
            Metric::Fisher => fisher_distance(theta, eta),
            Metric::Euclidean => euclidean_distance(theta, eta),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Fisher => "fisher",
            Metric::Euclidean => "euclidean",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fisher" => Ok(Metric::Fisher),
            "euclidean" => Ok(Metric::Euclidean),
            other => Err(invalid(format!("unknown metric {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

    fn p(c: &[f64]) -> SimplexPoint {
        SimplexPoint::new(c.to_vec()).unwrap()
    }

    #[test]
    fn fisher_inner_product_cases() {
        let base = p(&[0.5, 0.5]);
        let zero = TangentVector::zero(base.clone());
        assert_eq!(fisher_inner_product(&zero, &zero).unwrap(), 0.0);
        let u = TangentVector::new(vec![1.0, -1.0], base.clone()).unwrap();
        assert!((fisher_inner_product(&u, &u).unwrap() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn fisher_inner_product_rejects_boundary() {
        let base = p(&[1.0, 0.0]);
        let u = TangentVector::new(vec![1.0, -1.0], base).unwrap();
        assert!(matches!(
            fisher_inner_product(&u, &u),
            Err(Error::BoundaryPoint)
        ));
    }

    #[test]
    fn tangent_must_sum_to_zero() {
        assert!(TangentVector::new(vec![1.0, 0.0], p(&[0.5, 0.5])).is_err());
        assert!(TangentVector::new(vec![1.0, -1.0, 0.0], p(&[0.5, 0.5])).is_err());
    }

    #[test]
    fn fisher_distance_analytic_values() {
        let a = p(&[0.3, 0.7]);
        assert_eq!(fisher_distance(&a, &a).unwrap(), 0.0);
        assert!(
            (fisher_distance(&p(&[1.0, 0.0]), &p(&[0.0, 1.0])).unwrap() - FRAC_PI_2).abs() < 1e-15
        );
        let d = fisher_distance(&p(&[0.5, 0.5]), &p(&[1.0, 0.0])).unwrap();
        assert!((d - FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn fisher_distance_matches_arccos_form_away_from_zero() {
        let a = p(&[0.2, 0.3, 0.5]);
        let b = p(&[0.6, 0.1, 0.3]);
        let bc: f64 = a
            .coords()
            .iter()
            .zip(b.coords())
            .map(|(x, y)| (x * y).sqrt())
            .sum();
        assert!((fisher_distance(&a, &b).unwrap() - bc.acos()).abs() < 1e-14);
    }

    #[test]
    fn distances_reject_dimension_mismatch() {
        let a = p(&[0.5, 0.5]);
        let b = p(&[0.2, 0.3, 0.5]);
        assert!(matches!(
            fisher_distance(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(euclidean_distance(&a, &b).is_err());
    }

    #[test]
    fn euclidean_distance_values() {
        assert_eq!(
            euclidean_distance(&p(&[0.4, 0.6]), &p(&[0.4, 0.6])).unwrap(),
            0.0
        );
        assert!(
            (euclidean_distance(&p(&[1.0, 0.0]), &p(&[0.0, 1.0])).unwrap() - SQRT_2).abs() < 1e-15
        );
    }

    #[test]
    fn point_validation() {
        assert!(SimplexPoint::new(vec![0.5, 0.6]).is_err());
        assert!(SimplexPoint::new(vec![-0.1, 1.1]).is_err());
        assert!(SimplexPoint::new(vec![]).is_err());
        assert!(SimplexPoint::new(vec![f64::NAN, 1.0]).is_err());
        assert_eq!(
            SimplexPoint::from_weights(vec![1.0, 3.0]).unwrap(),
            p(&[0.25, 0.75])
        );
    }

    #[test]
    fn point_serializes_as_json_array_and_csv_row() {
        let a = p(&[0.25, 0.75]);
        assert_eq!(serde_json::to_string(&a).unwrap(), "[0.25,0.75]");
        let back: SimplexPoint = serde_json::from_str("[0.25,0.75]").unwrap();
        assert_eq!(back, a);
        assert!(serde_json::from_str::<SimplexPoint>("[0.5,0.75]").is_err());
        assert_eq!(a.to_csv_row(), "0.25,0.75");
        assert_eq!(SimplexPoint::from_csv_row("0.25, 0.75").unwrap(), a);
    }

    #[test]
    fn metric_parses() {
        assert_eq!("Fisher".parse::<Metric>().unwrap(), Metric::Fisher);
        assert_eq!("euclidean".parse::<Metric>().unwrap(), Metric::Euclidean);
        assert!("cosine".parse::<Metric>().is_err());
    }
}
