//! Location-scale smoothing kernels on `[0, 1]`.
//!
//! A kernel `K_{μ,σ}` is a positive density on `[0, 1]` centred near the
//! document position `μ` with spread controlled by `σ`. Two families are
//! provided:
//!
//! * the Gaussian density restricted to `[0, 1]` and renormalized, and
//! * the Beta density with mean `μ` and shape parameters `(cμ/σ, c(1−μ)/σ)`.
//!
//! Masses over subintervals are computed in closed form (normal CDF
//! differences and regularized incomplete beta differences), which is what
//! makes the lowbow integral exact on piecewise-constant documents.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::special::{beta_interval, beta_pdf, ln_beta_pdf, normal_interval, normal_pdf};

/// Default lower bound on both Beta shape parameters.
pub const DEFAULT_BETA_FLOOR: f64 = 1.01;

/// Beta kernels clamp `μ` into `[BETA_MU_MIN, 1 − BETA_MU_MIN]`.
pub const BETA_MU_MIN: f64 = 1e-6;

/// Smallest grid accepted by [`kernel_complexity`].
pub const MIN_COMPLEXITY_GRID: usize = 64;

/// Step for the central differences in `μ` used by [`kernel_complexity`].
const MU_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum KernelFamily {
    #[default]
    #[serde(rename = "gaussian")]
    TruncatedGaussian,
    #[serde(rename = "beta")]
    Beta,
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelFamily::TruncatedGaussian => "gaussian",
            KernelFamily::Beta => "beta",
        })
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(KernelFamily::TruncatedGaussian),
            "beta" => Ok(KernelFamily::Beta),
            other => Err(invalid(format!("unknown kernel family {other:?}"))),
        }
    }
}

/// Kernel family and scale, without a location. `at(μ)` places it.
///
/// A Gaussian shape with `σ = ∞` is the constant kernel `K ≡ 1`, the limit
/// in which a lowbow curve collapses to the global bag of words.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelShape {
    family: KernelFamily,
    sigma: f64,
    beta_floor: f64,
}

impl KernelShape {
    pub fn new(family: KernelFamily, sigma: f64, beta_floor: f64) -> Result<Self> {
        if sigma.is_nan() || sigma <= 0.0 {
            return Err(invalid(format!(
                "kernel scale must be positive, got {sigma}"
            )));
        }
        if family == KernelFamily::Beta && sigma.is_infinite() {
            return Err(invalid("the Beta kernel needs a finite scale"));
        }
        if !(beta_floor > 1.0 && beta_floor.is_finite()) {
            return Err(invalid(format!(
                "beta floor must exceed 1, got {beta_floor}"
            )));
        }
        Ok(Self {
            family,
            sigma,
            beta_floor,
        })
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        Self::new(KernelFamily::TruncatedGaussian, sigma, DEFAULT_BETA_FLOOR)
    }

    pub fn beta(sigma: f64, beta_floor: f64) -> Result<Self> {
        Self::new(KernelFamily::Beta, sigma, beta_floor)
    }

    /// The constant kernel `K ≡ 1`.
    pub fn constant() -> Self {
        Self {
            family: KernelFamily::TruncatedGaussian,
            sigma: f64::INFINITY,
            beta_floor: DEFAULT_BETA_FLOOR,
        }
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn beta_floor(&self) -> f64 {
        self.beta_floor
    }

    pub fn is_constant(&self) -> bool {
        self.sigma.is_infinite()
    }

    /// The kernel located at `μ ∈ [0, 1]`.
    pub fn at(&self, mu: f64) -> Result<Kernel> {
        if !(0.0..=1.0).contains(&mu) {
            return Err(invalid(format!("kernel location {mu} outside [0, 1]")));
        }
        let params = if self.is_constant() {
            Params::Constant
        } else {
            match self.family {
                KernelFamily::TruncatedGaussian => Params::Gaussian {
                    norm: normal_interval(-mu / self.sigma, (1.0 - mu) / self.sigma),
                },
                KernelFamily::Beta => {
                    let (a, b) = self.beta_parameters(mu);
                    Params::Beta { a, b }
                }
            }
        };
        Ok(Kernel {
            shape: *self,
            mu,
            params,
        })
    }

    /// Shape parameters of the Beta kernel at `μ`. The multiplier `c` is 1
    /// unless that would push a parameter below the floor, in which case it
    /// is raised to the smallest value keeping both at or above the floor.
    pub fn beta_parameters(&self, mu: f64) -> (f64, f64) {
        let mu = mu.clamp(BETA_MU_MIN, 1.0 - BETA_MU_MIN);
        let nearest_edge = mu.min(1.0 - mu);
        let c = self.beta_floor * self.sigma / nearest_edge;
        if c <= 1.0 {
            return (mu / self.sigma, (1.0 - mu) / self.sigma);
        }
        // Pin the smaller parameter to the floor exactly; c·μ/σ would round.
        let far = self.beta_floor * (1.0 - nearest_edge) / nearest_edge;
        if mu <= 0.5 {
            (self.beta_floor, far)
        } else {
            (far, self.beta_floor)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Params {
    Constant,
    Gaussian { norm: f64 },
    Beta { a: f64, b: f64 },
}

/// A kernel placed at a location `μ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    shape: KernelShape,
    mu: f64,
    params: Params,
}

impl Kernel {
    pub fn shape(&self) -> &KernelShape {
        &self.shape
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `K_{μ,σ}(t)`.
    pub fn density(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(invalid(format!("kernel argument {t} outside [0, 1]")));
        }
        Ok(self.density_unchecked(t))
    }

    /// `ln K_{μ,σ}(t)`, finite wherever the density is positive even when
    /// the density itself underflows.
    pub fn ln_density(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(invalid(format!("kernel argument {t} outside [0, 1]")));
        }
        Ok(match self.params {
            Params::Constant => 0.0,
            Params::Gaussian { norm } => {
                let sigma = self.shape.sigma;
                let z = (t - self.mu) / sigma;
                -0.5 * z * z - (sigma * norm * (2.0 * std::f64::consts::PI).sqrt()).ln()
            }
            Params::Beta { a, b } => ln_beta_pdf(a, b, t),
        })
    }

    pub(crate) fn density_unchecked(&self, t: f64) -> f64 {
        match self.params {
            Params::Constant => 1.0,
            Params::Gaussian { norm } => {
                let sigma = self.shape.sigma;
                normal_pdf((t - self.mu) / sigma) / (sigma * norm)
            }
            Params::Beta { a, b } => beta_pdf(a, b, t),
        }
    }

    /// `∫_a^b K_{μ,σ}(t) dt` for `0 <= a <= b <= 1`.
    pub fn mass(&self, a: f64, b: f64) -> Result<f64> {
        if !(0.0 <= a && a <= b && b <= 1.0) {
            return Err(invalid(format!(
                "mass interval [{a}, {b}] must satisfy 0 <= a <= b <= 1"
            )));
        }
        Ok(match self.params {
            Params::Constant => b - a,
            Params::Gaussian { norm } => self.unnormalized(a, b) / norm,
            Params::Beta { .. } => self.unnormalized(a, b),
        })
    }

    fn unnormalized(&self, a: f64, b: f64) -> f64 {
        match self.params {
            Params::Constant => b - a,
            Params::Gaussian { .. } => {
                let sigma = self.shape.sigma;
                normal_interval((a - self.mu) / sigma, (b - self.mu) / sigma)
            }
            Params::Beta { a: pa, b: pb } => beta_interval(pa, pb, a, b),
        }
    }

    /// Masses of the `n` segments `[(i−1)/n, i/n]`, rescaled to sum to one.
    ///
    /// The segment masses already sum to one analytically; dividing by their
    /// computed total removes the rounding left over from the closed forms.
    pub fn segment_masses(&self, n: usize) -> Vec<f64> {
        let nf = n as f64;
        let mut masses: Vec<f64> = (0..n)
            .map(|i| self.unnormalized(i as f64 / nf, (i + 1) as f64 / nf))
            .collect();
        let total: f64 = masses.iter().sum();
        for m in &mut masses {
            *m /= total;
        }
        masses
    }
}

/// Bound on how fast a lowbow curve can move as `μ` changes: `√|V|` times
/// the integral over `t` of the Lipschitz constant of `μ ↦ K_{μ,σ}(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelComplexity {
    pub value: f64,
    /// `∫₀¹ C_K(t) dt`, before the `√|V|` factor.
    pub integral: f64,
    pub vocab_size: usize,
}

/// Estimates the kernel complexity on a `(grid + 1) × (grid + 1)` lattice of
/// locations `μ` and arguments `t`.
///
/// `C_K(t)` is the largest central-difference slope `|∂K_{μ,σ}(t)/∂μ|` over
/// the `μ` lattice, normalizer included; the `t` integral uses the
/// trapezoidal rule.
pub fn kernel_complexity(
    shape: &KernelShape,
    vocab_size: usize,
    grid: usize,
) -> Result<KernelComplexity> {
    if grid < MIN_COMPLEXITY_GRID {
        return Err(invalid(format!(
            "complexity grid must have at least {MIN_COMPLEXITY_GRID} cells, got {grid}"
        )));
    }
    if vocab_size == 0 {
        return Err(invalid("vocabulary size must be positive"));
    }
    if shape.is_constant() {
        return Ok(KernelComplexity {
            value: 0.0,
            integral: 0.0,
            vocab_size,
        });
    }
    let step = 1.0 / grid as f64;
    let stencils = (0..=grid)
        .map(|m| {
            let mu = m as f64 * step;
            let lo = (mu - MU_STEP).max(0.0);
            let hi = (mu + MU_STEP).min(1.0);
            Ok((shape.at(lo)?, shape.at(hi)?, hi - lo))
        })
        .collect::<Result<Vec<_>>>()?;
    let lipschitz: Vec<f64> = (0..=grid)
        .map(|k| {
            let t = k as f64 * step;
            stencils
                .iter()
                .map(|(lo, hi, width)| {
                    ((hi.density_unchecked(t) - lo.density_unchecked(t)) / width).abs()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let integral = step * (lipschitz.iter().sum::<f64>() - 0.5 * (lipschitz[0] + lipschitz[grid]));
    Ok(KernelComplexity {
        value: (vocab_size as f64).sqrt() * integral,
        integral,
        vocab_size,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wide_gaussian_is_nearly_flat() {
        let k = KernelShape::gaussian(1e6).unwrap().at(0.5).unwrap();
        assert!((k.density(0.1).unwrap() - 1.0).abs() < 1e-6);
        assert!((k.density(0.9).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn centred_kernels_are_symmetric() {
        let g = KernelShape::gaussian(0.13).unwrap().at(0.5).unwrap();
        let b = KernelShape::beta(0.2, DEFAULT_BETA_FLOOR)
            .unwrap()
            .at(0.5)
            .unwrap();
        for x in [0.05, 0.2, 0.31, 0.5] {
            for k in [g, b] {
                let (l, r) = (k.density(0.5 - x).unwrap(), k.density(0.5 + x).unwrap());
                assert!((l - r).abs() < 1e-12 * l.max(1.0), "{l} vs {r}");
            }
        }
    }

    #[test]
    fn mass_normalization_and_symmetry() {
        for shape in [
            KernelShape::gaussian(0.05).unwrap(),
            KernelShape::gaussian(3.0).unwrap(),
            KernelShape::beta(0.3, 1.5).unwrap(),
            KernelShape::constant(),
        ] {
            for mu in [0.0, 0.2, 0.5, 0.97, 1.0] {
                let k = shape.at(mu).unwrap();
                assert!((k.mass(0.0, 1.0).unwrap() - 1.0).abs() < 1e-9);
            }
        }
        let k = KernelShape::gaussian(0.4).unwrap().at(0.5).unwrap();
        assert!((k.mass(0.0, 0.5).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn gaussian_mass_reference_value() {
        // Adaptive quadrature of the normalized density (scipy.integrate.quad)
        // and (Φ(1) − Φ(−1)) / (Φ(2.5) − Φ(−2.5)) both give 0.69127466071960...
        let k = KernelShape::gaussian(0.2).unwrap().at(0.5).unwrap();
        assert!((k.mass(0.3, 0.7).unwrap() - 0.691_274_660_719_602_1).abs() < 1e-12);
    }

    #[test]
    fn beta_mass_reference_value() {
        // μ = 0.4, σ = 0.2 gives Beta(2, 3), whose CDF is a polynomial.
        let shape = KernelShape::beta(0.2, DEFAULT_BETA_FLOOR).unwrap();
        let (a, b) = shape.beta_parameters(0.4);
        assert!((a - 2.0).abs() < 1e-14 && (b - 3.0).abs() < 1e-14);
        let k = shape.at(0.4).unwrap();
        assert!((k.mass(0.1, 0.5).unwrap() - 0.6352).abs() < 1e-13);
    }

    #[test]
    fn beta_parameters_respect_floor() {
        let shape = KernelShape::beta(0.5, 1.2).unwrap();
        for mu in [0.0, 1e-9, 0.01, 0.3, 0.5, 0.99, 1.0] {
            let (a, b) = shape.beta_parameters(mu);
            assert!(a.min(b) >= 1.2 - 1e-12, "mu={mu}: {a}, {b}");
            let mean = a / (a + b);
            assert!((mean - mu.clamp(BETA_MU_MIN, 1.0 - BETA_MU_MIN)).abs() < 1e-12);
        }
    }

    #[test]
    fn argument_validation() {
        let shape = KernelShape::gaussian(0.2).unwrap();
        assert!(shape.at(1.5).is_err());
        let k = shape.at(0.5).unwrap();
        assert!(k.density(-0.1).is_err());
        assert!(k.mass(0.6, 0.4).is_err());
        assert!(k.mass(0.0, 1.1).is_err());
        assert!(KernelShape::gaussian(0.0).is_err());
        assert!(KernelShape::gaussian(f64::NAN).is_err());
        assert!(KernelShape::beta(0.2, 1.0).is_err());
        assert!(KernelShape::beta(f64::INFINITY, 1.1).is_err());
    }

    #[test]
    fn segment_masses_sum_to_one() {
        for sigma in [0.01, 0.2, 1e6] {
            let k = KernelShape::gaussian(sigma).unwrap().at(0.3).unwrap();
            let m = k.segment_masses(37);
            assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            assert!(m.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn complexity_of_constant_kernel_is_zero() {
        let c = kernel_complexity(&KernelShape::constant(), 10, 64).unwrap();
        assert_eq!(c.value, 0.0);
    }

    #[test]
    fn complexity_scales_with_root_vocabulary() {
        let shape = KernelShape::gaussian(0.2).unwrap();
        let a = kernel_complexity(&shape, 7, 128).unwrap();
        let b = kernel_complexity(&shape, 14, 128).unwrap();
        assert!((b.value / a.value - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn complexity_is_nonincreasing_in_scale() {
        let values: Vec<f64> = [0.1, 0.2, 0.4, 0.8]
            .iter()
            .map(|&s| {
                kernel_complexity(&KernelShape::gaussian(s).unwrap(), 5, 128)
                    .unwrap()
                    .value
            })
            .collect();
        assert!(values.windows(2).all(|w| w[1] <= w[0]), "{values:?}");
    }

    #[test]
    fn complexity_rejects_coarse_grid() {
        assert!(kernel_complexity(&KernelShape::gaussian(0.2).unwrap(), 5, 63).is_err());
    }

    #[test]
    fn family_parses() {
        assert_eq!(
            "gaussian".parse::<KernelFamily>().unwrap(),
            KernelFamily::TruncatedGaussian
        );
        assert_eq!("Beta".parse::<KernelFamily>().unwrap(), KernelFamily::Beta);
        assert!("triangle".parse::<KernelFamily>().is_err());
    }
}
