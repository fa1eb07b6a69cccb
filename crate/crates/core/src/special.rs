//! Interval probabilities for the standard normal and Beta distributions.
//!
//! Both are computed so that narrow intervals in either tail keep their
//! relative accuracy: differences are taken between the smaller of the two
//! complementary tail probabilities.

use libm::{erf, erfc, lgamma};

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub fn normal_pdf(z: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * z * z).exp()
}

/// `P(lo < Z < hi)` for a standard normal `Z`, `lo <= hi`.
pub fn normal_interval(lo: f64, hi: f64) -> f64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    // erfc keeps relative accuracy in the tails, erf near the center.
    let p = if lo * s >= 0.5 {
        0.5 * (erfc(lo * s) - erfc(hi * s))
    } else if -hi * s >= 0.5 {
        0.5 * (erfc(-hi * s) - erfc(-lo * s))
    } else {
        0.5 * (erf(hi * s) - erf(lo * s))
    };
    p.max(0.0)
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    lgamma(a) + lgamma(b) - lgamma(a + b)
}

/// Beta(a, b) density at `x` in `[0, 1]`.
pub fn beta_pdf(a: f64, b: f64, x: f64) -> f64 {
    ln_beta_pdf(a, b, x).exp()
}

pub fn ln_beta_pdf(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        let edge = if x <= 0.0 { a } else { b };
        return if edge < 1.0 {
            f64::INFINITY
        } else if edge == 1.0 {
            -ln_beta(a, b)
        } else {
            f64::NEG_INFINITY
        };
    }
    (a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_beta(a, b)
}

const CF_MAX_ITER: usize = 100_000;
const CF_EPS: f64 = 1e-16;
const CF_TINY: f64 = 1e-300;

/// Regularized incomplete beta `I_x(a, b)` together with its complement
/// `1 − I_x(a, b)`. Whichever of the two is smaller is evaluated directly by
/// the continued fraction, the other by subtraction.
pub fn incomplete_beta(a: f64, b: f64, x: f64) -> (f64, f64) {
    debug_assert!(a > 0.0 && b > 0.0);
    if x <= 0.0 {
        return (0.0, 1.0);
    }
    if x >= 1.0 {
        return (1.0, 0.0);
    }
    let ln_front = a * x.ln() + b * (-x).ln_1p() - ln_beta(a, b);
    if x < (a + 1.0) / (a + b + 2.0) {
        let lower = (ln_front.exp() * continued_fraction(a, b, x) / a).min(1.0);
        (lower, 1.0 - lower)
    } else {
        let upper = (ln_front.exp() * continued_fraction(b, a, 1.0 - x) / b).min(1.0);
        (1.0 - upper, upper)
    }
}

/// `I_hi(a, b) − I_lo(a, b)` for `lo <= hi`.
pub fn beta_interval(a: f64, b: f64, lo: f64, hi: f64) -> f64 {
    let mean = a / (a + b);
    let (lo_lower, lo_upper) = incomplete_beta(a, b, lo);
    let (hi_lower, hi_upper) = incomplete_beta(a, b, hi);
    let p = if hi <= mean {
        hi_lower - lo_lower
    } else if lo >= mean {
        lo_upper - hi_upper
    } else {
        1.0 - lo_lower - hi_upper
    };
    p.max(0.0)
}

// Modified Lentz evaluation of the incomplete beta continued fraction.
fn continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < CF_TINY {
        d = CF_TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() <= CF_EPS {
            break;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_interval_reference_values() {
        // Φ(1) − Φ(−1)
        assert!((normal_interval(-1.0, 1.0) - 0.682_689_492_137_085_9).abs() < 1e-15);
        assert!((normal_interval(0.0, f64::INFINITY) - 0.5).abs() < 1e-16);
        // Upper tail: Φ(−9) − Φ(−10) ≈ 1.1285122e-19, keeps relative accuracy
        let tail = normal_interval(9.0, 10.0);
        assert!((tail / 1.128_512_207_423_599e-19 - 1.0).abs() < 1e-9);
        assert_eq!(normal_interval(-10.0, -9.0), tail);
    }

    #[test]
    fn normal_interval_tiny_width_near_center() {
        let w = 1e-7;
        let exact = w * FRAC_1_SQRT_2PI;
        assert!((normal_interval(0.0, w) / exact - 1.0).abs() < 1e-12);
    }

    #[test]
    fn incomplete_beta_reference_values() {
        // scipy.stats.beta.cdf(0.3, 2.5, 7.25), beta.sf(0.9, 50, 3)
        let (lo, _) = incomplete_beta(2.5, 7.25, 0.3);
        assert!((lo - 0.660_482_273_581_907_1).abs() < 1e-13);
        let (_, up) = incomplete_beta(50.0, 3.0, 0.9);
        assert!((up - 0.903_366_714_862_747_8).abs() < 1e-13);
        let (l, u) = incomplete_beta(1.0, 1.0, 0.37);
        assert!((l - 0.37).abs() < 1e-15 && (u - 0.63).abs() < 1e-15);
    }

    #[test]
    fn beta_interval_polynomial_case() {
        // Beta(2, 3) has a polynomial CDF: mass on [0.1, 0.5] is 0.6352.
        assert!((beta_interval(2.0, 3.0, 0.1, 0.5) - 0.6352).abs() < 1e-14);
        assert!((beta_interval(2.0, 3.0, 0.0, 1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn incomplete_beta_converges_for_lopsided_parameters() {
        let (a, b) = (1.01, 1.01e6);
        let (l, u) = incomplete_beta(a, b, 1e-5);
        assert!(l > 0.0 && l < 1.0 && (l + u - 1.0).abs() < 1e-15);
        assert!((beta_interval(a, b, 0.0, 1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn beta_pdf_edges() {
        assert_eq!(beta_pdf(2.0, 2.0, 0.0), 0.0);
        assert!((beta_pdf(1.0, 1.0, 0.0) - 1.0).abs() < 1e-14);
        assert!((beta_pdf(2.0, 2.0, 0.5) - 1.5).abs() < 1e-14);
    }
}
