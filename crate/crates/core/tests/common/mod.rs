//! Reference implementations that share no numerics with the library.

#![allow(dead_code)]

use lowbow::corpus::WordSequence;
use lowbow::kernels::{KernelFamily, KernelShape};
use proptest::prelude::*;

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rule(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = rule(fa, flm, fm, m - a);
        let right = rule(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    if b <= a {
        return 0.0;
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    recurse(f, a, b, fa, fm, fb, rule(fa, fm, fb, b - a), tol, 48)
}

/// Kernel density on `[0, 1]` up to its normalizing constant.
pub fn unnormalized_density(shape: &KernelShape, mu: f64) -> impl Fn(f64) -> f64 {
    let sigma = shape.sigma();
    let family = shape.family();
    let (a, b) = if family == KernelFamily::Beta {
        shape.beta_parameters(mu)
    } else {
        (0.0, 0.0)
    };
    move |t: f64| {
        if sigma.is_infinite() {
            1.0
        } else if family == KernelFamily::TruncatedGaussian {
            let z = (t - mu) / sigma;
            (-0.5 * z * z).exp()
        } else {
            t.powf(a - 1.0) * (1.0 - t).powf(b - 1.0)
        }
    }
}

/// Kernel mass over `[lo, hi]` by quadrature, splitting at the mode so the
/// peak is never straddled.
pub fn quadrature_mass(shape: &KernelShape, mu: f64, lo: f64, hi: f64) -> f64 {
    let f = unnormalized_density(shape, mu);
    let integrate = |a: f64, b: f64| {
        if a <= mu && mu <= b {
            simpson(&f, a, mu, 1e-15) + simpson(&f, mu, b, 1e-15)
        } else {
            simpson(&f, a, b, 1e-15)
        }
    };
    integrate(lo, hi) / integrate(0.0, 1.0)
}

/// Local histogram at `mu` by integrating each word segment separately.
pub fn quadrature_lowbow(
    y: &[usize],
    mu: f64,
    shape: &KernelShape,
    c: f64,
    vocab_size: usize,
) -> Vec<f64> {
    let n = y.len() as f64;
    let denom = 1.0 + c * vocab_size as f64;
    let mut coords = vec![c / denom; vocab_size];
    for (i, &word) in y.iter().enumerate() {
        let mass = quadrature_mass(shape, mu, i as f64 / n, (i + 1) as f64 / n);
        coords[word - 1] += mass / denom;
    }
    coords
}

/// `(count_j + N c) / (N (1 + c |V|))`, straight from the counts.
pub fn counted_bow(y: &[usize], c: f64, vocab_size: usize) -> Vec<f64> {
    let n = y.len() as f64;
    let mut counts = vec![0.0; vocab_size];
    for &w in y {
        counts[w - 1] += 1.0;
    }
    counts
        .iter()
        .map(|k| (k + n * c) / (n * (1.0 + c * vocab_size as f64)))
        .collect()
}

/// A random document over a random vocabulary of size 2..=`max_vocab`.
pub fn document(max_len: usize, max_vocab: usize) -> impl Strategy<Value = (Vec<usize>, usize)> {
    (2..=max_vocab).prop_flat_map(move |v| (prop::collection::vec(1..=v, 1..=max_len), Just(v)))
}

pub fn sequence(y: &[usize]) -> WordSequence {
    WordSequence::new(y.to_vec()).unwrap()
}

pub fn kernel_shape() -> impl Strategy<Value = KernelShape> {
    prop_oneof![
        (0.05f64..1.0).prop_map(|s| KernelShape::gaussian(s).unwrap()),
        (0.05f64..0.5).prop_map(|s| KernelShape::beta(s, 1.01).unwrap()),
    ]
}
