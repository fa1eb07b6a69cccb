//! Locally weighted bag-of-words curves.
//!
//! A document of `N` words over a vocabulary of size `V` becomes a smooth
//! curve in the probability simplex: at each location `μ ∈ [0, 1]` the curve
//! holds a histogram of the words near relative position `μ`, weighted by a
//! kernel centered there. Wide kernels collapse the curve to the ordinary
//! bag of words; narrow ones follow the local topic of the text.
//!
//! ```
//! use lowbow::corpus::WordSequence;
//! use lowbow::lowbow::{lowbow_curve, LowbowParams};
//!
//! let y = WordSequence::new(vec![1, 1, 1, 2, 2, 2]).unwrap();
//! let curve = lowbow_curve(&y, 3, &LowbowParams::gaussian(0.1, 0.005).unwrap(), 2).unwrap();
//! let start = curve.points()[0].coords()[0];
//! let end = curve.points()[2].coords()[0];
//! assert!(start > 0.9 && end < 0.1);
//! ```

pub mod classify;
pub mod corpus;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod lowbow;
pub mod special;

pub use error::{Error, Result};

// The guide's and README's code samples run as doctests, one module per
// chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/simplex.md")]
    mod simplex {}
    #[doc = include_str!("../../../book/src/kernels.md")]
    mod kernels {}
    #[doc = include_str!("../../../book/src/curves.md")]
    mod curves {}
    #[doc = include_str!("../../../book/src/features.md")]
    mod features {}
    #[doc = include_str!("../../../book/src/classification.md")]
    mod classification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
