//! Exact non-archimedean measure theory at locally constant scale.
//!
//! Measures take values in `Q ⊂ Q_p` (or in `Q^n`, `Mat_n(Q)`) and live on
//! the ring of clopen subsets of a compact ball `r^(-m0)·Z_r`. Everything is
//! computed with exact rationals; norms are integer exponents and character
//! values are elements of exact cyclotomic fields.

pub mod clopen;
pub mod error;
pub mod linalg;
pub mod measures;
pub mod operators;
pub mod padic;
pub mod selftest;
pub mod spectral;
pub mod stochastic;

pub use error::{Error, Result};
pub use padic::{Cyclotomic, FracClass, Rational, UltraNorm};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/arithmetic.md")]
    mod arithmetic {}
    #[doc = include_str!("../../../book/src/clopen-sets.md")]
    mod clopen_sets {}
    #[doc = include_str!("../../../book/src/measures.md")]
    mod measures {}
    #[doc = include_str!("../../../book/src/operators.md")]
    mod operators {}
    #[doc = include_str!("../../../book/src/stochastic.md")]
    mod stochastic {}
    #[doc = include_str!("../../../book/src/spectral.md")]
    mod spectral {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
