//! Concave and inverse-concave curvature speed functions, their spectral
//! calculus, the pinching quadratic form, and axisymmetric curvature flows.

pub mod error;
pub mod evolve;
pub mod matfun;
pub mod pinch;
pub mod sampling;
pub mod symfun;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/speed-functions.md")]
    mod speed_functions {}
    #[doc = include_str!("../../../book/src/spectral-calculus.md")]
    mod spectral_calculus {}
    #[doc = include_str!("../../../book/src/pinching-form.md")]
    mod pinching_form {}
    #[doc = include_str!("../../../book/src/flows.md")]
    mod flows {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
