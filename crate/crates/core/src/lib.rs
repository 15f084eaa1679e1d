//! Graph Laplacians on metric measure spaces: empirical operators, their
//! spectra and Nyström extensions, closed-form and quadrature references, and
//! the convergence-rate machinery around them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod empirical;
pub mod error;
pub mod io;
pub mod kernel;
pub mod matrix;
mod quadrature;
pub mod rates;
pub mod reference;
pub mod rng;
pub mod space;
pub mod spectral;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/spaces-and-kernels.md")]
    mod spaces_and_kernels {}
    #[doc = include_str!("../../../book/src/empirical-operators.md")]
    mod empirical_operators {}
    #[doc = include_str!("../../../book/src/spectra.md")]
    mod spectra {}
    #[doc = include_str!("../../../book/src/reference.md")]
    mod reference {}
    #[doc = include_str!("../../../book/src/rates.md")]
    mod rates {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
