//! Periodic homogenization of linear elastic voxel cells.
//!
//! The guide in `book/` walks through the modules; its code blocks run as
//! doc-tests of this crate.

pub mod analysis;
pub mod cell;
pub mod cli;
pub mod discrete;
pub mod donati;
pub mod homogenize;
mod error;
pub mod material;
pub mod solver;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/cells.md")]
    mod cells {}
    #[doc = include_str!("../../../book/src/homogenization.md")]
    mod homogenization {}
    #[doc = include_str!("../../../book/src/decomposition.md")]
    mod decomposition {}
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    mod diagnostics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
