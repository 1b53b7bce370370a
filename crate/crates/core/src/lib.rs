//! Rescaled Gaussian process priors on [0, 1].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod inference;
pub mod linalg;
pub mod processes;
pub mod quad;
pub mod rkhs;
pub mod rng;
pub mod smallball;

pub use error::{Error, Result};
