// NaN must fail range checks, so they are written as negated comparisons.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod interaction;
pub mod kernels;
pub mod laplace;
pub mod noise;
pub mod output;
pub mod quadrature;
pub mod scenario;
pub mod verify;

pub use error::{Error, Result};
