#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod cli;
pub mod entropy;
pub mod error;
pub mod kernels;
pub mod model;
pub mod numerics;
pub mod phase_space;

pub use error::{Error, Result};
