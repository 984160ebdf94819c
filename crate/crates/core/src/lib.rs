#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::excessive_precision,
    clippy::needless_range_loop
)]

pub mod analysis;
pub mod chain;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod kernels;
pub mod oracles;
pub mod specfun;

pub use error::{Error, Result};
