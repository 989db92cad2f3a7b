#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod cli;
pub mod error;
pub mod freq;
pub mod optics;
pub mod protocol;
pub mod source;
pub mod spin;
pub mod state;
pub mod stats;

pub use error::{Error, Result};
