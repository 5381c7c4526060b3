// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod closed_form;
pub mod error;
pub mod flow;
pub mod potentials;
pub mod quadrature;
pub mod special_fns;
pub mod verify;

pub use error::{Error, Result};
