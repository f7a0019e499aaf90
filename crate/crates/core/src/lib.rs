#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod fountain;
pub mod lattice;
pub mod nonlinearity;
pub mod solver;

pub use error::{Error, Result};
