#![allow(clippy::needless_range_loop)]

pub mod algebra;
pub mod config;
pub mod couplings;
pub mod doubles;
pub mod error;
pub mod functionals;
pub mod linalg;
pub mod models;
pub mod par;
pub mod props;
pub mod rp;

pub use error::{Error, Result};
