//! Multiple-slit Loewner flows driven by `k_n sqrt(1 - t)`.
//!
//! The crate classifies a slit family by the zeros of its auxiliary function,
//! builds the Koenigs map that linearizes the flow, evaluates and traces the
//! flow, and reports the geometry of the slit tips.

pub mod config;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod koenigs;
pub mod numerics;
pub mod ode;
pub mod pfunc;
pub mod roots;

pub use config::{SlitFamily, DEFAULT_TRUNCATION};
pub use error::{Error, Result};
pub use pfunc::AuxiliaryFunction;
