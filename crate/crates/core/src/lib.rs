//! Arithmetic and statistics over F_q[x], with experiments that compare
//! exhaustive or sampled counts against random-matrix predictions.

pub mod arith;
pub mod dirichlet;
pub mod ensembles;
pub mod error;
pub mod experiments;
pub mod factor;
pub mod field;
pub mod poly;
pub mod rmt;
pub mod roots;
pub mod sieve;

pub use error::{Error, Result};
pub use field::FieldCtx;
pub use poly::Poly;
