//! Automatic prover for functional specifications of kernel data structures.
//!
//! Pipeline: [`parser`] → [`check`] → [`normalize`] → [`instantiate`] →
//! [`smt`]. [`prover`] drives a query through all of it.

pub mod atoms;
pub mod check;
pub mod error;
#[cfg(any(test, feature = "oracle"))]
pub mod eval;
pub mod instantiate;
pub mod lexer;
pub mod linear;
pub mod normalize;
pub mod parser;
pub mod printer;
pub mod prover;
pub mod report;
pub mod smt;
pub mod syntax;
pub mod term;
pub mod types;

pub use error::{Error, Result};
