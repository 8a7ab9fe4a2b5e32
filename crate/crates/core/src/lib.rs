//! Path-based lexical relation classification with an unsupervised
//! model of `P(path | w1, w2)`.
//!
//! The pipeline reads dependency-parsed text ([`corpus`]), extracts
//! dependency paths between noun pairs ([`paths`]), learns the pair-path
//! model ([`pairpath`]) and uses it to augment or enrich supervised
//! classifiers ([`classifiers`]), which are scored by [`eval`].

pub mod classifiers;
pub mod container;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod neural;
pub mod pairpath;
pub mod paths;
pub mod synthetic;

pub use error::{Error, Result};
