//! Symbolic structures over pluggable decidable base theories, decision
//! procedures for linear integer arithmetic and a regular theory of strings,
//! order-extended fragments of first-order logic, and constructive
//! symbolic-model builders — an end-to-end satisfiability and counter-model
//! pipeline.

pub mod error;
pub mod fol;
pub mod re;
pub mod sexpr;

pub mod finite;
pub mod lia;
pub mod strings;
pub mod theory;

pub mod construct;
pub mod decide;
pub mod fragments;
pub mod symbolic;

pub use error::{Error, Result};
