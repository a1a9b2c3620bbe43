//! Desk-scale simulation of reducibilities between sets of naturals under
//! imperfect oracles: partial, delayed, or wrong on a small set of bits.
//!
//! Sequences are lazy bit streams ([`sequences::BitSequence`]); oracles expose
//! them with holes and delays ([`oracles::PartialOracle`]); functionals are
//! deterministic state machines run under a tick budget ([`machine::run`]).
//! [`checkers`] turn a functional and a pair of sequences into a verdict for
//! each reducibility.

pub mod checkers;
pub mod codings;
pub mod deduction;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod machine;
pub mod oracles;
pub mod ratio;
pub mod rng;
pub mod sequences;
pub mod term;
pub mod transformers;

pub use error::{Error, Result};
