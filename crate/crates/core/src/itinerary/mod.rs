//! Itineraries: regular languages over the edge alphabet of a world graph.
//!
//! An itinerary can be written as an expression (see [`parse_itinerary`] for
//! the grammar) or given directly as a DFA file. Either way it compiles to a
//! total, minimized [`ItineraryDfa`] whose alphabet is exactly the edge set
//! of the owning world graph.

mod compile;
mod dfa;
mod expr;
mod parse;

pub use compile::{compile, walks_dfa};
pub use dfa::{DfaFile, ItineraryDfa, TransitionRecord};
pub use expr::ItineraryExpr;
pub use parse::parse_itinerary;

use thiserror::Error;

/// Errors raised while parsing or compiling itineraries.
#[derive(Debug, Error)]
pub enum ItineraryError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown edge id `{0}`")]
    UnknownEdgeId(String),
    #[error("operands are over different edge alphabets")]
    AlphabetMismatch,
    #[error("unknown DFA state `{0}`")]
    UnknownState(String),
    #[error("conflicting transitions from `{from}` on edge `{edge}`")]
    ConflictingTransition { from: String, edge: String },
    #[error("malformed DFA file: {0}")]
    Format(#[from] serde_json::Error),
}
