//! Exact sensor selection for validating movement itineraries.
//!
//! Given a world graph (an edge-labeled directed multigraph whose edges carry
//! sensor events) and an itinerary (a regular language of edge transitions),
//! this crate decides which sensor subsets can certify conformance to the
//! itinerary from observation sequences alone, and computes minimum-size
//! certifying selections two independent ways:
//!
//! * a branch-and-bound search over sensor subsets backed by the polynomial
//!   fixed-point certification check ([`certify`], [`search`]), and
//! * a 0-1 integer linear program over the world-itinerary product
//!   ([`ilp`]), solvable in-process by constraint propagation or exported in
//!   LP format for an external solver.
//!
//! [`generators`] provides a set-cover reduction gadget (the problem is
//! NP-hard) and seeded random instances for cross-validation.

pub mod certify;
pub mod generators;
pub mod ilp;
pub mod itinerary;
pub mod product;
pub mod search;
pub mod world;

pub use certify::{
    classify_stream, compute_relation, is_certifying, CertificationResult, Certifier,
    PairRelation, StreamVerdict,
};
pub use itinerary::{compile, parse_itinerary, ItineraryDfa, ItineraryExpr};
pub use product::ProductAutomaton;
pub use search::{brute_force_min, solve_exact, SolveOptions, SolveResult, SolveStatus};
pub use world::{ObservationSequence, SensorSelection, WorldGraph};
