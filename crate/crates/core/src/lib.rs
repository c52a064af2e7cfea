//! Algebraic Monte-Carlo solver for perfect matchings and f-factors with
//! lower bounds on edge classes.
//!
//! The [`dominating`] module decides and constructs dominating matchings by
//! evaluating finite-difference sums of Pfaffians over a prime field. The
//! [`reductions`] module maps dominating f-factors (through the Tutte gadget),
//! partition adjacency matrix realization and exact matching onto it, and
//! [`oracle`] supplies brute-force ground truth for small inputs.

pub mod dominating;
pub mod error;
pub mod field;
pub mod graph;
pub mod oracle;
pub mod pfaffian;
pub mod reductions;

pub use dominating::{construct, decide, ConstructOutcome, Construction, DecisionReport, FailureBound, SolverOptions};
pub use error::{Error, Result};
pub use field::{FieldElement, PrimeModulus};
pub use graph::{
    DominatingMatchingInstance, EdgeClassAssignment, FFactorInstance, FactorSubgraph, Graph, Matching, PamInstance,
};
pub use reductions::{ReducedDecision, ReducedSolution, Refutation};
