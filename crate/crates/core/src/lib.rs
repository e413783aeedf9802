//! Bidirected cut relaxation (Forest-BCR) for Steiner Forest.
//!
//! Exact verification of primal and dual solutions, the recursive
//! densest-subgraph contraction rounding, the reorientation of single-component
//! solutions into Tree-BCR solutions, an exact cutting-plane LP solver for small
//! instances, and generators for the certified instance families.

pub mod corpus;
pub mod density;
pub mod flow;
pub mod forest;
pub mod generators;
pub mod lp;
pub mod model;
pub mod rational;
pub mod rounding;
pub mod solution;
pub mod steiner;
pub mod structuring;

pub use model::{Arc, Instance, Pair, VertexId};
pub use rational::Rational;
