//! Combinatorial models of Hamiltonian circle actions on symplectic four-manifolds.

pub mod cohomology;
pub mod error;
pub mod finiteness;
pub mod graph_model;
pub mod linalg;
pub mod localization;
pub mod morphisms;
pub mod reconstruct;
pub mod rational;
pub mod surgery;

pub use cohomology::{CohClass2, Gen};
pub use error::{Error, Result};
pub use graph_model::{Chain, DullGraph, Edge, ExtendedGraph, Extreme, FixedComponent};
pub use rational::Q;
