//! Simplicial models for distributed computing, an epistemic mu-calculus
//! over them, and solvability checks for set agreement against iterated
//! immediate-snapshot protocols.
//!
//! The pieces fit together like this: [`simplicial`] has the chromatic
//! complexes, [`subdivision`] iterates the standard chromatic subdivision
//! (one immediate-snapshot round per step), [`models`] builds the task and
//! protocol models whose states are facets, [`logic`] parses and evaluates
//! formulas on those models, [`formulas`] generates the agreement formula
//! families, and [`solvability`] searches for decision morphisms and runs
//! the combinatorial obstruction arguments.

pub mod error;
pub mod formulas;
pub mod logic;
pub mod models;
pub mod simplicial;
pub mod solvability;
pub mod subdivision;

pub use error::{Error, Result};
pub use logic::model::{Interpretation, SimplicialModel, StateId, StateSet};
pub use logic::{AtomicProp, Formula};
pub use simplicial::{Complex, ProcessId, Simplex, Value, Vertex};
pub use subdivision::{OrderedSetPartition, SubdividedFacet};
