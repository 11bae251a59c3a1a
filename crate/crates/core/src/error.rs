use crate::simplicial::{ProcessId, Vertex};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("color {} is not present in the simplex", (.0).0)]
    ColorAbsent(ProcessId),

    #[error("duplicate color {} with conflicting values", (.0).0)]
    DuplicateColor(ProcessId),

    #[error("complexes are colored by different process sets ({lhs} vs {rhs} processes)")]
    ColorMismatch { lhs: usize, rhs: usize },

    #[error("facet {0} does not carry every color of the ambient process set")]
    NotSystemFacet(String),

    #[error("vertex map has no image for {0}")]
    PartialVertexMap(Box<Vertex>),

    #[error("process group must be nonempty")]
    EmptyGroup,

    #[error("variable {0} is not bound by an enclosing fixpoint or the interpretation")]
    UnboundVariable(String),

    #[error("fixpoint variable {0} shadows an enclosing binding of the same name")]
    ShadowedVariable(String),

    #[error("state is not one of the model's facets")]
    StateNotInModel,

    #[error("formula is not propositional (contains a variable, knowledge, or fixpoint operator)")]
    NotPropositional,

    #[error("fixpoint iteration exceeded the cap of {cap} rounds; the evaluator is not decreasing")]
    FixpointCap { cap: usize },

    #[error("syntax error at offset {pos}: {message}")]
    FormulaSyntax { pos: usize, message: String },

    #[error("malformed ordered set partition: {0}")]
    MalformedPartition(String),

    #[error("flip is undefined: the distinguished process is alone in the last block")]
    UndefinedFlip,

    #[error("expected a facet with {expected} rounds of history, got {got}")]
    WrongRoundCount { expected: usize, got: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("model would have {count} states, above the limit of {limit}")]
    StateLimit { count: usize, limit: usize },

    #[error("search exhausted its node budget after {explored} nodes ({assigned} of {vars} choices made on the deepest branch)")]
    SearchBudget {
        explored: u64,
        assigned: usize,
        vars: usize,
    },

    #[error("assignment has no decision for color {} on one of its views", (.0).0)]
    PartialAssignment(ProcessId),

    #[error("map is not a morphism between the given models")]
    UnverifiedMorphism,

    #[error("coloring is not a Sperner coloring: vertex of color {} is colored outside its carrier", (.0).0)]
    NonSpernerColoring(ProcessId),

    #[error("invalid model: {0}")]
    InvalidModel(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
