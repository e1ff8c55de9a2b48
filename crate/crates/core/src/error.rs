use thiserror::Error;

use crate::triangulation::{EdgeId, Slot};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("triangulation has no triangles")]
    Empty,
    #[error("side slot {0} is not glued to anything")]
    DanglingSlot(Slot),
    #[error("self-paired slot {0}")]
    SelfPairedSlot(Slot),
    #[error("side slot {0} is glued more than once")]
    DoubleGlued(Slot),
    #[error("side slot {0} is out of range")]
    SlotOutOfRange(Slot),
    #[error("Euler characteristic {0} is not negative")]
    NonNegativeEuler(i64),
    #[error("surface is disconnected ({0} components)")]
    Disconnected(usize),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("duplicate edge name `{0}`")]
    DuplicateEdgeName(String),
    #[error("edge {0} is not flippable: both sides lie in one triangle")]
    NotFlippable(EdgeId),
    #[error("step {step}: {source}")]
    PathStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("relation word has {got} flips, a {kind} word needs {expected}")]
    RelationShape {
        kind: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("expected {expected} values, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("missing weight for edge `{0}`")]
    MissingWeight(String),
    #[error("weights around triangle {0} have odd sum")]
    ParityFailure(usize),
    #[error("negative corner count at corner {corner} of triangle {triangle}")]
    NegativeCornerCount { triangle: usize, corner: usize },
    #[error("component {0} is parallel to a puncture")]
    PunctureParallel(usize),
    #[error("components {0} and {1} are isotopic")]
    DuplicateComponent(usize, usize),
    #[error("curves intersect: their union is not a normal multicurve")]
    CurvesIntersect,
    #[error("expected a single simple closed curve, got {0} components")]
    NotSimple(usize),
    #[error("curve is empty")]
    EmptyCurve,
    #[error("coordinate for edge `{0}` is not positive")]
    NonPositive(String),
    #[error("coordinate for edge `{0}` has no rational square root")]
    NoRationalRoot(String),
    #[error("shear product around puncture {0} is not 1")]
    NotCusped(usize),
    #[error("relabeling does not commute with gluing")]
    InvalidRelabeling,
    #[error("no isomorphism with the required edge correspondence")]
    NoIsomorphism,
    #[error("triangulations do not match: {0}")]
    Mismatch(String),
    #[error("family does not converge: {0}")]
    Convergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
