//! Discrete graphical models: factors, factor graphs, Forney-style graphs and
//! the generators for the experimental model families.

mod factor;
mod forney;
mod generators;
mod graph;
mod ising;

use std::fmt;

use thiserror::Error;

pub use factor::Factor;
pub use forney::{to_forney, validate_forney, CopyMap, ForneyGraph};
pub use generators::{gen_forney_3regular, gen_ising_grid, gen_symmetric_forney, IsingGrid};
pub use graph::FactorGraph;
pub use ising::ising_to_forney;

/// Dense index of a variable within one model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

/// Dense index of a factor within one model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FactorId(pub usize);

impl VarId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl FactorId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

impl fmt::Display for FactorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "f{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("factor table has {got} entries, scope cardinalities require {expected}")]
    TableLength { expected: usize, got: usize },
    #[error("factor scope lists {0} more than once")]
    DuplicateScopeVariable(VarId),
    #[error("scope and cardinality lists differ in length ({scope} vs {cards})")]
    ScopeCardMismatch { scope: usize, cards: usize },
    #[error("factor {factor} refers to {var}, but the model has {num_vars} variables")]
    UnknownVariable {
        factor: FactorId,
        var: VarId,
        num_vars: usize,
    },
    #[error("factor {factor} gives {var} cardinality {got}, model declares {expected}")]
    CardinalityMismatch {
        factor: FactorId,
        var: VarId,
        expected: usize,
        got: usize,
    },
    #[error("cardinality of {0} must be at least 1")]
    ZeroCardinality(VarId),
    #[error("{0} does not appear in any factor")]
    IsolatedVariable(VarId),
    #[error("invalid factor value at index {index}: {reason}")]
    InvalidValue { index: usize, reason: &'static str },
    #[error("table over {0:?} exceeds the dense size limit")]
    TableTooLarge(Vec<usize>),
    #[error("not a Forney-style graph: {}", format_degrees(.0))]
    DegreeViolation(Vec<(VarId, usize)>),
    #[error("model is not a {rows}x{cols} Ising grid: {reason}")]
    NotAGrid {
        rows: usize,
        cols: usize,
        reason: String,
    },
    #[error("3-regular Forney generator needs an even factor count of at least 4, got {0}")]
    OddFactorCount(usize),
    #[error("invalid generator parameter: {0}")]
    InvalidParameter(String),
}

fn format_degrees(list: &[(VarId, usize)]) -> String {
    list.iter()
        .map(|(v, d)| format!("{v} has degree {d}"))
        .collect::<Vec<_>>()
        .join(", ")
}
