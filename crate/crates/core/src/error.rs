use thiserror::Error;

use crate::poly::InterpError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid query: {0}")]
    InvalidQuery(String),

    /// Curves with `a = 0` have rational invariants and are not counted here.
    #[error("a = 0 is excluded: bidegree (0,b) invariants are rational (1/b) and fall outside the integer-valued count")]
    ZeroA,

    #[error("inconsistent multiplicity data: {0}")]
    Inconsistent(String),

    #[error("{kind} budget exceeded: limit {limit}, reached {reached}")]
    BudgetExceeded {
        kind: BudgetKind,
        limit: u64,
        reached: u64,
    },

    #[error("point is not in the lattice: {0}")]
    NotInLattice(String),

    #[error("point lies on the wall {0}")]
    OnWall(String),

    #[error("unknown vertex {0}")]
    UnknownVertex(String),

    #[error("flow polytope is unbounded; directed cycle through edges {ray:?}")]
    Unbounded { ray: Vec<usize> },

    #[error("vector configuration is not pointed (no certificate found)")]
    NotPointed,

    #[error("sampling found {found} lattice points, {needed} needed")]
    Sampling { found: usize, needed: usize },

    #[error(transparent)]
    Interpolation(#[from] InterpError),

    #[error("held-out point {point:?} disagrees: fitted {fitted}, computed {computed}")]
    HoldoutMismatch {
        point: Vec<i64>,
        fitted: String,
        computed: String,
    },

    #[error("integer overflow in exact count")]
    Overflow,

    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetKind {
    Templates,
    LatticePoints,
}

impl std::fmt::Display for BudgetKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BudgetKind::Templates => f.write_str("template"),
            BudgetKind::LatticePoints => f.write_str("lattice-point"),
        }
    }
}
