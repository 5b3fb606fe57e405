//! Trivariate maximum-entropy partial information decomposition (PID).
//!
//! The library decomposes the mutual information that three discrete
//! sources carry about a target into synergistic, unique, redundant-unique
//! and shared components, by minimizing mutual information over polytopes
//! of distributions with pinned target-source marginals. Each minimization
//! is an exponential-cone program; the finer redundancy-lattice atoms are
//! recovered through a hierarchy of bivariate decompositions on grouped
//! subsystems.

pub mod bivariate;
pub mod cli;
pub mod dist;
pub mod finer;
pub mod info;
pub mod lattice;
pub mod pipeline;
pub mod solver;

pub use bivariate::{broja, BivariatePid};
pub use dist::{gate, random_simplex, Gate, JointDistribution, Marginal, MarginalSpec, Symbol};
pub use finer::{consistency_report, fine_decompose, FineAtoms};
pub use lattice::Collection;
pub use pipeline::{pid, qp_repair, run_modes, PidResult, Violation};
pub use solver::{
    build_program, marginal_violations, solve, violations, ConeProgram, SolveReport, SolveStatus,
    Tolerances,
};

/// Errors surfaced by distribution construction, program building and the
/// decomposition pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("NegativeMass: tuple {0} has negative probability")]
    NegativeMass(String),
    #[error("DuplicateTuple: tuple {0} appears more than once")]
    DuplicateTuple(String),
    #[error("EmptyInput: no entries supplied")]
    EmptyInput,
    #[error("MassNotNormalizable: total probability mass is zero")]
    MassNotNormalizable,
    #[error("BadIndex: variable index {0} out of range")]
    BadIndex(usize),
    #[error("OverlappingParts: a part appears twice in the partition")]
    OverlappingParts,
    #[error("EmptyPart: partition contains an empty part")]
    EmptyPart,
    #[error("UnknownGate: no gate named '{0}'")]
    UnknownGate(String),
    #[error("BadSize: alphabet size {0} is too small (need >= 2)")]
    BadSize(usize),
    #[error("InfeasibleSpec: pinned marginals admit no joint distribution")]
    InfeasibleSpec,
    #[error("ArityMismatch: expected {expected} sources, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("SolverFailed: {0}")]
    SolverFailed(String),
    #[error("BadLevel: output level {0} not in 0..=3")]
    BadLevel(u8),
    #[error("UnsupportedArity: {0} sources not supported here")]
    UnsupportedArity(usize),
    #[error("MissingAtom: no value for lattice atom {0}")]
    MissingAtom(String),
    #[error("BadTolerances: {0}")]
    BadTolerances(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
