//! Operator-class laboratory for dense complex matrices.
//!
//! The crate decides membership of a square complex matrix in the classical
//! hierarchy of non-normal operator classes (quasinormal, hyponormal,
//! p-hyponormal, class A, paranormal, k-paranormal, absolute-k-paranormal,
//! k-quasi-paranormal, normaloid), computes the structural splittings that go
//! with the n-th root problem for normal matrices, and runs randomized
//! property suites over seeded instance generators.
//!
//! The main entry points are:
//!
//! * [`linalg`]: the dense kernel ([`ComplexMatrix`], Hermitian eigensolver,
//!   fractional powers, subspace algebra).
//! * [`classes`]: membership predicates backed by two independent oracles
//!   (pencil positivity and unit-sphere defect minimization).
//! * [`decomposition`]: normal/pure split, normal/nilpotent split of roots of
//!   normal matrices, and the index-2 nilpotent canonical form.
//! * [`generators`]: seeded constructors for class members and
//!   counterexamples.
//! * [`harness`]: theorem suites producing [`harness::TheoremReport`]s.
//! * [`cli`]: the command-line front end used by the `opclass` binary.

pub mod classes;
pub mod cli;
pub mod decomposition;
pub mod generators;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod rng;

pub use classes::{Classifier, MembershipVerdict, OperatorClass, Oracle, Status};
pub use linalg::{ComplexMatrix, Subspace, TolerancePolicy, C64};

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has dimension zero")]
    EmptyMatrix,
    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },
    #[error("matrix is not positive semidefinite (least eigenvalue {least:.3e})")]
    NotPsd { least: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operation requires a nonzero subspace")]
    EmptySubspace,
    #[error("numerical rank is ambiguous near the cutoff (values {values:?})")]
    AmbiguousRank { values: Vec<f64> },
    #[error("invalid pencil: {0}")]
    InvalidPencil(String),
    #[error("oracles disagree for {class}: pencil defect {pencil:.3e}, sphere defect {sphere:.3e}")]
    OracleDisagreement {
        class: String,
        pencil: f64,
        sphere: f64,
    },
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("spectral projection does not commute with the operator (residual {residual:.3e})")]
    NonCommutingProjection { residual: f64 },
    #[error("matrix is not nilpotent of index at most 2 (residual {residual:.3e})")]
    NotNilpotentIndex2 { residual: f64 },
    #[error("operator is zero")]
    ZeroOperator,
    #[error("invalid Radjavi-Rosenthal blocks: {0}")]
    InvalidRrForm(String),
    #[error("invalid nilpotent index {index} for dimension {dim}")]
    InvalidIndex { index: usize, dim: usize },
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("integers {m} and {n} are not coprime")]
    NonCoprime { m: usize, n: usize },
    #[error("unknown theorem id `{0}`")]
    UnknownTheorem(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
