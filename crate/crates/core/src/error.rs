use thiserror::Error;

use crate::Rat;

/// Broad class of a failure, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Precondition,
    Truncation,
    Certificate,
    Other,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate polytope: dimension {dim} in ambient dimension {ambient}")]
    DegeneratePolytope { dim: usize, ambient: usize },
    #[error("inner polytope not contained in outer polytope (vertex {vertex:?} is outside)")]
    NotContained { vertex: Vec<String> },
    #[error("not a unit: constant term is zero")]
    NotAUnit,
    #[error("point not on variety: residual {residual}")]
    PointNotOnVariety { residual: Rat },
    #[error("coordinate system not transverse: dG/dy vanishes at the base point")]
    NotTransverse,
    #[error(
        "beta is not gamma-minimal: exponent {exponent:?} has weight {weight} < {beta_weight}"
    )]
    NotGammaMinimal {
        exponent: Vec<u32>,
        weight: i64,
        beta_weight: i64,
    },
    #[error("valuation undetermined at this truncation order ({trunc})")]
    ValuationUndetermined { trunc: u32 },
    #[error(
        "linearly dependent input: member {index} reduces to zero (dependent at order {trunc})"
    )]
    LinearlyDependent { index: usize, trunc: u32 },
    #[error("truncation insufficient: {0}")]
    TruncationInsufficient(String),
    #[error("no separating weight found within bound {bound} (raise bound or truncation)")]
    NoSeparatingWeight { bound: u32 },
    #[error("gamma not separating at this truncation: section {section}")]
    GammaNotSeparating { section: usize },
    #[error("special fiber torus not full: differences do not generate the lattice")]
    LatticeNotGenerated,
    #[error("zero coordinate in torus point")]
    ZeroCoordinate,
    #[error("indeterminate point (increase truncation or move the point)")]
    IndeterminatePoint,
    #[error("pullback degenerate (truncation or near-singular point)")]
    PullbackDegenerate,
    #[error("left chart of validity at s = {s}")]
    LeftChart { s: f64 },
    #[error("certificate invalid: {0}")]
    CertificateInvalid(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            ValuationUndetermined { .. } | LinearlyDependent { .. } | TruncationInsufficient(_) => {
                ErrorClass::Truncation
            }
            CertificateInvalid(_) => ErrorClass::Certificate,
            ArityMismatch { .. }
            | EmptyInput(_)
            | InvalidArgument(_)
            | DegeneratePolytope { .. }
            | NotContained { .. }
            | NotAUnit
            | PointNotOnVariety { .. }
            | NotTransverse
            | NotGammaMinimal { .. }
            | NoSeparatingWeight { .. }
            | GammaNotSeparating { .. }
            | LatticeNotGenerated
            | ZeroCoordinate
            | Parse(_) => ErrorClass::Precondition,
            IndeterminatePoint | PullbackDegenerate | LeftChart { .. } => ErrorClass::Other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
