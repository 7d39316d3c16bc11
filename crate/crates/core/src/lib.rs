//! Toric degenerations of projectively embedded varieties built from
//! initial-term valuations.
//!
//! The crate is split along the computation:
//!
//! * [`exact`]: rationals, lattice vectors, Smith normal form, unimodular maps
//! * [`polytope`]: exact hulls, normalized volumes, `Δ_k` approximants
//! * [`series`]: truncated multivariate power series and implicit expansion
//! * [`linsys`]: the lexicographic initial-term valuation on a linear system
//! * [`degen`]: the degenerated sections `f̃_j(ũ, t)` and immersion checks
//! * [`flow`]: Kähler pullbacks, the gradient-Hamiltonian flow, moment maps
//! * [`gromov`]: simplex-size and ball-packing certificates
//!
//! Exact code is generic over [`scalar::Field`]/[`scalar::OrderedField`];
//! the numeric code is generic over [`scalar::Real`]. The aliases below fix
//! the concrete types used by the pipeline.

pub mod degen;
pub mod error;
pub mod exact;
pub mod flow;
pub mod gromov;
pub mod linsys;
pub mod polytope;
pub mod scalar;
pub mod series;

pub use error::{Error, ErrorClass, Result};

/// Arbitrary-precision rational, always reduced with positive denominator.
pub type Rat = num_rational::BigRational;
/// Exact polytope.
pub type QPolytope = polytope::Polytope<Rat>;
/// Exact truncated power series.
pub type QSeries = series::TruncSeries<Rat>;
/// A point `(ũ, t)` of the family chart in double precision.
pub type FlowState = flow::State<f64>;
