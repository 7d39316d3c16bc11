//! Exact rational scalars, integer-lattice linear algebra and unimodular
//! affine maps.

mod lattice;
pub mod matrix;
mod snf;
mod unimodular;

pub use lattice::{differences_generate_lattice, LatticeVector};
pub use snf::{smith_normal_form, Snf};
pub use unimodular::{apply_unimodular, UnimodularAffineMap};
