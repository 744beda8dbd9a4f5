//! Mixed volumes of convex bodies from flag measures.
//!
//! The crate assembles the kernel `φ^{k,l}` on pairs of flags from
//! Grassmannian moment constants and integrates it, against the flag
//! measures of two bodies, to recover the mixed functionals
//! `V_{k,l}(K, L) = C(d,k) V(K[k], −L[d−k])`. Independent oracles
//! (zonotope determinant sums, Minkowski-sum volume polynomials, the ball
//! identity) are provided for validation.

pub mod cone;
pub mod constants;
pub mod error;
pub mod flag;
pub mod flag_measure;
pub mod hull3d;
pub mod kernel;
pub mod linalg;
pub mod mc;
pub mod mixed_volume;
pub mod multilinear;
pub mod oracle;
pub mod polytope;
pub mod sampling;

pub use error::{Error, Result};
