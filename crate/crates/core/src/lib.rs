//! Tsallis q-deformed Laplace transform with the type-I kernel `exp_q(-s t)`.
//!
//! * [`qmath`]: q-exponential, Q-polynomials, Pochhammer, log-gamma.
//! * [`hypergeom`]: `pFq` series used by the closed-form catalog.
//! * [`quadrature`]: adaptive Gauss-Kronrod integration.
//! * [`transform`]: numeric and closed-form forward transforms, plus
//!   checks of the transform's operational identities.
//! * [`inverse`]: real-variable Post-Widder inversion and exact series inversion.
//! * [`statmech`]: partition functions and densities of states for the ideal
//!   gas and the harmonic oscillator.
//! * [`par`]: ordered grid evaluation, parallel when the `parallel` feature is on.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod hypergeom;
pub mod inverse;
pub mod par;
pub mod qmath;
pub mod quadrature;
pub mod statmech;
pub mod transform;

pub use error::{Error, Result};
pub use qmath::QParam;
