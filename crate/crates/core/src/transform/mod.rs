//! Forward q-Laplace transform.
//!
//! `F_q(s) = ∫_0^∞ f(t) exp_q(-s t) dt`, computed either by quadrature
//! ([`forward_numeric`]) or, for the function catalog, as a power series in
//! `1/s` ([`catalog_transform`]). [`identities`] checks the operational rules
//! of the transform numerically.

mod catalog;
pub mod identities;
mod numeric;

pub(crate) use catalog::ln_rising_factorial;
pub use catalog::{
    catalog_transform, AccuracyClass, CatalogFunction, PowerSeriesTransform, Sign,
    MAX_SERIES_ARGUMENT, TRUNCATION_REL_TOL,
};
pub use numeric::{forward_numeric, forward_numeric_to, kernel_pair_integral, transform_grid};
