//! Conditional convex order (ccx) for finite dependence models.
//!
//! A finite model of `(Y, X)` is a [`ConditionalModel`]: a discrete law for `Y`,
//! a partition of the predictor space into weighted cells, and the matrix of
//! conditional distribution functions `F[j][i] = P(Y <= a_j | cell i)`.
//!
//! The crate decides the ccx order between two such models three independent
//! ways ([`ccx::ccx_compare`], [`reduce::ccx_via_concordance`],
//! [`oracle::ccx_bruteforce`]), reduces any model to a bivariate
//! stochastically increasing grid, and evaluates the dependence measures that
//! are monotone in the order (Chatterjee's xi and its convex generalisations,
//! the integrated R², and rearranged concordance measures).

// `!(a < b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops mirror the matrix formulas they implement.
#![allow(clippy::needless_range_loop)]

pub mod ccx;
pub mod dist_core;
pub mod error;
pub mod measures;
pub mod models;
pub mod oracle;
pub mod rearrange;
pub mod reduce;
pub mod verdict;

mod numeric;

pub use ccx::{ccx_compare, ComparisonResult, LevelComparison, Witness};
pub use dist_core::{ConditionalModel, DiscreteMarginal, StepFunction};
pub use error::{Error, Result};
pub use reduce::BivariateSIGrid;
pub use verdict::Verdict;

/// Default comparison tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;
