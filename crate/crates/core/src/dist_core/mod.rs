//! Univariate marginals, generalised inverses, the finite joint-model
//! representation, and sample ingestion.

mod ingest;
mod marginal;
mod model;
mod step;

pub use ingest::{from_samples, read_samples_csv, SampleRow, DEFAULT_MAX_ATOMS};
pub use marginal::{marginal_constraint, range_closure, DiscreteMarginal};
pub use model::{uniformize, ConditionalModel, GridDocument};
pub use step::StepFunction;

/// Tolerance for probability vectors summing to one.
pub const PROB_SUM_TOL: f64 = 1e-12;
/// Tolerance for the marginal-consistency invariant of a model.
pub const CONSISTENCY_TOL: f64 = 1e-10;
