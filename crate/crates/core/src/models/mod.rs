//! Closed forms and generators for concrete model families.

mod additive;
mod bernoulli;
pub mod bvn;
mod gaussian;
mod si_copula;

pub use additive::{additive_error_verify, additive_model, error_shape, AdditiveStep, ErrorShape, HistogramLaw};
pub use bernoulli::{
    bernoulli_ccx, bernoulli_classify, bernoulli_curve, bernoulli_to_model, BernoulliClass, BernoulliParams,
};
pub use gaussian::{gaussian_ccx, gaussian_discretize, gaussian_r2, GaussianSpec, MonteCarlo};
pub use si_copula::si_copula_ccx;
