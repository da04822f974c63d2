//! Token-auction engine: per-token bid aggregation, monotone-rule auditing,
//! stable sampling with second-price payments, and multi-step generation.

pub mod aggregation;
pub mod audit;
pub mod distributions;
pub mod fuzz;
pub mod generation;
pub mod payments;
pub mod preferences;
pub mod sampling;
pub mod scalar;
pub mod suite;

pub use aggregation::{AggregationRule, BidProfile};
pub use distributions::{TokenAlphabet, TokenDistribution, TokenSequence};
pub use preferences::{PreferenceVerdict, TokenPartition};
pub use scalar::{FloatScalar, Scalar};

/// Exact arbitrary-precision rational scalar.
pub type Rational = num_rational::BigRational;
/// Exact-arithmetic distribution, the default for auditing and payments.
pub type RationalDist = TokenDistribution<Rational>;
/// Float distribution, the default for KL and entropy work.
pub type FloatDist = TokenDistribution<f64>;
/// Exact bid profile.
pub type Bids = BidProfile<Rational>;
