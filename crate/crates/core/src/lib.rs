//! Data store selection with false-positive-prone membership indicators.
//!
//! A client looking for an item sees which caches claim to hold it and must
//! decide which of them to query. This crate provides the expected-cost
//! model, closed forms for the homogeneous case, several selection
//! strategies with approximation guarantees, and a trace-driven simulator of
//! LRU caches fronted by counting Bloom filters.

pub mod cbf;
pub mod context_file;
pub mod datastore;
pub mod error;
pub mod format;
pub mod homogeneous;
pub mod knapsack;
pub mod model;
pub mod sim;
pub mod strategies;
pub mod topology;

pub use error::{DssError, Result};
pub use model::{
    expected_cost, misindication_ratio, positive_prob, CostBreakdown, DatastoreProfile,
    SelectionContext, StoreId,
};
pub use strategies::Strategy;
