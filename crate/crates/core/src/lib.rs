//! Personalized performance regression for black-box optimization.
//!
//! The pipeline computes landscape features for problem instances, fits a
//! grid of tree-based regressors, and combines the best regressor of each
//! technique into a weighted ensemble per problem class. A classifier over
//! the features picks which class ensemble answers a query.

pub mod ela;
pub mod error;
pub mod evaluation;
pub mod io;
pub mod personalize;
pub mod rng;
pub mod suite;
pub mod target;
pub mod trees;

pub use error::{Error, Result};
