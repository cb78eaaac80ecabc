//! Elicitation with multiple observations: losses over `m` i.i.d. draws,
//! exact verification, impossibility witnesses, Voronoi constructions and a
//! regression demonstration.

// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod cli;
pub mod error;
pub mod loss;
pub mod lp;
pub mod property;
pub mod regression;
pub mod space;
pub mod verifier;
pub mod voronoi;
pub mod witness;

pub use error::{ElicitError, Result};
pub use loss::{expected_identification, expected_loss, ExpectedLoss, MultiObsLoss};
pub use property::{Link, Property};
pub use space::{Distribution, OutcomeSpace, ProductIndex};
