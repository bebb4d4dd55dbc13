//! Cybersickness prediction from VR gameplay telemetry.
//!
//! Sessions are flattened into 34-attribute frame vectors ([`dataset`]),
//! classified by tree-family learners ([`learners`]), evaluated with
//! stratified cross-validation ([`eval`]) and turned into mitigation
//! suggestions ([`advisor`]). [`synth`] generates seeded sessions with a
//! known risk model for testing, [`viz`] renders heatmaps and tables, and
//! [`serve`] scores frames over a line-delimited JSON protocol.

// `!(x > 0.0)` style guards deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod advisor;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod learners;
pub mod model;
pub mod seed;
pub mod serve;
pub mod synth;
pub mod viz;

pub use error::{Error, Result};
