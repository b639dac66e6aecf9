//! Rank-difference disparity analytics for municipality-level daily case
//! counts disaggregated by population group.
//!
//! The pipeline is: [`ingest`] loads cases, populations and boundaries into
//! an immutable [`ingest::CaseCube`] / [`ingest::PopulationTable`] pair,
//! [`metrics`] computes ranks, rank-difference series and per-group summary
//! statistics, [`classify`] partitions municipalities in
//! (skewness, persistence) space, and [`render`] emits static SVG/HTML
//! documents. [`synth`] generates seeded fixtures and hosts the naive
//! oracles the test suite checks the engine against.

pub mod classify;
pub mod cli;
pub mod error;
pub mod ingest;
pub mod metrics;
pub mod render;
pub mod synth;

pub use error::{Error, Result};
pub use ingest::{CaseCube, DateAxis, GroupId, Municipality, PopulationTable, QualityReport};
