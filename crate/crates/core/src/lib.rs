//! Percentile-class citation impact indicators.
//!
//! The I3 family weighs a unit's papers by the percentile class they reach in
//! a reference population: `I3(99-100, 90-10, 50-2, 0-1)` counts a paper in
//! the top-1% a hundred times, one in the top-10% ten times, and so on. The
//! crate covers the whole pipeline:
//!
//! 1. [`corpus`]: ingest publication records and external journal metrics.
//! 2. [`percentile`]: citation thresholds and per-unit class counts, globally
//!    or per subject category, with two treatments of ties.
//! 3. [`scheme`]: weighting schemes, distinct class counts, I3, I3/N, bounds.
//! 4. [`stats`]: chi-square, residuals, z-tests, and Cohen's h and w for
//!    comparing two profiles or one profile against expectation.
//! 5. [`analysis`]: rankings, Spearman matrices, h-index, and a seeded
//!    synthetic corpus generator.
//! 6. [`report`]: CSV, JSON, and Markdown renderings.

pub mod analysis;
pub mod corpus;
pub mod error;
pub mod fixtures;
pub mod percentile;
pub mod report;
pub mod scheme;
pub mod stats;

pub use error::{Error, Result};
pub use percentile::{BoundarySet, ClassCounts, CountingMode};
pub use scheme::{IndicatorResult, WeightingScheme};
