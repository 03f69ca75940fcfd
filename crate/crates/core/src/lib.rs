//! Measurement toolkit for the coupled development of two indicator
//! subsystems across regions and years.
//!
//! The pipeline chains four stages over a dense (year, region, indicator)
//! panel:
//!
//! 1. [`entropy`] — entropy-weight composite indices per subsystem
//! 2. [`coupling`] — coupling degree, coordination degree, stage
//!    classification, and yearly / macro-region summaries
//! 3. [`spatial`] — global Moran's I and LISA cluster classification over an
//!    adjacency-based weight matrix
//! 4. [`sde`] — weighted standard-deviational ellipses and centroid drift
//!
//! [`pipeline::run_pipeline`] drives all stages from a single TOML
//! configuration and emits CSV/GeoJSON reports plus a run manifest.

pub mod config;
pub mod coupling;
pub mod data;
pub mod entropy;
pub mod error;
pub mod geojson;
pub mod panel;
pub mod pipeline;
pub mod sde;
pub mod spatial;

pub use error::{Error, Result};
