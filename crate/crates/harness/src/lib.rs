//! Check registry, corpus runner, content-addressed cache and sweeps over
//! `sumprodlab-core`.

pub mod cache;
pub mod corpus;
pub mod error;
pub mod registry;
pub mod runner;
pub mod sweep;

pub use error::{HarnessError, Result};

/// Version of the JSON report bundle.
pub const SCHEMA_VERSION: u32 = 1;
