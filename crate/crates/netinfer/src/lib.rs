//! File formats, configuration, reports and the experiment pipeline built on
//! [`netinfer_core`].

pub mod config;
pub mod error;
pub mod formats;
pub mod pipeline;
pub mod report;

pub use error::{Error, Result};
pub use netinfer_core as core;
