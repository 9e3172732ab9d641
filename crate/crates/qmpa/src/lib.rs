//! Command-line front end and file formats for the attractor toolkit.

pub mod analysis;
pub mod commands;
pub mod error;
pub mod fixtures;
pub mod format;

pub use error::{Error, Result};
