//! Stability certificates for convolution-dominated infinite matrices.

pub mod blocks;
pub mod certifier;
pub mod error;
pub mod geometry;
pub mod operator;
pub mod oracle;
pub mod report;
pub mod scalar;
pub mod spec_io;
pub mod worked_example;

pub use error::{Error, Result};
