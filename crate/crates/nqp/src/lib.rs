//! File formats and command-line front end for NQP-matrix reconstruction.

pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod json;
