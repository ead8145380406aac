//! Experiment recipes behind the `esn-lab` binary, exposed as a library so
//! integration tests can drive them directly.

pub mod artifact;
pub mod config;
pub mod measure;
pub mod recipes;
