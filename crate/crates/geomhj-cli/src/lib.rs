//! Config-driven front end for the `geomhj` toolkit.

pub mod commands;
pub mod config;
pub mod problem;
pub mod scenario;
