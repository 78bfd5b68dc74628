//! IO, file formats, configuration, and command implementations for the
//! `cola` binary. Everything the CLI does is reachable through this library
//! so integration tests can drive the pipeline in-process.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod manifest;
pub mod memory;
pub mod parallel;
