//! Library surface of the `diampreserve` command-line tool: wire formats,
//! the tolerance-based numerical pipeline, and the command implementations
//! with their exit codes.

pub mod commands;
pub mod float;
pub mod formats;
