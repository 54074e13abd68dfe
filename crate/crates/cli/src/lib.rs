//! Command line and HTTP front ends for the chromasheet engine.

pub mod cli;
pub mod server;
