//! Sequence ingestion, synthetic sequences, configuration, result files and
//! the command-line front end.

pub mod cli;
pub mod config;
pub mod results;
pub mod sequence;
pub mod synth;
