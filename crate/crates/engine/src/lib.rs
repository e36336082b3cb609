//! File formats, configuration and the command-line driver around
//! `aura-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod evaluate;
pub mod output;
pub mod records;
pub mod stream_io;
pub mod tables;
pub mod tune;

pub use error::{EngineError, ExitStatus};
