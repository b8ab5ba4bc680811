//! File formats, corpus generation, evaluation and the command-line front end
//! around [`nrvad_core`].

pub mod cli;
pub mod config;
pub mod corpus;
pub mod error;
pub mod manifest;
pub mod runner;
pub mod scorefile;
pub mod wav;

pub use error::{Error, Result};
pub use nrvad_core;
