//! File formats, dataset plumbing and the command-line front end around
//! [`phogsvm_core`]: PGM/PNG decoding, manifest and feature files, model
//! persistence and the `phogsvm` binary's subcommands.

pub mod cli;
pub mod features;
pub mod formats;
pub mod manifest;
pub mod model_file;
pub mod report;
pub mod selftest;
pub mod sweep;

pub use phogsvm_core as core;
