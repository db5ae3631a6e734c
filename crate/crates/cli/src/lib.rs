//! Command-line front end for the `starframe` crate.

pub mod commands;
pub mod config;
pub mod svg;
