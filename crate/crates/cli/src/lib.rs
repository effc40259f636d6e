//! Batch front end for the randomized threshold optimizer. The binary in
//! `main.rs` only parses flags; everything it runs lives here so the
//! acceptance suite can drive the same code paths.

pub mod adult;
pub mod checks;
pub mod commands;
pub mod config;
pub mod exit;
pub mod sweep;
