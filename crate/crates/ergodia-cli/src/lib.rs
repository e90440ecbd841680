//! Library half of the `ergodia` command-line harness: experiment specs,
//! validation and dispatch. The binary in `main.rs` only parses flags,
//! resolves the seed and writes artifacts.

pub mod runner;
pub mod spec;
