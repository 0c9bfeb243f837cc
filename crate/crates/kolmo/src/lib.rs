//! Command-line tooling around `kolmo-core`: machine files, text formats,
//! parallel scheduling, run manifests and the `kolmo` command tree.

pub mod cli;
pub mod formats;
pub mod machines;
pub mod manifest;
pub mod parallel;
pub mod selftest;
