//! Reversible overlays of analysis results on source code.
//!
//! Analyzers produce metadata anchored to lines and declarations; the
//! overlay engine writes it into source files as comment markers (or
//! native annotations) and strips it back out byte for byte.

pub mod analyzers;
pub mod commands;
pub mod config;
pub mod manifest;
pub mod marker;
pub mod overlay;
pub mod scan;
pub mod text;
pub mod vcs;
